#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "atomkit/dense.hpp"
#include "atomkit/linalg.hpp"
#include "atomkit/solvers.hpp"

namespace atomkit {

// --- matrix completion ------------------------------------------------------

struct MatCompInstance {
  MaskedMatrix omega;  // mask with unit values
  MaskedMatrix b;      // observed values on the mask
  int m = 0;
  int n = 0;
  int true_rank = 0;
  double density = 0.0;
  double noise_scale = 0.0;
  uint64_t seed = 0;
};

/// Planted low-rank instance: B = mask(U V^T + noise * N) with U, V, N
/// standard normal and true rank round(m / 100).
MatCompInstance gen_matcomp_instance(int m, int n, double density = 0.10,
                                     double noise = 0.1, uint64_t seed = 0);

/// Redraws the planted factors of an instance (deterministic per seed).
std::pair<Dense, Dense> matcomp_planted_factors(const MatCompInstance& inst);

/// Nuclear norm of the planted U V^T, computed from the r x r Gram matrices.
double matcomp_planted_nuclear_norm(const MatCompInstance& inst);

struct BenchRow {
  int size = 0;
  double residual_primal = 0.0;
  int rank_primal = 0;
  double time_primal_s = 0.0;
  double residual_dual = 0.0;
  int rank_dual = 0;
  double time_dual_s = 0.0;
};

/// Primal vs dual conditional gradient on planted completion instances,
/// tau = nuclear norm of the planted matrix, fixed iteration budget.
/// Sizes are independent solves and may run on `jobs` threads; row order
/// follows the input order regardless of scheduling.
std::vector<BenchRow> run_matcomp_benchmark(const std::vector<int>& sizes,
                                            int iters = 10, int ell = 4,
                                            uint64_t seed = 0, int jobs = 1);

std::string benchrows_to_csv(const std::vector<BenchRow>& rows, bool include_time);

/// Smallest k whose leading singular values carry 90% of the Frobenius norm.
int estimate_rank_90(const Dense& x);
int estimate_rank_90_sigma(const Dense& sigma);

// --- morphological component analysis --------------------------------------

struct DemixInstance {
  int size = 0;
  Dense x_sparse;   // spikes
  Dense x_lowrank;  // chessboard-like low-rank pattern
  Dense x_dct;      // structured noise, sparse in the cosine basis
  Dense b;          // exact sum of the three components
  uint64_t seed = 0;
  double sparse_frac = 0.0;
  double dct_frac = 0.0;
  int rank = 0;
};

DemixInstance gen_demix_instance(int size = 64, double sparse_frac = 0.02, int rank = 2,
                                 double dct_frac = 0.02, uint64_t seed = 0);

struct DemixResult {
  std::vector<Dense> components;  // sparse, low-rank, cosine-sparse
  Dense z_star;
  double tau = 0.0;
  double stage1_objective = 0.0;  // 1/2 ||b - x||^2 at stage-1 exit
  double stage1_gap = 0.0;
  double stage2_objective = 0.0;
  std::vector<double> rel_errors;
  std::vector<double> alignment_residuals;
  CGTrace trace;
};

/// Two-stage demixing: dual conditional gradient over the sum of the three
/// atomic sets, then component recovery over the exposed faces.
/// tau <= 0 selects 1.1x the largest planted component gauge.
DemixResult run_mca_demix(const DemixInstance& inst, double tau, int iters,
                          const RecoverOptions& recover = {});

std::string demix_metrics_json(const DemixResult& r);

/// 8-bit binary PGM with values linearly mapped from [min, max].
void write_pgm(const std::string& path, const Dense& image);

}  // namespace atomkit
