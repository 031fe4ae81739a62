#pragma once

#include <functional>
#include <string>
#include <vector>

#include "atomkit/atomic_sets.hpp"
#include "atomkit/linalg.hpp"

namespace atomkit {

/// Differentiable convex objective. `curvature(x, d)` returns d^T H d when a
/// quadratic form is available (enables exact linesearch); leave it empty
/// otherwise.
struct SmoothObjective {
  std::function<double(const Dense&)> value;
  std::function<Dense(const Dense&)> gradient;
  std::function<double(const Dense&, const Dense&)> curvature;
};

/// General linear operator between dense spaces.
struct LinearOperator {
  Shape domain;
  Shape range;
  std::function<Dense(const Dense&)> apply;
  std::function<Dense(const Dense&)> adjoint;
};

LinearOperator identity_operator(Shape s);
LinearOperator dense_matrix_operator(Dense a);
/// Masked sampling: dense (m, n) -> observed values (nnz, 1).
LinearOperator mask_operator(const MaskedMatrix& mask);

/// f(x) = 1/2 ||A x - b||^2 with gradient and exact curvature.
SmoothObjective least_squares_objective(const LinearOperator& a, const Dense& b);

struct TraceRecord {
  int k = 0;
  double gap = 0.0;
  double objective = 0.0;
  double theta = 0.0;
  std::string atom_tag;
};

struct CGTrace {
  std::vector<TraceRecord> records;
  bool converged = false;
  int iterations = 0;
};

std::string trace_to_csv(const CGTrace& trace);

enum class StepRule { exact, harmonic };

struct CGOptions {
  double tau = 1.0;
  double eps = -1.0;  // < 0: default 1e-6 * (1 + |f(x0)|)
  int max_iter = 500;
  StepRule step_rule = StepRule::exact;
  double expose_tol = kExposeTol;
};

struct PrimalResult {
  Dense x;
  CGTrace trace;
};

/// Conditional gradient on min f(x) s.t. gauge(x) <= tau.
PrimalResult primal_cg(const SmoothObjective& obj, const AtomicSet& set,
                       const CGOptions& opts);

/// g(x) = alpha_star * support(z) - <x, z>, an upper bound on f(x) - f(x*).
double duality_gap(const AtomicSet& set, const Dense& x, const Dense& z,
                   double alpha_star);

struct DualCertificate {
  Dense z_star;            // negative gradient at termination
  double support_value = 0.0;
  double gap_at_exit = 0.0;
  ExposedFace exposed;
};

struct DualResult {
  DualCertificate certificate;
  CGTrace trace;
  Dense residual;  // R at exit, with R = b - A x
};

/// Dual conditional gradient for f(x) = 1/2 ||A x - b||^2: tracks only the
/// residual R and the restricted image Q, never the primal iterate.
DualResult dual_cg_least_squares(const LinearOperator& a, const Dense& b,
                                 const AtomicSet& set, const CGOptions& opts);

struct RecoverOptions {
  int max_iter = 2000;
  int face_k = 4;
  double face_tol = 1e-6;
  double tol = 1e-8;
};

/// Solve the reduced problem over the faces exposed by the certificate:
/// min f(sum_i x_i) with each x_i a conic combination of part i's exposed
/// atoms (spectral faces are parameterized by a PSD block), coefficient
/// sums capped at tau.
std::vector<Dense> recover_from_certificate(const SmoothObjective& obj,
                                            const DualCertificate& cert,
                                            const std::vector<AtomicSetPtr>& descs,
                                            double tau,
                                            const RecoverOptions& opts = {});

/// Projected-gradient solve of min 1/2 ||mask(U S V^T) - b||^2 over
/// {S PSD, trace(S) <= tau}. `b` carries the mask and the observed values.
Dense psd_reduced_solve(const Dense& u, const Dense& v, const MaskedMatrix& b,
                        double tau, int max_iter = 2000);

enum class OptimalityForm { unconstrained, gauge_constrained, level_constrained };

struct OptimalityReport {
  double residual = 0.0;     // alignment residual of (x, -grad)
  double gauge_x = 0.0;
  double sigma_z = 0.0;
  bool aligned = false;
  bool passed = false;
  std::string detail;
};

/// Certificate check: x is optimal for the given problem form iff it is
/// aligned with the negative gradient (plus the form-specific side checks).
OptimalityReport check_optimality(const AtomicSet& set, const Dense& x,
                                  const Dense& grad, OptimalityForm form,
                                  double param, double tol);

/// Primal-dual optimality for the polar gauge pair: membership in D and D',
/// <x,z> = 1, and alignment.
bool check_gauge_duality(const AtomicSet& set, const Dense& x, const Dense& z,
                         const std::function<bool(const Dense&)>& member_d,
                         const std::function<bool(const Dense&)>& member_dprime,
                         double tol);

}  // namespace atomkit
