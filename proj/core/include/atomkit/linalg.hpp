#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "atomkit/dense.hpp"

namespace atomkit {

struct SingularTriple {
  double sigma = 0.0;
  Dense u;  // unit left vector (rows, 1)
  Dense v;  // unit right vector (cols, 1)
};

struct MaskedEntry {
  int i = 0;
  int j = 0;
  double value = 0.0;
};

/// Sparse observation pattern with values: unique (i, j) pairs in
/// lexicographic order.
class MaskedMatrix {
 public:
  MaskedMatrix() = default;
  MaskedMatrix(Shape shape, std::vector<MaskedEntry> entries);

  Shape shape() const { return shape_; }
  int nnz() const { return static_cast<int>(entries_.size()); }
  const std::vector<MaskedEntry>& entries() const { return entries_; }

  /// Values of a dense matrix at the mask positions, as an (nnz, 1) vector.
  Dense sample(const Dense& x) const;

  /// Adjoint of sample: scatter an (nnz, 1) vector into a dense matrix.
  Dense scatter(const Dense& values) const;

  /// Own values as an (nnz, 1) vector.
  Dense values_vector() const;

  /// Dense matrix with the values at mask positions and zeros elsewhere.
  Dense to_dense() const;

  double fnorm() const;

  /// Same mask, new values.
  MaskedMatrix with_values(const Dense& values) const;

 private:
  Shape shape_;
  std::vector<MaskedEntry> entries_;
};

/// Matrix-free operator with apply and adjoint-apply.
struct LinOp {
  int rows = 0;
  int cols = 0;
  std::function<Dense(const Dense&)> apply;     // (cols,1) -> (rows,1)
  std::function<Dense(const Dense&)> adjoint;   // (rows,1) -> (cols,1)
};

LinOp dense_linop(const Dense& a);

// --- dense kernels -----------------------------------------------------

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
/// Returns (eigenvalues descending, eigenvectors as columns).
std::pair<Dense, Dense> jacobi_eig_sym(const Dense& s);

struct DenseSvd {
  Dense u;      // m x r, orthonormal columns
  Dense sigma;  // (r, 1), descending, r = min(m, n)
  Dense v;      // n x r, orthonormal columns
};

/// One-sided Jacobi SVD of a dense matrix.
DenseSvd jacobi_svd(const Dense& a);

/// Solve A x = b by partially pivoted LU. A square.
Dense solve_lu(const Dense& a, const Dense& b);

/// Least squares min ||A c - b|| by Householder QR; requires rows >= cols.
Dense lstsq(const Dense& a, const Dense& b);

// --- iterative kernels --------------------------------------------------

/// Top-k singular triples of an operator, descending sigma. Lanczos
/// bidiagonalization with full reorthogonalization and a seeded start
/// vector; dense Jacobi fallback when min(rows, cols) <= 32.
std::vector<SingularTriple> top_singular_triples(const LinOp& a, int k,
                                                 double tol = 1e-10,
                                                 int max_iter = 1000,
                                                 uint64_t seed = 7);
std::vector<SingularTriple> top_singular_triples(const Dense& a, int k,
                                                 double tol = 1e-10,
                                                 int max_iter = 1000,
                                                 uint64_t seed = 7);

/// Maximum eigenvalue and eigenvector of a symmetric matrix.
std::pair<double, Dense> sym_eig_top(const Dense& s, double tol = 1e-10,
                                     int max_iter = 1000, uint64_t seed = 7);

/// Maximum generalized eigenvalue of the pencil (Z, L) with L = V diag(lambda) V^T,
/// V orthonormal columns, lambda > 0. Returns (lambda_max, p) with p^T diag(lambda) p = 1.
std::pair<double, Dense> gen_eig_max(const Dense& z, const Dense& v,
                                     const Dense& lambda);

// --- transforms and projections ------------------------------------------

enum class DctDirection { forward, inverse };

/// Orthonormal DCT-II (forward) and its transpose (inverse). Fast recursive
/// path for power-of-two lengths, direct evaluation otherwise.
Dense dct_apply(const Dense& x, DctDirection direction);

/// Euclidean projection onto {c >= 0, sum c = tau}.
Dense project_simplex(const Dense& v, double tau);

/// Euclidean projection onto {c >= 0, sum c <= tau}.
Dense project_simplex_cap(const Dense& v, double tau);

/// Euclidean projection onto the one-norm ball of radius tau.
Dense project_l1_ball(const Dense& x, double tau);

/// Euclidean projection onto {S symmetric PSD, trace(S) <= tau}.
Dense project_trace_capped_psd(const Dense& s, double tau);

}  // namespace atomkit
