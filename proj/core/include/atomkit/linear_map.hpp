#pragma once

#include <memory>
#include <string>

#include "atomkit/dense.hpp"
#include "atomkit/linalg.hpp"

namespace atomkit {

/// Invertible-aware linear map used by the transform combinator. Either a
/// dense matrix acting on flattened elements, a scalar multiple of the
/// identity, or the orthonormal DCT (whose inverse is its adjoint).
class LinearMap {
 public:
  enum class Kind { dense, scaling, dct_forward, dct_transpose };

  static LinearMap dense_map(Dense m);
  static LinearMap scaling(double alpha, int n);
  /// x -> DCT(x) on flattened elements of length n.
  static LinearMap dct_forward(int n);
  /// x -> DCT^T(x): columns are the cosine basis vectors.
  static LinearMap dct_transpose(int n);

  Kind kind() const { return kind_; }
  int domain_size() const { return domain_; }
  int range_size() const { return range_; }
  double scale_factor() const { return alpha_; }
  const Dense& matrix() const { return m_; }

  Dense apply(const Dense& x) const;
  Dense apply_adjoint(const Dense& y) const;
  bool invertible() const;
  Dense apply_inverse(const Dense& y) const;
  Dense apply_inverse_adjoint(const Dense& x) const;

  std::string kind_name() const;

 private:
  LinearMap() = default;

  Kind kind_ = Kind::scaling;
  int domain_ = 0;
  int range_ = 0;
  double alpha_ = 1.0;
  Dense m_;
  std::shared_ptr<const Dense> inverse_;  // cached for dense invertible maps
};

}  // namespace atomkit
