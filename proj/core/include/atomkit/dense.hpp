#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "atomkit/errors.hpp"

namespace atomkit {

/// Shape of an ambient element. Vectors are (n, 1).
struct Shape {
  int rows = 0;
  int cols = 1;

  constexpr int size() const { return rows * cols; }
  constexpr bool is_vector() const { return cols == 1; }
  constexpr bool is_square() const { return rows == cols; }
  friend constexpr bool operator==(const Shape&, const Shape&) = default;
};

/// Dense real vector or matrix, row-major. The space in which primal and
/// dual elements live.
class Dense {
 public:
  Dense() = default;
  explicit Dense(Shape s) : shape_(s), v_(static_cast<size_t>(s.size()), 0.0) {}
  Dense(int rows, int cols) : Dense(Shape{rows, cols}) {}
  Dense(Shape s, std::vector<double> values) : shape_(s), v_(std::move(values)) {
    if (static_cast<int>(v_.size()) != s.size())
      throw ShapeMismatch("Dense: value count does not match shape");
  }

  static Dense vector(std::vector<double> values) {
    const int n = static_cast<int>(values.size());
    return Dense(Shape{n, 1}, std::move(values));
  }

  static Dense identity(int n) {
    Dense I(n, n);
    for (int i = 0; i < n; ++i) I(i, i) = 1.0;
    return I;
  }

  Shape shape() const { return shape_; }
  int rows() const { return shape_.rows; }
  int cols() const { return shape_.cols; }
  int size() const { return shape_.size(); }
  bool empty() const { return v_.empty(); }

  double& operator()(int i, int j) { return v_[static_cast<size_t>(i) * shape_.cols + j]; }
  double operator()(int i, int j) const { return v_[static_cast<size_t>(i) * shape_.cols + j]; }
  double& operator[](int k) { return v_[static_cast<size_t>(k)]; }
  double operator[](int k) const { return v_[static_cast<size_t>(k)]; }

  std::span<double> values() { return v_; }
  std::span<const double> values() const { return v_; }

  bool all_finite() const {
    for (double x : v_)
      if (!std::isfinite(x)) return false;
    return true;
  }

  /// Same data viewed with a different shape (size must match).
  Dense reshaped(Shape s) const {
    if (s.size() != shape_.size()) throw ShapeMismatch("reshaped: size mismatch");
    return Dense(s, v_);
  }

  Dense& operator+=(const Dense& o) {
    check_same(o);
    for (size_t k = 0; k < v_.size(); ++k) v_[k] += o.v_[k];
    return *this;
  }
  Dense& operator-=(const Dense& o) {
    check_same(o);
    for (size_t k = 0; k < v_.size(); ++k) v_[k] -= o.v_[k];
    return *this;
  }
  Dense& operator*=(double a) {
    for (double& x : v_) x *= a;
    return *this;
  }

  friend Dense operator+(Dense a, const Dense& b) { return a += b; }
  friend Dense operator-(Dense a, const Dense& b) { return a -= b; }
  friend Dense operator*(double a, Dense x) { return x *= a; }
  friend Dense operator-(Dense x) { return x *= -1.0; }

 private:
  void check_same(const Dense& o) const {
    if (!(shape_ == o.shape_)) throw ShapeMismatch("Dense: shape mismatch");
  }

  Shape shape_;
  std::vector<double> v_;
};

/// axpy: y += a*x
inline void axpy(double a, const Dense& x, Dense& y) {
  if (!(x.shape() == y.shape())) throw ShapeMismatch("axpy: shape mismatch");
  auto xv = x.values();
  auto yv = y.values();
  for (size_t k = 0; k < yv.size(); ++k) yv[k] += a * xv[k];
}

/// Trace inner product <a, b> = sum of elementwise products.
inline double dot(const Dense& a, const Dense& b) {
  if (!(a.shape() == b.shape())) throw ShapeMismatch("dot: shape mismatch");
  double s = 0.0;
  auto av = a.values();
  auto bv = b.values();
  for (size_t k = 0; k < av.size(); ++k) s += av[k] * bv[k];
  return s;
}

/// Frobenius / Euclidean norm.
inline double fnorm(const Dense& a) { return std::sqrt(dot(a, a)); }

inline double one_norm(const Dense& a) {
  double s = 0.0;
  for (double x : a.values()) s += std::abs(x);
  return s;
}

inline double inf_norm(const Dense& a) {
  double s = 0.0;
  for (double x : a.values()) s = std::max(s, std::abs(x));
  return s;
}

inline Dense transpose(const Dense& a) {
  Dense t(a.cols(), a.rows());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

inline Dense matmul(const Dense& a, const Dense& b) {
  if (a.cols() != b.rows()) throw ShapeMismatch("matmul: inner dimension mismatch");
  Dense c(a.rows(), b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (int j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

/// A * x for a matrix and a vector (n,1).
inline Dense matvec(const Dense& a, const Dense& x) {
  if (x.cols() != 1 || a.cols() != x.rows())
    throw ShapeMismatch("matvec: dimension mismatch");
  Dense y(a.rows(), 1);
  for (int i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (int j = 0; j < a.cols(); ++j) s += a(i, j) * x[j];
    y[i] = s;
  }
  return y;
}

/// A^T * x.
inline Dense matvec_t(const Dense& a, const Dense& x) {
  if (x.cols() != 1 || a.rows() != x.rows())
    throw ShapeMismatch("matvec_t: dimension mismatch");
  Dense y(a.cols(), 1);
  for (int i = 0; i < a.rows(); ++i) {
    const double xi = x[i];
    if (xi == 0.0) continue;
    for (int j = 0; j < a.cols(); ++j) y[j] += a(i, j) * xi;
  }
  return y;
}

/// Rank-one outer product u v^T.
inline Dense outer(const Dense& u, const Dense& v) {
  Dense m(u.size(), v.size());
  for (int i = 0; i < u.size(); ++i)
    for (int j = 0; j < v.size(); ++j) m(i, j) = u[i] * v[j];
  return m;
}

inline double max_abs_asymmetry(const Dense& s) {
  double d = 0.0;
  for (int i = 0; i < s.rows(); ++i)
    for (int j = i + 1; j < s.cols(); ++j) d = std::max(d, std::abs(s(i, j) - s(j, i)));
  return d;
}

inline Dense symmetrized(const Dense& s) {
  Dense r(s.rows(), s.cols());
  for (int i = 0; i < s.rows(); ++i)
    for (int j = 0; j < s.cols(); ++j) r(i, j) = 0.5 * (s(i, j) + s(j, i));
  return r;
}

}  // namespace atomkit
