#include "atomkit/linear_map.hpp"

#include "atomkit/errors.hpp"

namespace atomkit {

LinearMap LinearMap::dense_map(Dense m) {
  LinearMap out;
  out.kind_ = Kind::dense;
  out.domain_ = m.cols();
  out.range_ = m.rows();
  out.m_ = std::move(m);
  if (out.m_.shape().is_square()) {
    // cache the inverse when it exists
    try {
      Dense inv = solve_lu(out.m_, Dense::identity(out.m_.rows()));
      out.inverse_ = std::make_shared<const Dense>(std::move(inv));
    } catch (const NumericFailure&) {
      out.inverse_ = nullptr;
    }
  }
  return out;
}

LinearMap LinearMap::scaling(double alpha, int n) {
  LinearMap out;
  out.kind_ = Kind::scaling;
  out.domain_ = n;
  out.range_ = n;
  out.alpha_ = alpha;
  return out;
}

LinearMap LinearMap::dct_forward(int n) {
  LinearMap out;
  out.kind_ = Kind::dct_forward;
  out.domain_ = n;
  out.range_ = n;
  return out;
}

LinearMap LinearMap::dct_transpose(int n) {
  LinearMap out;
  out.kind_ = Kind::dct_transpose;
  out.domain_ = n;
  out.range_ = n;
  return out;
}

namespace {

Dense flat_apply(const Dense& m, const Dense& x) {
  Dense xv = x.reshaped(Shape{x.size(), 1});
  return matvec(m, xv);
}

Dense flat_apply_t(const Dense& m, const Dense& x) {
  Dense xv = x.reshaped(Shape{x.size(), 1});
  return matvec_t(m, xv);
}

}  // namespace

Dense LinearMap::apply(const Dense& x) const {
  if (x.size() != domain_) throw ShapeMismatch("LinearMap::apply: size mismatch");
  switch (kind_) {
    case Kind::dense:
      return flat_apply(m_, x).reshaped(x.shape().size() == range_ ? x.shape()
                                                                   : Shape{range_, 1});
    case Kind::scaling:
      return alpha_ * x;
    case Kind::dct_forward:
      return dct_apply(x, DctDirection::forward);
    case Kind::dct_transpose:
      return dct_apply(x, DctDirection::inverse);
  }
  throw NumericFailure("LinearMap::apply: bad kind");
}

Dense LinearMap::apply_adjoint(const Dense& y) const {
  if (y.size() != range_) throw ShapeMismatch("LinearMap::apply_adjoint: size mismatch");
  switch (kind_) {
    case Kind::dense:
      return flat_apply_t(m_, y).reshaped(y.shape().size() == domain_ ? y.shape()
                                                                      : Shape{domain_, 1});
    case Kind::scaling:
      return alpha_ * y;
    case Kind::dct_forward:
      return dct_apply(y, DctDirection::inverse);
    case Kind::dct_transpose:
      return dct_apply(y, DctDirection::forward);
  }
  throw NumericFailure("LinearMap::apply_adjoint: bad kind");
}

bool LinearMap::invertible() const {
  switch (kind_) {
    case Kind::dense:
      return inverse_ != nullptr;
    case Kind::scaling:
      return alpha_ != 0.0;
    case Kind::dct_forward:
    case Kind::dct_transpose:
      return true;
  }
  return false;
}

Dense LinearMap::apply_inverse(const Dense& y) const {
  if (!invertible()) throw GaugeUnsupported("LinearMap: map not invertible");
  switch (kind_) {
    case Kind::dense:
      return flat_apply(*inverse_, y).reshaped(y.shape());
    case Kind::scaling:
      return (1.0 / alpha_) * y;
    case Kind::dct_forward:
      return dct_apply(y, DctDirection::inverse);
    case Kind::dct_transpose:
      return dct_apply(y, DctDirection::forward);
  }
  throw NumericFailure("LinearMap::apply_inverse: bad kind");
}

Dense LinearMap::apply_inverse_adjoint(const Dense& x) const {
  if (!invertible()) throw GaugeUnsupported("LinearMap: map not invertible");
  switch (kind_) {
    case Kind::dense:
      return flat_apply_t(*inverse_, x).reshaped(x.shape());
    case Kind::scaling:
      return (1.0 / alpha_) * x;
    case Kind::dct_forward:
      return dct_apply(x, DctDirection::forward);
    case Kind::dct_transpose:
      return dct_apply(x, DctDirection::inverse);
  }
  throw NumericFailure("LinearMap::apply_inverse_adjoint: bad kind");
}

std::string LinearMap::kind_name() const {
  switch (kind_) {
    case Kind::dense:
      return "dense";
    case Kind::scaling:
      return "scaling";
    case Kind::dct_forward:
      return "dct";
    case Kind::dct_transpose:
      return "dct_transpose";
  }
  return "?";
}

}  // namespace atomkit
