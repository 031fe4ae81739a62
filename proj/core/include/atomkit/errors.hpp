#pragma once

#include <stdexcept>
#include <string>

namespace atomkit {

/// Base class for all toolkit errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ShapeMismatch : Error {
  using Error::Error;
};

struct NonConvergence : Error {
  int iterations = 0;
  NonConvergence(const std::string& what, int iters)
      : Error(what), iterations(iters) {}
};

struct NotSymmetric : Error {
  using Error::Error;
};

struct NonPositiveWeight : Error {
  using Error::Error;
};

struct NotOrthonormal : Error {
  using Error::Error;
};

struct UnboundedSupport : Error {
  using Error::Error;
};

struct NotInCone : Error {
  using Error::Error;
};

// Raised by alignment_residual when the pair lies outside dom(gauge) x dom(support).
struct BothInfinite : Error {
  using Error::Error;
};

struct TooLarge : Error {
  using Error::Error;
};

struct GaugeUnsupported : Error {
  using Error::Error;
};

struct NoProjector : Error {
  using Error::Error;
};

struct Infeasible : Error {
  using Error::Error;
};

struct EmptyFace : Error {
  using Error::Error;
};

struct ZeroMatrix : Error {
  using Error::Error;
};

struct BadDensity : Error {
  using Error::Error;
};

struct BadFraction : Error {
  using Error::Error;
};

struct NumericFailure : Error {
  using Error::Error;
};

}  // namespace atomkit
