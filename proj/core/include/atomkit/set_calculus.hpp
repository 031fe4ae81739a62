#pragma once

#include <vector>

#include "atomkit/atomic_sets.hpp"

namespace atomkit {

/// Minkowski sum of atomic sets. Support is the sum of part supports; the
/// exposed face is built from composite atoms (one atom per part, diagonal
/// pairing first); the gauge is numeric-only via sum_gauge_numeric.
class SumSet final : public AtomicSet {
 public:
  explicit SumSet(std::vector<AtomicSetPtr> parts);

  Shape shape() const override { return shape_; }
  std::string variant() const override { return "sum"; }
  const std::vector<AtomicSetPtr>& parts() const { return parts_; }

  double gauge(const Dense& x) const override;
  double support(const Dense& z) const override;
  ExposedFace expose(const Dense& z, int k_max, double tol) const override;
  AtomicDecomposition decompose(const Dense& x, double tol) const override;
  nlohmann::json recipe_params() const override;

 private:
  std::vector<AtomicSetPtr> parts_;
  Shape shape_;
};

/// Union of atomic sets. Support is the max of part supports; the gauge is
/// the infimal sum over splits (exact LP on finite-atom unions).
class UnionSet final : public AtomicSet {
 public:
  explicit UnionSet(std::vector<AtomicSetPtr> parts);

  Shape shape() const override { return shape_; }
  std::string variant() const override { return "union"; }
  const std::vector<AtomicSetPtr>& parts() const { return parts_; }

  double gauge(const Dense& x) const override;
  double support(const Dense& z) const override;
  ExposedFace expose(const Dense& z, int k_max, double tol) const override;
  AtomicDecomposition decompose(const Dense& x, double tol) const override;
  nlohmann::json recipe_params() const override;

 private:
  bool union_feasible(const Dense& x, double budget) const;

  std::vector<AtomicSetPtr> parts_;
  Shape shape_;
};

AtomicSetPtr sum_descriptor(std::vector<AtomicSetPtr> parts);
AtomicSetPtr union_descriptor(std::vector<AtomicSetPtr> parts);

struct GaugeSplit {
  double value = 0.0;
  std::vector<Dense> parts;
};

/// Evaluate the gauge of a set sum: inf over splits x = sum x_i of
/// max_i gauge_i(x_i), by bisection on the level with an
/// alternating-projection feasibility check. Every part must supply a hull
/// projector or a finite atom list.
GaugeSplit sum_gauge_numeric(const AtomicSet& sum_set, const Dense& x, double tol);

}  // namespace atomkit
