#pragma once

#include <optional>
#include <string>
#include <vector>

#include "atomkit/dense.hpp"

namespace atomkit {

struct Atom;

/// Structural identity of an atom, used for tag-aware comparisons and trace
/// labels. Fields are meaningful per kind; unused ones stay empty.
struct AtomTag {
  enum class Kind {
    signed_basis,  // sign * e_index
    rank_one,      // u v^T with unit factors
    sym_rank_one,  // u u^T (u carries the factor; weighted variants store r = V p)
    group,         // unit direction scattered into group `index`
    tv_column,     // sign * b_index of the total-variation basis
    recession,     // direction of recession, gauge zero
    subspace,      // element of a linear-subspace atomic set
    composite,     // sum of one atom per part of a set sum
    generic
  };

  Kind kind = Kind::generic;
  int index = -1;
  int sign = +1;
  Dense u;  // factor (rank_one left / sym factor / group direction)
  Dense v;  // rank_one right factor
  std::vector<Atom> children;  // composite parts

  std::string label() const;
};

/// A unit-gauge element of an atomic set, or a recession direction.
struct Atom {
  Dense element;
  AtomTag tag;
};

Atom make_signed_basis_atom(Shape shape, int index, int sign);
Atom make_zero_atom(Shape shape);

struct WeightedAtom {
  double coeff = 0.0;  // > 0 for support terms
  Atom atom;
};

/// Weighted atom list with x = sum coeff * atom (plus optional recession part).
struct AtomicDecomposition {
  std::vector<WeightedAtom> terms;
  std::optional<WeightedAtom> recession_part;
  double claimed_gauge = 0.0;
  bool minimal = false;

  Dense synthesize(Shape shape) const;
  double coefficient_sum() const;
};

/// Atoms achieving the support supremum for a direction, within tol.
struct ExposedFace {
  double support_value = 0.0;
  std::vector<Atom> atoms;
  Dense exposing_vector;
  double tol = 0.0;
};

}  // namespace atomkit
