#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "atomkit/atoms.hpp"
#include "atomkit/dense.hpp"
#include "atomkit/linear_map.hpp"

#include "json.hpp"

namespace atomkit {

/// Default relative tolerance for membership in an exposed face.
inline constexpr double kExposeTol = 1e-9;

class AtomicSet;
using AtomicSetPtr = std::shared_ptr<const AtomicSet>;

/// An atomic set with its gauge, support, exposed-face, and decomposition
/// oracles. Instances are immutable; all operations are pure.
///
/// Conventions: gauge and support return +infinity outside their domains
/// (the cone of the hull and the polar of the recession cone). Atoms
/// returned by expose have unit gauge except the zero atom (support zero)
/// and recession directions (gauge zero).
class AtomicSet {
 public:
  virtual ~AtomicSet() = default;

  virtual Shape shape() const = 0;
  virtual std::string variant() const = 0;

  virtual double gauge(const Dense& x) const = 0;
  virtual double support(const Dense& z) const = 0;

  /// Up to k_max atoms within relative tol of the support supremum,
  /// lowest structural index first.
  virtual ExposedFace expose(const Dense& z, int k_max = 1,
                             double tol = kExposeTol) const = 0;

  /// Minimal decomposition; coefficient sum equals the gauge within tol.
  virtual AtomicDecomposition decompose(const Dense& x, double tol = 1e-10) const = 0;

  virtual bool has_projector() const { return false; }

  /// Euclidean projection onto conv(atoms + {0}).
  virtual Dense project_hull(const Dense& p) const;

  /// Explicit atom list when the set is finitely generated.
  virtual const std::vector<Atom>* finite_atoms() const { return nullptr; }

  /// Variant parameters for the JSON recipe (without the variant name).
  virtual nlohmann::json recipe_params() const = 0;

 protected:
  void check_shape(const Dense& x) const;
};

// --- concrete variants ----------------------------------------------------

AtomicSetPtr signed_basis(Shape shape);
inline AtomicSetPtr signed_basis(int n) { return signed_basis(Shape{n, 1}); }
AtomicSetPtr two_norm_ball(Shape shape);
AtomicSetPtr box_set(Shape shape);
AtomicSetPtr finite_atom_set(Shape shape, std::vector<Dense> atoms);
AtomicSetPtr nuclear_ball(int rows, int cols);
AtomicSetPtr subspace_set(Dense orthonormal_basis);
AtomicSetPtr tv_atoms(int n);
AtomicSetPtr group_norm(int n, std::vector<std::vector<int>> groups);
AtomicSetPtr spectrahedron(int n);
AtomicSetPtr weighted_spectrahedron(Dense v, Dense lambda);

enum class TransformMode { image, preimage };

/// Image: atoms a -> M a (gauge needs M invertible). Preimage: M^{-1} A.
AtomicSetPtr transform(AtomicSetPtr inner, LinearMap m, TransformMode mode);
AtomicSetPtr scale_set(AtomicSetPtr inner, double alpha);

// --- free operations --------------------------------------------------------

/// Residual of the polar inequality, gauge(x)*support(z) - <x,z>, with the
/// convention 0*inf = 0: when either factor is zero the residual is
/// |<x,z>|. Throws BothInfinite when a nonzero factor is infinite.
double alignment_residual(const AtomicSet& set, const Dense& x, const Dense& z);

/// True iff every support atom of the decomposition matches an atom of the
/// face (tag-aware; rank-one atoms compared by spanned-subspace membership).
bool is_supported_by(const AtomicDecomposition& decomp, const ExposedFace& face,
                     double tol = 1e-6);

/// Exact gauge over an explicit finite atom list by subset enumeration
/// (at most 10 atoms, ambient dimension at most 6).
double gauge_bruteforce(const std::vector<Dense>& atoms, const Dense& x,
                        double tol = 1e-9);

struct MoreauParts {
  double alpha_x = 0.0;
  Dense x;
  double alpha_z = 0.0;
  Dense z;
};

/// Split (s, alpha) into aligned components along cone(C x {1}) and its
/// polar cone(C° x {-1}); requires a hull projector.
MoreauParts moreau_decompose(const AtomicSet& set, const Dense& s, double alpha);

/// Shared helpers used across variants.
namespace detail {
/// min sum(c) s.t. sum c_a * a = x, c >= 0, by two-phase simplex.
/// Returns nullopt when infeasible within tol.
std::optional<std::vector<double>> min_sum_nonneg_solve(const std::vector<Dense>& atoms,
                                                        const Dense& x, double tol);
/// Exact projection onto conv(atoms + {0}) by active-set enumeration
/// (small atom counts only).
Dense project_polytope_hull(const std::vector<Dense>& atoms, const Dense& p);
}  // namespace detail

}  // namespace atomkit
