#include "atomkit/atomic_sets.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>

#include "atomkit/errors.hpp"
#include "atomkit/linalg.hpp"

namespace atomkit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr uint64_t kSvdSeed = 7;

ExposedFace zero_face(Shape shape, const Dense& z, double tol) {
  ExposedFace f;
  f.support_value = 0.0;
  f.atoms.push_back(make_zero_atom(shape));
  f.exposing_vector = z;
  f.tol = tol;
  return f;
}

double drop_threshold(double tol, double scale) { return tol * std::max(scale, 0.0); }

}  // namespace

void AtomicSet::check_shape(const Dense& x) const {
  if (!(x.shape() == shape())) throw ShapeMismatch(variant() + ": element shape mismatch");
}

Dense AtomicSet::project_hull(const Dense&) const {
  throw NoProjector(variant() + ": no hull projector");
}

// --- small LP: min sum(c) s.t. sum c_a a = x, c >= 0 ------------------------

namespace detail {

namespace {

// Dense two-phase primal simplex with Bland's rule. Tableau rows are the
// equality constraints, the last row carries reduced costs. Only columns
// below enter_limit may enter the basis (keeps phase-2 artificials out).
bool simplex_iterate(std::vector<std::vector<double>>& t, std::vector<int>& basis,
                     int m, int ncols, int enter_limit) {
  const double eps = 1e-11;
  for (int guard = 0; guard < 20000; ++guard) {
    int enter = -1;
    for (int j = 0; j < enter_limit; ++j)
      if (t[m][j] < -eps) {
        enter = j;
        break;
      }
    if (enter < 0) return true;
    int leave = -1;
    double best = 0.0;
    for (int i = 0; i < m; ++i) {
      if (t[i][enter] > eps) {
        const double ratio = t[i][ncols - 1] / t[i][enter];
        if (leave < 0 || ratio < best - 1e-13 ||
            (std::abs(ratio - best) <= 1e-13 && basis[i] < basis[leave])) {
          leave = i;
          best = ratio;
        }
      }
    }
    if (leave < 0) return false;  // unbounded
    const double piv = t[leave][enter];
    for (double& v : t[leave]) v /= piv;
    for (int i = 0; i <= m; ++i) {
      if (i == leave) continue;
      const double f = t[i][enter];
      if (f == 0.0) continue;
      for (int j = 0; j < ncols; ++j) t[i][j] -= f * t[leave][j];
    }
    basis[leave] = enter;
  }
  return false;
}

}  // namespace

std::optional<std::vector<double>> min_sum_nonneg_solve(const std::vector<Dense>& atoms,
                                                        const Dense& x, double tol) {
  const int m = x.size();
  const int n = static_cast<int>(atoms.size());
  if (n == 0) {
    if (fnorm(x) <= tol * (1.0 + fnorm(x))) return std::vector<double>{};
    return std::nullopt;
  }

  const int ncols = n + m + 1;  // original vars, artificials, rhs
  std::vector<std::vector<double>> t(m + 1, std::vector<double>(ncols, 0.0));
  for (int i = 0; i < m; ++i) {
    const double bi = x[i];
    const double sgn = bi >= 0 ? 1.0 : -1.0;
    for (int j = 0; j < n; ++j) t[i][j] = sgn * atoms[j][i];
    t[i][n + i] = 1.0;
    t[i][ncols - 1] = sgn * bi;
  }
  std::vector<int> basis(m);
  for (int i = 0; i < m; ++i) basis[i] = n + i;

  // phase 1: minimize the artificial sum
  for (int j = 0; j < ncols; ++j) {
    double s = 0.0;
    for (int i = 0; i < m; ++i) s += t[i][j];
    t[m][j] = (j >= n && j + 1 < ncols ? 1.0 : 0.0) - s;
  }
  simplex_iterate(t, basis, m, ncols, n + m);
  const double art = -t[m][ncols - 1];
  if (art > tol * (1.0 + fnorm(x))) return std::nullopt;  // infeasible

  // drive degenerate artificials out of the basis; all-zero rows are
  // redundant constraints and may keep theirs
  for (int i = 0; i < m; ++i) {
    if (basis[i] < n) continue;
    int enter = -1;
    for (int j = 0; j < n; ++j)
      if (std::abs(t[i][j]) > 1e-9) {
        enter = j;
        break;
      }
    if (enter < 0) continue;
    const double piv = t[i][enter];
    for (double& v : t[i]) v /= piv;
    for (int r = 0; r <= m; ++r) {
      if (r == i) continue;
      const double f = t[r][enter];
      if (f == 0.0) continue;
      for (int j = 0; j < ncols; ++j) t[r][j] -= f * t[i][j];
    }
    basis[i] = enter;
  }

  // phase 2: minimize the sum of the original coefficients
  for (int j = 0; j < ncols; ++j) {
    double cb = 0.0;
    for (int i = 0; i < m; ++i) cb += (basis[i] < n ? 1.0 : 0.0) * t[i][j];
    const double cj = (j < n) ? 1.0 : 0.0;
    t[m][j] = cj - cb;
  }
  simplex_iterate(t, basis, m, ncols, n);

  std::vector<double> c(n, 0.0);
  for (int i = 0; i < m; ++i)
    if (basis[i] < n) c[basis[i]] = std::max(0.0, t[i][ncols - 1]);
  return c;
}

Dense project_polytope_hull(const std::vector<Dense>& atoms, const Dense& p) {
  const int n = static_cast<int>(atoms.size());
  if (n > 12) throw TooLarge("project_polytope_hull: too many atoms");
  const int dim = p.size();

  double best_obj = dot(p, p);  // empty subset -> the origin
  Dense best(p.shape());

  std::vector<int> idx;
  for (unsigned mask = 1; mask < (1u << n); ++mask) {
    idx.clear();
    for (int j = 0; j < n; ++j)
      if (mask & (1u << j)) idx.push_back(j);
    const int k = static_cast<int>(idx.size());

    Dense g(k, k), ap(k, 1);
    for (int a = 0; a < k; ++a) {
      ap[a] = dot(atoms[idx[a]], p);
      for (int b = 0; b < k; ++b) g(a, b) = dot(atoms[idx[a]], atoms[idx[b]]);
    }

    for (int slack_active = 0; slack_active < 2; ++slack_active) {
      Dense c;
      try {
        if (!slack_active) {
          c = solve_lu(g, ap);
        } else {
          Dense kkt(k + 1, k + 1), rhs(k + 1, 1);
          for (int a = 0; a < k; ++a) {
            rhs[a] = ap[a];
            kkt(a, k) = 1.0;
            kkt(k, a) = 1.0;
            for (int b = 0; b < k; ++b) kkt(a, b) = g(a, b);
          }
          rhs[k] = 1.0;
          Dense sol = solve_lu(kkt, rhs);
          c = Dense(k, 1);
          for (int a = 0; a < k; ++a) c[a] = sol[a];
        }
      } catch (const NumericFailure&) {
        continue;
      }
      double csum = 0.0;
      bool ok = true;
      for (int a = 0; a < k; ++a) {
        if (c[a] < -1e-12) ok = false;
        csum += c[a];
      }
      if (!ok || csum > 1.0 + 1e-12) continue;
      Dense y(p.shape());
      for (int a = 0; a < k; ++a) axpy(std::max(0.0, c[a]), atoms[idx[a]], y);
      Dense diff = y - p;
      const double obj = dot(diff, diff);
      if (obj < best_obj) {
        best_obj = obj;
        best = y;
      }
    }
  }
  (void)dim;
  return best;
}

}  // namespace detail

// --- signed basis ------------------------------------------------------------

namespace {

class SignedBasisSet final : public AtomicSet {
 public:
  explicit SignedBasisSet(Shape s) : shape_(s) {}

  Shape shape() const override { return shape_; }
  std::string variant() const override { return "signed_basis"; }

  double gauge(const Dense& x) const override {
    check_shape(x);
    return one_norm(x);
  }

  double support(const Dense& z) const override {
    check_shape(z);
    return inf_norm(z);
  }

  ExposedFace expose(const Dense& z, int k_max, double tol) const override {
    check_shape(z);
    const double sigma = inf_norm(z);
    if (sigma == 0.0) return zero_face(shape_, z, tol);
    ExposedFace f;
    f.support_value = sigma;
    f.exposing_vector = z;
    f.tol = tol;
    for (int i = 0; i < z.size() && static_cast<int>(f.atoms.size()) < k_max; ++i) {
      if (std::abs(z[i]) >= sigma * (1.0 - tol))
        f.atoms.push_back(make_signed_basis_atom(shape_, i, z[i] >= 0 ? 1 : -1));
    }
    return f;
  }

  AtomicDecomposition decompose(const Dense& x, double tol) const override {
    check_shape(x);
    AtomicDecomposition d;
    d.minimal = true;
    const double drop = drop_threshold(tol, inf_norm(x));
    for (int i = 0; i < x.size(); ++i) {
      if (std::abs(x[i]) > drop) {
        d.terms.push_back({std::abs(x[i]), make_signed_basis_atom(shape_, i, x[i] >= 0 ? 1 : -1)});
        d.claimed_gauge += std::abs(x[i]);
      }
    }
    return d;
  }

  bool has_projector() const override { return true; }
  Dense project_hull(const Dense& p) const override {
    check_shape(p);
    return project_l1_ball(p, 1.0);
  }

  nlohmann::json recipe_params() const override {
    return {{"rows", shape_.rows}, {"cols", shape_.cols}};
  }

 private:
  Shape shape_;
};

// --- two-norm ball ----------------------------------------------------------

class TwoNormBallSet final : public AtomicSet {
 public:
  explicit TwoNormBallSet(Shape s) : shape_(s) {}

  Shape shape() const override { return shape_; }
  std::string variant() const override { return "two_norm_ball"; }

  double gauge(const Dense& x) const override {
    check_shape(x);
    return fnorm(x);
  }
  double support(const Dense& z) const override {
    check_shape(z);
    return fnorm(z);
  }

  ExposedFace expose(const Dense& z, int /*k_max*/, double tol) const override {
    check_shape(z);
    const double sigma = fnorm(z);
    if (sigma == 0.0) return zero_face(shape_, z, tol);
    ExposedFace f;
    f.support_value = sigma;
    f.exposing_vector = z;
    f.tol = tol;
    Atom a;
    a.element = (1.0 / sigma) * z;
    a.tag.kind = AtomTag::Kind::generic;
    a.tag.index = 0;
    f.atoms.push_back(std::move(a));
    return f;
  }

  AtomicDecomposition decompose(const Dense& x, double /*tol*/) const override {
    check_shape(x);
    AtomicDecomposition d;
    d.minimal = true;
    const double nx = fnorm(x);
    if (nx > 0) {
      Atom a;
      a.element = (1.0 / nx) * x;
      a.tag.kind = AtomTag::Kind::generic;
      a.tag.index = 0;
      d.terms.push_back({nx, std::move(a)});
      d.claimed_gauge = nx;
    }
    return d;
  }

  bool has_projector() const override { return true; }
  Dense project_hull(const Dense& p) const override {
    check_shape(p);
    const double np = fnorm(p);
    return np <= 1.0 ? p : (1.0 / np) * p;
  }

  nlohmann::json recipe_params() const override {
    return {{"rows", shape_.rows}, {"cols", shape_.cols}};
  }

 private:
  Shape shape_;
};

// --- box ---------------------------------------------------------------------

class BoxSet final : public AtomicSet {
 public:
  explicit BoxSet(Shape s) : shape_(s) {}

  Shape shape() const override { return shape_; }
  std::string variant() const override { return "box"; }

  double gauge(const Dense& x) const override {
    check_shape(x);
    return inf_norm(x);
  }
  double support(const Dense& z) const override {
    check_shape(z);
    return one_norm(z);
  }

  ExposedFace expose(const Dense& z, int k_max, double tol) const override {
    check_shape(z);
    const double sigma = one_norm(z);
    if (sigma == 0.0) return zero_face(shape_, z, tol);
    ExposedFace f;
    f.support_value = sigma;
    f.exposing_vector = z;
    f.tol = tol;
    Dense vertex(shape_);
    for (int i = 0; i < z.size(); ++i) vertex[i] = z[i] >= 0 ? 1.0 : -1.0;
    Atom primary;
    primary.element = vertex;
    primary.tag.kind = AtomTag::Kind::generic;
    primary.tag.index = 0;
    f.atoms.push_back(std::move(primary));
    // maximizers are non-unique exactly where z vanishes
    const double band = tol * (1.0 + sigma);
    for (int i = 0; i < z.size() && static_cast<int>(f.atoms.size()) < k_max; ++i) {
      if (std::abs(z[i]) <= band) {
        Atom alt;
        alt.element = vertex;
        alt.element[i] = -vertex[i];
        alt.tag.kind = AtomTag::Kind::generic;
        alt.tag.index = i + 1;
        f.atoms.push_back(std::move(alt));
      }
    }
    return f;
  }

  AtomicDecomposition decompose(const Dense& x, double /*tol*/) const override {
    check_shape(x);
    AtomicDecomposition d;
    d.minimal = true;
    const double nx = inf_norm(x);
    if (nx > 0) {
      Atom a;
      a.element = (1.0 / nx) * x;
      a.tag.kind = AtomTag::Kind::generic;
      d.terms.push_back({nx, std::move(a)});
      d.claimed_gauge = nx;
    }
    return d;
  }

  bool has_projector() const override { return true; }
  Dense project_hull(const Dense& p) const override {
    check_shape(p);
    Dense out(p.shape());
    for (int i = 0; i < p.size(); ++i) out[i] = std::clamp(p[i], -1.0, 1.0);
    return out;
  }

  nlohmann::json recipe_params() const override {
    return {{"rows", shape_.rows}, {"cols", shape_.cols}};
  }

 private:
  Shape shape_;
};

// --- explicit finite atom list -------------------------------------------------

class FiniteAtomSetImpl final : public AtomicSet {
 public:
  FiniteAtomSetImpl(Shape s, std::vector<Dense> atoms) : shape_(s) {
    for (size_t i = 0; i < atoms.size(); ++i) {
      if (!(atoms[i].shape() == s)) throw ShapeMismatch("finite_atom_set: atom shape mismatch");
      Atom a;
      a.element = std::move(atoms[i]);
      a.tag.kind = AtomTag::Kind::generic;
      a.tag.index = static_cast<int>(i);
      atoms_.push_back(std::move(a));
    }
  }

  Shape shape() const override { return shape_; }
  std::string variant() const override { return "finite_atoms"; }

  double gauge(const Dense& x) const override {
    check_shape(x);
    if (fnorm(x) == 0.0) return 0.0;
    auto c = solve_coeffs(x);
    if (!c) return kInf;
    return std::accumulate(c->begin(), c->end(), 0.0);
  }

  double support(const Dense& z) const override {
    check_shape(z);
    double s = 0.0;
    for (const auto& a : atoms_) s = std::max(s, dot(a.element, z));
    return s;
  }

  ExposedFace expose(const Dense& z, int k_max, double tol) const override {
    check_shape(z);
    const double sigma = support(z);
    ExposedFace f;
    f.support_value = sigma;
    f.exposing_vector = z;
    f.tol = tol;
    if (sigma == 0.0) {
      f.atoms.push_back(make_zero_atom(shape_));
      const double band = tol * (1.0 + fnorm(z));
      for (const auto& a : atoms_) {
        if (static_cast<int>(f.atoms.size()) >= k_max) break;
        if (std::abs(dot(a.element, z)) <= band) f.atoms.push_back(a);
      }
      return f;
    }
    for (const auto& a : atoms_) {
      if (static_cast<int>(f.atoms.size()) >= k_max) break;
      if (dot(a.element, z) >= sigma * (1.0 - tol)) f.atoms.push_back(a);
    }
    return f;
  }

  AtomicDecomposition decompose(const Dense& x, double tol) const override {
    check_shape(x);
    AtomicDecomposition d;
    d.minimal = true;
    if (fnorm(x) == 0.0) return d;
    auto c = solve_coeffs(x);
    if (!c) throw NotInCone("finite_atoms: element outside the conic hull");
    const double cmax = *std::max_element(c->begin(), c->end());
    for (size_t i = 0; i < c->size(); ++i) {
      if ((*c)[i] > drop_threshold(tol, cmax)) {
        d.terms.push_back({(*c)[i], atoms_[i]});
        d.claimed_gauge += (*c)[i];
      }
    }
    return d;
  }

  const std::vector<Atom>* finite_atoms() const override { return &atoms_; }

  bool has_projector() const override { return atoms_.size() <= 12; }
  Dense project_hull(const Dense& p) const override {
    check_shape(p);
    if (atoms_.size() > 12) throw NoProjector("finite_atoms: projector limited to 12 atoms");
    std::vector<Dense> elems;
    for (const auto& a : atoms_) elems.push_back(a.element);
    return detail::project_polytope_hull(elems, p);
  }

  nlohmann::json recipe_params() const override {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& a : atoms_) {
      nlohmann::json row = nlohmann::json::array();
      for (double v : a.element.values()) row.push_back(v);
      arr.push_back(row);
    }
    return {{"rows", shape_.rows}, {"cols", shape_.cols}, {"atoms", arr}};
  }

 private:
  std::optional<std::vector<double>> solve_coeffs(const Dense& x) const {
    std::vector<Dense> elems;
    elems.reserve(atoms_.size());
    for (const auto& a : atoms_) elems.push_back(a.element);
    return detail::min_sum_nonneg_solve(elems, x, 1e-9);
  }

  Shape shape_;
  std::vector<Atom> atoms_;
};

// --- nuclear-norm ball ----------------------------------------------------------

class NuclearBallSet final : public AtomicSet {
 public:
  NuclearBallSet(int rows, int cols) : shape_{rows, cols} {}

  Shape shape() const override { return shape_; }
  std::string variant() const override { return "nuclear_ball"; }

  double gauge(const Dense& x) const override {
    check_shape(x);
    DenseSvd svd = jacobi_svd(x);
    double s = 0.0;
    for (int i = 0; i < svd.sigma.size(); ++i) s += svd.sigma[i];
    return s;
  }

  double support(const Dense& z) const override {
    check_shape(z);
    return top_singular_triples(z, 1, 1e-10, 1000, kSvdSeed)[0].sigma;
  }

  ExposedFace expose(const Dense& z, int k_max, double tol) const override {
    check_shape(z);
    const int k = std::min(k_max, std::min(shape_.rows, shape_.cols));
    auto triples = top_singular_triples(z, k, 1e-10, 1000, kSvdSeed);
    const double sigma = triples[0].sigma;
    if (sigma == 0.0) return zero_face(shape_, z, tol);
    ExposedFace f;
    f.support_value = sigma;
    f.exposing_vector = z;
    f.tol = tol;
    for (size_t i = 0; i < triples.size(); ++i) {
      if (triples[i].sigma < sigma * (1.0 - tol)) break;
      Atom a;
      a.element = outer(triples[i].u, triples[i].v);
      a.tag.kind = AtomTag::Kind::rank_one;
      a.tag.index = static_cast<int>(i);
      a.tag.u = triples[i].u;
      a.tag.v = triples[i].v;
      f.atoms.push_back(std::move(a));
    }
    return f;
  }

  AtomicDecomposition decompose(const Dense& x, double tol) const override {
    check_shape(x);
    AtomicDecomposition d;
    d.minimal = true;
    DenseSvd svd = jacobi_svd(x);
    if (svd.sigma.size() == 0 || svd.sigma[0] == 0.0) return d;
    const double drop = drop_threshold(tol, svd.sigma[0]);
    for (int i = 0; i < svd.sigma.size(); ++i) {
      if (svd.sigma[i] <= drop) break;
      Dense u(shape_.rows, 1), v(shape_.cols, 1);
      for (int r = 0; r < shape_.rows; ++r) u[r] = svd.u(r, i);
      for (int r = 0; r < shape_.cols; ++r) v[r] = svd.v(r, i);
      Atom a;
      a.element = outer(u, v);
      a.tag.kind = AtomTag::Kind::rank_one;
      a.tag.index = i;
      a.tag.u = u;
      a.tag.v = v;
      d.terms.push_back({svd.sigma[i], std::move(a)});
      d.claimed_gauge += svd.sigma[i];
    }
    return d;
  }

  bool has_projector() const override { return true; }
  Dense project_hull(const Dense& p) const override {
    check_shape(p);
    DenseSvd svd = jacobi_svd(p);
    Dense clipped = project_l1_ball(svd.sigma, 1.0);
    Dense out(shape_);
    for (int i = 0; i < svd.sigma.size(); ++i) {
      if (clipped[i] == 0.0) continue;
      for (int r = 0; r < shape_.rows; ++r)
        for (int c = 0; c < shape_.cols; ++c) out(r, c) += clipped[i] * svd.u(r, i) * svd.v(c, i);
    }
    return out;
  }

  nlohmann::json recipe_params() const override {
    return {{"rows", shape_.rows}, {"cols", shape_.cols}};
  }

 private:
  Shape shape_;
};

// --- linear subspace --------------------------------------------------------------

class SubspaceSet final : public AtomicSet {
 public:
  explicit SubspaceSet(Dense q) : q_(std::move(q)), shape_{q_.rows(), 1} {
    for (int i = 0; i < q_.cols(); ++i)
      for (int j = i; j < q_.cols(); ++j) {
        double s = 0.0;
        for (int r = 0; r < q_.rows(); ++r) s += q_(r, i) * q_(r, j);
        if (std::abs(s - (i == j ? 1.0 : 0.0)) > 1e-10)
          throw NotOrthonormal("subspace: basis columns not orthonormal");
      }
  }

  Shape shape() const override { return shape_; }
  std::string variant() const override { return "subspace"; }

  double gauge(const Dense& x) const override {
    check_shape(x);
    Dense r = x - matvec(q_, matvec_t(q_, x));
    return fnorm(r) <= 1e-10 * (1.0 + fnorm(x)) ? 0.0 : kInf;
  }

  double support(const Dense& z) const override {
    check_shape(z);
    return fnorm(matvec_t(q_, z)) <= 1e-10 * (1.0 + fnorm(z)) ? 0.0 : kInf;
  }

  ExposedFace expose(const Dense& z, int k_max, double tol) const override {
    check_shape(z);
    if (std::isinf(support(z))) throw UnboundedSupport("subspace: support is infinite");
    ExposedFace f;
    f.support_value = 0.0;
    f.exposing_vector = z;
    f.tol = tol;
    for (int j = 0; j < q_.cols() && static_cast<int>(f.atoms.size()) < k_max; ++j) {
      for (int sgn : {+1, -1}) {
        if (static_cast<int>(f.atoms.size()) >= k_max) break;
        Atom a;
        a.element = Dense(shape_);
        for (int r = 0; r < q_.rows(); ++r) a.element[r] = sgn * q_(r, j);
        a.tag.kind = AtomTag::Kind::subspace;
        a.tag.index = j;
        a.tag.sign = sgn;
        f.atoms.push_back(std::move(a));
      }
    }
    return f;
  }

  AtomicDecomposition decompose(const Dense& x, double /*tol*/) const override {
    check_shape(x);
    if (std::isinf(gauge(x))) throw NotInCone("subspace: element outside the subspace");
    AtomicDecomposition d;
    d.minimal = true;
    d.claimed_gauge = 0.0;
    if (fnorm(x) > 0) {
      Atom a;
      a.element = x;
      a.tag.kind = AtomTag::Kind::recession;
      d.recession_part = WeightedAtom{1.0, std::move(a)};
    }
    return d;
  }

  bool has_projector() const override { return true; }
  Dense project_hull(const Dense& p) const override {
    check_shape(p);
    return matvec(q_, matvec_t(q_, p));
  }

  nlohmann::json recipe_params() const override {
    nlohmann::json basis = nlohmann::json::array();
    for (int i = 0; i < q_.rows(); ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (int j = 0; j < q_.cols(); ++j) row.push_back(q_(i, j));
      basis.push_back(row);
    }
    return {{"basis", basis}};
  }

 private:
  Dense q_;
  Shape shape_;
};

// --- total-variation atoms ------------------------------------------------------

class TvAtomSet final : public AtomicSet {
 public:
  explicit TvAtomSet(int n) : n_(n) {
    if (n < 2) throw ShapeMismatch("tv_atoms: dimension must be >= 2");
  }

  Shape shape() const override { return Shape{n_, 1}; }
  std::string variant() const override { return "tv"; }

  double gauge(const Dense& x) const override {
    check_shape(x);
    double s = 0.0;
    for (int i = 0; i + 1 < n_; ++i) s += std::abs(x[i] - x[i + 1]);
    return s;
  }

  double support(const Dense& z) const override {
    check_shape(z);
    double total = 0.0;
    for (int i = 0; i < n_; ++i) total += z[i];
    if (std::abs(total) > 1e-10 * (1.0 + fnorm(z))) return kInf;
    double sigma = 0.0, prefix = 0.0;
    for (int j = 0; j + 1 < n_; ++j) {
      prefix += z[j];
      sigma = std::max(sigma, std::abs(prefix));
    }
    return sigma;
  }

  ExposedFace expose(const Dense& z, int k_max, double tol) const override {
    check_shape(z);
    const double sigma = support(z);
    if (std::isinf(sigma)) throw UnboundedSupport("tv: exposing direction has infinite support");
    if (sigma == 0.0) return zero_face(shape(), z, tol);
    ExposedFace f;
    f.support_value = sigma;
    f.exposing_vector = z;
    f.tol = tol;
    double prefix = 0.0;
    for (int j = 0; j + 1 < n_ && static_cast<int>(f.atoms.size()) < k_max; ++j) {
      prefix += z[j];
      if (std::abs(prefix) >= sigma * (1.0 - tol))
        f.atoms.push_back(column_atom(j, prefix >= 0 ? 1 : -1));
    }
    return f;
  }

  AtomicDecomposition decompose(const Dense& x, double tol) const override {
    check_shape(x);
    AtomicDecomposition d;
    d.minimal = true;
    double cmax = 0.0;
    for (int j = 0; j + 1 < n_; ++j) cmax = std::max(cmax, std::abs(x[j] - x[j + 1]));
    for (int j = 0; j + 1 < n_; ++j) {
      const double c = x[j] - x[j + 1];
      if (std::abs(c) > drop_threshold(tol, cmax)) {
        d.terms.push_back({std::abs(c), column_atom(j, c >= 0 ? 1 : -1)});
        d.claimed_gauge += std::abs(c);
      }
    }
    const double ce = x[n_ - 1];
    if (ce != 0.0) {
      Atom e;
      e.element = Dense(shape());
      for (int i = 0; i < n_; ++i) e.element[i] = ce >= 0 ? 1.0 : -1.0;
      e.tag.kind = AtomTag::Kind::recession;
      d.recession_part = WeightedAtom{std::abs(ce), std::move(e)};
    }
    return d;
  }

  nlohmann::json recipe_params() const override { return {{"n", n_}}; }

 private:
  Atom column_atom(int j, int sgn) const {
    Atom a;
    a.element = Dense(shape());
    for (int i = 0; i <= j; ++i) a.element[i] = static_cast<double>(sgn);
    a.tag.kind = AtomTag::Kind::tv_column;
    a.tag.index = j;
    a.tag.sign = sgn;
    return a;
  }

  int n_;
};

// --- group norm --------------------------------------------------------------------

class GroupNormSet final : public AtomicSet {
 public:
  GroupNormSet(int n, std::vector<std::vector<int>> groups)
      : n_(n), groups_(std::move(groups)), count_(n, 0) {
    if (groups_.empty()) throw ShapeMismatch("group_norm: needs at least one group");
    for (auto& g : groups_) {
      if (g.empty()) throw ShapeMismatch("group_norm: empty group");
      std::sort(g.begin(), g.end());
      for (int i : g) {
        if (i < 0 || i >= n) throw ShapeMismatch("group_norm: index out of range");
        ++count_[i];
      }
    }
    overlapping_ = std::any_of(count_.begin(), count_.end(), [](int c) { return c > 1; });
  }

  Shape shape() const override { return Shape{n_, 1}; }
  std::string variant() const override { return "group_norm"; }
  bool overlapping() const { return overlapping_; }

  double gauge(const Dense& x) const override {
    check_shape(x);
    for (int i = 0; i < n_; ++i)
      if (count_[i] == 0 && std::abs(x[i]) > 1e-12 * (1.0 + inf_norm(x))) return kInf;
    if (!overlapping_) {
      double s = 0.0;
      for (const auto& g : groups_) s += group_norm_of(x, g);
      return s;
    }
    return split_solve(x).first;
  }

  double support(const Dense& z) const override {
    check_shape(z);
    double s = 0.0;
    for (const auto& g : groups_) s = std::max(s, group_norm_of(z, g));
    return s;
  }

  ExposedFace expose(const Dense& z, int k_max, double tol) const override {
    check_shape(z);
    const double sigma = support(z);
    if (sigma == 0.0) return zero_face(shape(), z, tol);
    ExposedFace f;
    f.support_value = sigma;
    f.exposing_vector = z;
    f.tol = tol;
    for (size_t gi = 0; gi < groups_.size() && static_cast<int>(f.atoms.size()) < k_max; ++gi) {
      const double ng = group_norm_of(z, groups_[gi]);
      if (ng >= sigma * (1.0 - tol)) f.atoms.push_back(group_atom(z, static_cast<int>(gi), ng));
    }
    return f;
  }

  AtomicDecomposition decompose(const Dense& x, double tol) const override {
    check_shape(x);
    for (int i = 0; i < n_; ++i)
      if (count_[i] == 0 && std::abs(x[i]) > 1e-10 * (1.0 + inf_norm(x)))
        throw NotInCone("group_norm: mass outside the group cover");
    AtomicDecomposition d;
    if (!overlapping_) {
      d.minimal = true;
      for (size_t gi = 0; gi < groups_.size(); ++gi) {
        const double ng = group_norm_of(x, groups_[gi]);
        if (ng > drop_threshold(tol, fnorm(x))) {
          d.terms.push_back({ng, group_atom(x, static_cast<int>(gi), ng)});
          d.claimed_gauge += ng;
        }
      }
      return d;
    }
    auto [value, split] = split_solve(x);
    d.minimal = false;
    for (size_t gi = 0; gi < groups_.size(); ++gi) {
      const double ng = fnorm(split[gi]);
      if (ng > drop_threshold(tol, 1.0 + fnorm(x))) {
        Atom a;
        a.element = Dense(shape());
        for (size_t k = 0; k < groups_[gi].size(); ++k)
          a.element[groups_[gi][k]] = split[gi][static_cast<int>(k)] / ng;
        a.tag.kind = AtomTag::Kind::group;
        a.tag.index = static_cast<int>(gi);
        d.terms.push_back({ng, std::move(a)});
        d.claimed_gauge += ng;
      }
    }
    (void)value;
    return d;
  }

  nlohmann::json recipe_params() const override {
    nlohmann::json gs = nlohmann::json::array();
    for (const auto& g : groups_) gs.push_back(g);
    return {{"n", n_}, {"groups", gs}};
  }

 private:
  static double group_norm_of(const Dense& v, const std::vector<int>& g) {
    double s = 0.0;
    for (int i : g) s += v[i] * v[i];
    return std::sqrt(s);
  }

  Atom group_atom(const Dense& z, int gi, double ng) const {
    Atom a;
    a.element = Dense(shape());
    for (int i : groups_[gi]) a.element[i] = z[i] / ng;
    a.tag.kind = AtomTag::Kind::group;
    a.tag.index = gi;
    return a;
  }

  // Splitting evaluation of the overlapping group gauge: minimize
  // sum_i ||y_i|| subject to sum_i P_i y_i = x, by projected gradient on a
  // smoothed objective. The affine projection is closed-form because
  // sum_i P_i P_i^T is diagonal (overlap counts).
  std::pair<double, std::vector<Dense>> split_solve(const Dense& x) const {
    const size_t ng = groups_.size();
    std::vector<Dense> y(ng);
    for (size_t gi = 0; gi < ng; ++gi) y[gi] = Dense(static_cast<int>(groups_[gi].size()), 1);

    auto project_affine = [&](std::vector<Dense>& w) {
      Dense resid = x;
      for (size_t gi = 0; gi < ng; ++gi)
        for (size_t k = 0; k < groups_[gi].size(); ++k)
          resid[groups_[gi][k]] -= w[gi][static_cast<int>(k)];
      for (size_t gi = 0; gi < ng; ++gi)
        for (size_t k = 0; k < groups_[gi].size(); ++k) {
          const int idx = groups_[gi][k];
          w[gi][static_cast<int>(k)] += resid[idx] / count_[idx];
        }
    };

    const double mu = 1e-9 * (1.0 + fnorm(x));
    auto smooth_value = [&](const std::vector<Dense>& w) {
      double s = 0.0;
      for (const auto& wi : w) s += std::sqrt(dot(wi, wi) + mu * mu);
      return s;
    };

    project_affine(y);
    double step = 1.0;
    double fy = smooth_value(y);
    for (int it = 0; it < 500; ++it) {
      std::vector<Dense> g(ng);
      for (size_t gi = 0; gi < ng; ++gi) {
        const double denom = std::sqrt(dot(y[gi], y[gi]) + mu * mu);
        g[gi] = (1.0 / denom) * y[gi];
      }
      bool accepted = false;
      for (int bt = 0; bt < 40 && !accepted; ++bt) {
        std::vector<Dense> trial = y;
        for (size_t gi = 0; gi < ng; ++gi) axpy(-step, g[gi], trial[gi]);
        project_affine(trial);
        const double ft = smooth_value(trial);
        double move = 0.0;
        for (size_t gi = 0; gi < ng; ++gi) {
          Dense diff = trial[gi] - y[gi];
          move += dot(diff, diff);
        }
        if (ft <= fy - 1e-4 * move / std::max(step, 1e-300)) {
          y = std::move(trial);
          fy = ft;
          accepted = true;
          step *= 1.2;
        } else {
          step *= 0.5;
        }
      }
      if (!accepted) break;
    }
    double value = 0.0;
    for (const auto& yi : y) value += fnorm(yi);
    return {value, y};
  }

  int n_;
  std::vector<std::vector<int>> groups_;
  std::vector<int> count_;
  bool overlapping_ = false;
};

// --- spectrahedron --------------------------------------------------------------

class SpectrahedronSet final : public AtomicSet {
 public:
  explicit SpectrahedronSet(int n) : n_(n) {}

  Shape shape() const override { return Shape{n_, n_}; }
  std::string variant() const override { return "spectrahedron"; }

  double gauge(const Dense& x) const override {
    check_shape(x);
    auto [vals, vecs] = jacobi_eig_sym(x);
    (void)vecs;
    const double scale = std::max(std::abs(vals[0]), std::abs(vals[n_ - 1]));
    if (vals[n_ - 1] < -1e-10 * std::max(1.0, scale)) return kInf;
    double tr = 0.0;
    for (int i = 0; i < n_; ++i) tr += x(i, i);
    return tr;
  }

  double support(const Dense& z) const override {
    check_shape(z);
    auto [lmax, u] = sym_eig_top(z);
    (void)u;
    return std::max(0.0, lmax);
  }

  ExposedFace expose(const Dense& z, int k_max, double tol) const override {
    check_shape(z);
    auto [vals, vecs] = jacobi_eig_sym(z);
    const double sigma = std::max(0.0, vals[0]);
    if (sigma == 0.0) return zero_face(shape(), z, tol);
    ExposedFace f;
    f.support_value = sigma;
    f.exposing_vector = z;
    f.tol = tol;
    for (int i = 0; i < n_ && static_cast<int>(f.atoms.size()) < k_max; ++i) {
      if (vals[i] < sigma * (1.0 - tol)) break;
      Dense u(n_, 1);
      for (int r = 0; r < n_; ++r) u[r] = vecs(r, i);
      Atom a;
      a.element = outer(u, u);
      a.tag.kind = AtomTag::Kind::sym_rank_one;
      a.tag.index = i;
      a.tag.u = u;
      f.atoms.push_back(std::move(a));
    }
    return f;
  }

  AtomicDecomposition decompose(const Dense& x, double tol) const override {
    check_shape(x);
    auto [vals, vecs] = jacobi_eig_sym(x);
    const double scale = std::max(std::abs(vals[0]), std::abs(vals[n_ - 1]));
    if (vals[n_ - 1] < -1e-10 * std::max(1.0, scale))
      throw NotInCone("spectrahedron: element not positive semidefinite");
    AtomicDecomposition d;
    d.minimal = true;
    for (int i = 0; i < n_; ++i) {
      if (vals[i] <= drop_threshold(tol, std::max(vals[0], 0.0))) break;
      Dense u(n_, 1);
      for (int r = 0; r < n_; ++r) u[r] = vecs(r, i);
      Atom a;
      a.element = outer(u, u);
      a.tag.kind = AtomTag::Kind::sym_rank_one;
      a.tag.index = i;
      a.tag.u = u;
      d.terms.push_back({vals[i], std::move(a)});
      d.claimed_gauge += vals[i];
    }
    return d;
  }

  bool has_projector() const override { return true; }
  Dense project_hull(const Dense& p) const override {
    check_shape(p);
    return project_trace_capped_psd(symmetrized(p), 1.0);
  }

  nlohmann::json recipe_params() const override { return {{"n", n_}}; }

 private:
  int n_;
};

// --- weighted spectrahedron ---------------------------------------------------------

class WeightedSpectrahedronSet final : public AtomicSet {
 public:
  WeightedSpectrahedronSet(Dense v, Dense lambda) : v_(std::move(v)), lambda_(std::move(lambda)) {
    n_ = v_.rows();
    r_ = v_.cols();
    if (lambda_.size() != r_) throw ShapeMismatch("weighted_spectrahedron: weight length mismatch");
    for (int i = 0; i < r_; ++i)
      if (lambda_[i] <= 0) throw NonPositiveWeight("weighted_spectrahedron: weights must be positive");
    for (int i = 0; i < r_; ++i)
      for (int j = i; j < r_; ++j) {
        double s = 0.0;
        for (int k = 0; k < n_; ++k) s += v_(k, i) * v_(k, j);
        if (std::abs(s - (i == j ? 1.0 : 0.0)) > 1e-10)
          throw NotOrthonormal("weighted_spectrahedron: V columns not orthonormal");
      }
    vbar_ = complete_basis();
  }

  Shape shape() const override { return Shape{n_, n_}; }
  std::string variant() const override { return "weighted_spectrahedron"; }

  double gauge(const Dense& x) const override {
    check_shape(x);
    auto [vals, vecs] = jacobi_eig_sym(x);
    (void)vecs;
    const double scale = std::max({1.0, std::abs(vals[0]), std::abs(vals[n_ - 1])});
    if (vals[n_ - 1] < -1e-10 * scale) return kInf;
    if (cross_norm(x) > 1e-10 * (1.0 + fnorm(x))) return kInf;
    // <L, X> with L = V diag(lambda) V^T
    Dense xv = matmul(x, v_);
    double s = 0.0;
    for (int j = 0; j < r_; ++j) {
      double q = 0.0;
      for (int i = 0; i < n_; ++i) q += v_(i, j) * xv(i, j);
      s += lambda_[j] * q;
    }
    return s;
  }

  double support(const Dense& z) const override {
    check_shape(z);
    const Dense zs = symmetrized(z);
    if (nullspace_unbounded(zs)) return kInf;
    auto [lmax, p] = gen_eig_max(zs, v_, lambda_);
    (void)p;
    return std::max(0.0, lmax);
  }

  ExposedFace expose(const Dense& z, int k_max, double tol) const override {
    check_shape(z);
    const Dense zs = symmetrized(z);
    if (nullspace_unbounded(zs))
      throw UnboundedSupport("weighted_spectrahedron: support is infinite");
    Dense c = congruence(zs);
    auto [vals, vecs] = jacobi_eig_sym(c);
    const double sigma = std::max(0.0, vals[0]);
    if (sigma == 0.0) return zero_face(shape(), z, tol);
    ExposedFace f;
    f.support_value = sigma;
    f.exposing_vector = z;
    f.tol = tol;
    for (int i = 0; i < r_ && static_cast<int>(f.atoms.size()) < k_max; ++i) {
      if (vals[i] < sigma * (1.0 - tol)) break;
      f.atoms.push_back(atom_from_p(scaled_vector(vecs, i), i));
    }
    return f;
  }

  AtomicDecomposition decompose(const Dense& x, double tol) const override {
    check_shape(x);
    if (cross_norm(x) > 1e-8 * (1.0 + fnorm(x)))
      throw NotInCone("weighted_spectrahedron: range/nullspace cross terms");
    // M = Lambda^{1/2} V^T X V Lambda^{1/2}
    Dense m = matmul(transpose(v_), matmul(x, v_));
    for (int i = 0; i < r_; ++i)
      for (int j = 0; j < r_; ++j) m(i, j) *= std::sqrt(lambda_[i] * lambda_[j]);
    auto [vals, vecs] = jacobi_eig_sym(symmetrized(m));
    const double scale = std::max({1.0, std::abs(vals[0])});
    if (r_ > 0 && vals[r_ - 1] < -1e-8 * scale)
      throw NotInCone("weighted_spectrahedron: range block not PSD");
    AtomicDecomposition d;
    d.minimal = true;
    for (int i = 0; i < r_; ++i) {
      if (vals[i] <= drop_threshold(tol, std::max(vals[0], 0.0))) break;
      Dense p(r_, 1);
      for (int k = 0; k < r_; ++k) p[k] = vecs(k, i) / std::sqrt(lambda_[k]);
      d.terms.push_back({vals[i], atom_from_p(p, i)});
      d.claimed_gauge += vals[i];
    }
    if (vbar_.cols() > 0) {
      Dense nb = matmul(transpose(vbar_), matmul(x, vbar_));
      if (fnorm(nb) > 1e-12 * (1.0 + fnorm(x))) {
        Atom rec;
        rec.element = matmul(vbar_, matmul(nb, transpose(vbar_)));
        rec.tag.kind = AtomTag::Kind::recession;
        d.recession_part = WeightedAtom{1.0, std::move(rec)};
      }
    }
    return d;
  }

  nlohmann::json recipe_params() const override {
    nlohmann::json vm = nlohmann::json::array();
    for (int i = 0; i < n_; ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (int j = 0; j < r_; ++j) row.push_back(v_(i, j));
      vm.push_back(row);
    }
    nlohmann::json lm = nlohmann::json::array();
    for (int i = 0; i < r_; ++i) lm.push_back(lambda_[i]);
    return {{"v", vm}, {"lambda", lm}};
  }

 private:
  Dense complete_basis() const {
    // orthonormal complement of range(V)
    std::vector<Dense> basis;
    for (int j = 0; j < r_; ++j) {
      Dense c(n_, 1);
      for (int i = 0; i < n_; ++i) c[i] = v_(i, j);
      basis.push_back(std::move(c));
    }
    std::vector<Dense> extra;
    for (int i = 0; i < n_ && static_cast<int>(basis.size()) < n_; ++i) {
      Dense e(n_, 1);
      e[i] = 1.0;
      for (int pass = 0; pass < 2; ++pass)
        for (const auto& b : basis) axpy(-dot(b, e), b, e);
      const double nrm = fnorm(e);
      if (nrm > 1e-8) {
        e *= 1.0 / nrm;
        basis.push_back(e);
        extra.push_back(e);
      }
    }
    Dense vb(n_, static_cast<int>(extra.size()));
    for (size_t j = 0; j < extra.size(); ++j)
      for (int i = 0; i < n_; ++i) vb(i, static_cast<int>(j)) = extra[j][i];
    return vb;
  }

  double cross_norm(const Dense& x) const {
    if (vbar_.cols() == 0) return 0.0;
    Dense c = matmul(transpose(v_), matmul(x, vbar_));
    return fnorm(c);
  }

  bool nullspace_unbounded(const Dense& zs) const {
    if (vbar_.cols() == 0) return false;
    Dense nb = symmetrized(matmul(transpose(vbar_), matmul(zs, vbar_)));
    auto [lmax, u] = sym_eig_top(nb);
    (void)u;
    return lmax > 1e-10 * (1.0 + inf_norm(zs));
  }

  Dense congruence(const Dense& zs) const {
    Dense c = matmul(transpose(v_), matmul(zs, v_));
    for (int i = 0; i < r_; ++i)
      for (int j = 0; j < r_; ++j) c(i, j) /= std::sqrt(lambda_[i] * lambda_[j]);
    return symmetrized(c);
  }

  Dense scaled_vector(const Dense& vecs, int col) const {
    Dense p(r_, 1);
    for (int k = 0; k < r_; ++k) p[k] = vecs(k, col) / std::sqrt(lambda_[k]);
    return p;
  }

  Atom atom_from_p(const Dense& p, int index) const {
    Dense rvec = matvec(v_, p);
    Atom a;
    a.element = outer(rvec, rvec);
    a.tag.kind = AtomTag::Kind::sym_rank_one;
    a.tag.index = index;
    a.tag.u = rvec;
    return a;
  }

  Dense v_;
  Dense lambda_;
  Dense vbar_;
  int n_ = 0;
  int r_ = 0;
};

// --- transformed set -----------------------------------------------------------------

class TransformedSet final : public AtomicSet {
 public:
  TransformedSet(AtomicSetPtr inner, LinearMap m, TransformMode mode)
      : inner_(std::move(inner)), m_(std::move(m)), mode_(mode) {
    const int inner_size = inner_->shape().size();
    if (mode_ == TransformMode::image) {
      if (m_.domain_size() != inner_size)
        throw ShapeMismatch("transform(image): map domain must match the inner set");
      shape_ = (m_.range_size() == inner_size) ? inner_->shape() : Shape{m_.range_size(), 1};
    } else {
      if (m_.range_size() != inner_size)
        throw ShapeMismatch("transform(preimage): map range must match the inner set");
      shape_ = (m_.domain_size() == inner_size) ? inner_->shape() : Shape{m_.domain_size(), 1};
    }
  }

  Shape shape() const override { return shape_; }
  std::string variant() const override { return "transformed"; }

  double gauge(const Dense& x) const override {
    check_shape(x);
    if (mode_ == TransformMode::preimage) return inner_->gauge(to_inner(m_.apply(x)));
    if (!m_.invertible())
      throw GaugeUnsupported("transform(image): gauge needs an invertible map");
    return inner_->gauge(to_inner(m_.apply_inverse(x)));
  }

  double support(const Dense& z) const override {
    check_shape(z);
    if (mode_ == TransformMode::image) return inner_->support(to_inner(m_.apply_adjoint(z)));
    if (!m_.invertible())
      throw GaugeUnsupported("transform(preimage): support needs an invertible map");
    return inner_->support(to_inner(m_.apply_inverse_adjoint(z)));
  }

  ExposedFace expose(const Dense& z, int k_max, double tol) const override {
    check_shape(z);
    ExposedFace inner_face;
    if (mode_ == TransformMode::image) {
      inner_face = inner_->expose(to_inner(m_.apply_adjoint(z)), k_max, tol);
    } else {
      if (!m_.invertible())
        throw GaugeUnsupported("transform(preimage): expose needs an invertible map");
      inner_face = inner_->expose(to_inner(m_.apply_inverse_adjoint(z)), k_max, tol);
    }
    ExposedFace f;
    f.support_value = inner_face.support_value;
    f.exposing_vector = z;
    f.tol = tol;
    for (auto& a : inner_face.atoms) {
      Atom mapped;
      mapped.element = map_element(a.element);
      mapped.tag = a.tag;
      f.atoms.push_back(std::move(mapped));
    }
    return f;
  }

  AtomicDecomposition decompose(const Dense& x, double tol) const override {
    check_shape(x);
    AtomicDecomposition inner_d;
    if (mode_ == TransformMode::image) {
      if (!m_.invertible())
        throw GaugeUnsupported("transform(image): decompose needs an invertible map");
      inner_d = inner_->decompose(to_inner(m_.apply_inverse(x)), tol);
    } else {
      inner_d = inner_->decompose(to_inner(m_.apply(x)), tol);
    }
    AtomicDecomposition d;
    d.minimal = inner_d.minimal;
    d.claimed_gauge = inner_d.claimed_gauge;
    for (auto& t : inner_d.terms) {
      Atom mapped;
      mapped.element = map_element(t.atom.element);
      mapped.tag = t.atom.tag;
      d.terms.push_back({t.coeff, std::move(mapped)});
    }
    if (inner_d.recession_part) {
      Atom mapped;
      mapped.element = map_element(inner_d.recession_part->atom.element);
      mapped.tag = inner_d.recession_part->atom.tag;
      d.recession_part = WeightedAtom{inner_d.recession_part->coeff, std::move(mapped)};
    }
    return d;
  }

  bool has_projector() const override {
    // exact only for orthonormal maps
    const bool orthonormal = m_.kind() == LinearMap::Kind::dct_forward ||
                             m_.kind() == LinearMap::Kind::dct_transpose;
    return orthonormal && inner_->has_projector();
  }

  Dense project_hull(const Dense& p) const override {
    check_shape(p);
    if (!has_projector()) throw NoProjector("transformed: no exact projector for this map");
    if (mode_ == TransformMode::image)
      return map_element(inner_->project_hull(to_inner(m_.apply_adjoint(p))));
    return to_ambient(m_.apply_adjoint(inner_->project_hull(to_inner(m_.apply(p)))));
  }

  nlohmann::json recipe_params() const override {
    nlohmann::json map;
    map["kind"] = m_.kind_name();
    if (m_.kind() == LinearMap::Kind::dense) {
      nlohmann::json rows = nlohmann::json::array();
      for (int i = 0; i < m_.matrix().rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (int j = 0; j < m_.matrix().cols(); ++j) row.push_back(m_.matrix()(i, j));
        rows.push_back(row);
      }
      map["matrix"] = rows;
    } else if (m_.kind() == LinearMap::Kind::scaling) {
      map["alpha"] = m_.scale_factor();
      map["n"] = m_.domain_size();
    } else {
      map["n"] = m_.domain_size();
    }
    nlohmann::json inner;
    inner["variant"] = inner_->variant();
    inner["params"] = inner_->recipe_params();
    return {{"mode", mode_ == TransformMode::image ? "image" : "preimage"},
            {"map", map},
            {"inner", inner}};
  }

 private:
  Dense to_inner(const Dense& d) const { return d.reshaped(inner_->shape()); }
  Dense to_ambient(const Dense& d) const { return d.reshaped(shape_); }
  Dense map_element(const Dense& e) const {
    if (mode_ == TransformMode::image) return to_ambient(m_.apply(e));
    return to_ambient(m_.apply_inverse(e));
  }

  AtomicSetPtr inner_;
  LinearMap m_;
  TransformMode mode_;
  Shape shape_;
};

// --- scaled set --------------------------------------------------------------------

class ScaledSet final : public AtomicSet {
 public:
  ScaledSet(AtomicSetPtr inner, double alpha) : inner_(std::move(inner)), alpha_(alpha) {
    if (alpha_ <= 0) throw ShapeMismatch("scale_set: alpha must be positive");
  }

  Shape shape() const override { return inner_->shape(); }
  std::string variant() const override { return "scaled"; }

  double gauge(const Dense& x) const override { return inner_->gauge((1.0 / alpha_) * x); }
  double support(const Dense& z) const override { return alpha_ * inner_->support(z); }

  ExposedFace expose(const Dense& z, int k_max, double tol) const override {
    ExposedFace f = inner_->expose(z, k_max, tol);
    f.support_value *= alpha_;
    for (auto& a : f.atoms) a.element *= alpha_;
    return f;
  }

  AtomicDecomposition decompose(const Dense& x, double tol) const override {
    AtomicDecomposition d = inner_->decompose((1.0 / alpha_) * x, tol);
    for (auto& t : d.terms) t.atom.element *= alpha_;
    if (d.recession_part) d.recession_part->atom.element *= alpha_;
    return d;
  }

  bool has_projector() const override { return inner_->has_projector(); }
  Dense project_hull(const Dense& p) const override {
    return alpha_ * inner_->project_hull((1.0 / alpha_) * p);
  }

  nlohmann::json recipe_params() const override {
    nlohmann::json inner;
    inner["variant"] = inner_->variant();
    inner["params"] = inner_->recipe_params();
    return {{"alpha", alpha_}, {"inner", inner}};
  }

 private:
  AtomicSetPtr inner_;
  double alpha_;
};

}  // namespace

// --- factories -----------------------------------------------------------------

AtomicSetPtr signed_basis(Shape shape) { return std::make_shared<SignedBasisSet>(shape); }
AtomicSetPtr two_norm_ball(Shape shape) { return std::make_shared<TwoNormBallSet>(shape); }
AtomicSetPtr box_set(Shape shape) { return std::make_shared<BoxSet>(shape); }
AtomicSetPtr finite_atom_set(Shape shape, std::vector<Dense> atoms) {
  return std::make_shared<FiniteAtomSetImpl>(shape, std::move(atoms));
}
AtomicSetPtr nuclear_ball(int rows, int cols) {
  return std::make_shared<NuclearBallSet>(rows, cols);
}
AtomicSetPtr subspace_set(Dense orthonormal_basis) {
  return std::make_shared<SubspaceSet>(std::move(orthonormal_basis));
}
AtomicSetPtr tv_atoms(int n) { return std::make_shared<TvAtomSet>(n); }
AtomicSetPtr group_norm(int n, std::vector<std::vector<int>> groups) {
  return std::make_shared<GroupNormSet>(n, std::move(groups));
}
AtomicSetPtr spectrahedron(int n) { return std::make_shared<SpectrahedronSet>(n); }
AtomicSetPtr weighted_spectrahedron(Dense v, Dense lambda) {
  return std::make_shared<WeightedSpectrahedronSet>(std::move(v), std::move(lambda));
}
AtomicSetPtr transform(AtomicSetPtr inner, LinearMap m, TransformMode mode) {
  return std::make_shared<TransformedSet>(std::move(inner), std::move(m), mode);
}
AtomicSetPtr scale_set(AtomicSetPtr inner, double alpha) {
  return std::make_shared<ScaledSet>(std::move(inner), alpha);
}

// --- free operations ---------------------------------------------------------------

double alignment_residual(const AtomicSet& set, const Dense& x, const Dense& z) {
  const double g = set.gauge(x);
  const double s = set.support(z);
  if (g == 0.0 || s == 0.0) return std::abs(dot(x, z));
  if (std::isinf(g) || std::isinf(s))
    throw BothInfinite("alignment_residual: pair outside dom(gauge) x dom(support)");
  return g * s - dot(x, z);
}

namespace {

bool element_matches(const Atom& a, const ExposedFace& face, double tol) {
  for (const auto& b : face.atoms) {
    Dense diff = a.element - b.element;
    if (fnorm(diff) <= tol * (1.0 + fnorm(a.element))) return true;
  }
  return false;
}

// residual of u against the span of the given factors
double span_residual(const Dense& u, const std::vector<Dense>& factors) {
  if (factors.empty()) return fnorm(u);
  std::vector<Dense> basis;
  for (const auto& f : factors) {
    Dense w = f;
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& b : basis) axpy(-dot(b, w), b, w);
    const double nw = fnorm(w);
    if (nw > 1e-10) {
      w *= 1.0 / nw;
      basis.push_back(std::move(w));
    }
  }
  Dense r = u;
  for (int pass = 0; pass < 2; ++pass)
    for (const auto& b : basis) axpy(-dot(b, r), b, r);
  return fnorm(r);
}

}  // namespace

bool is_supported_by(const AtomicDecomposition& decomp, const ExposedFace& face, double tol) {
  std::vector<Dense> face_us, face_vs, face_ps;
  for (const auto& a : face.atoms) {
    if (a.tag.kind == AtomTag::Kind::rank_one) {
      face_us.push_back(a.tag.u);
      face_vs.push_back(a.tag.v);
    } else if (a.tag.kind == AtomTag::Kind::sym_rank_one) {
      face_ps.push_back(a.tag.u);
    }
  }

  for (const auto& term : decomp.terms) {
    const Atom& a = term.atom;
    bool matched = false;
    switch (a.tag.kind) {
      case AtomTag::Kind::signed_basis:
      case AtomTag::Kind::tv_column:
        for (const auto& b : face.atoms)
          if (b.tag.kind == a.tag.kind && b.tag.index == a.tag.index && b.tag.sign == a.tag.sign) {
            matched = true;
            break;
          }
        break;
      case AtomTag::Kind::group:
        for (const auto& b : face.atoms)
          if (b.tag.kind == a.tag.kind && b.tag.index == a.tag.index &&
              dot(a.element, b.element) >= 1.0 - tol) {
            matched = true;
            break;
          }
        break;
      case AtomTag::Kind::rank_one:
        if (!face_us.empty())
          matched = span_residual(a.tag.u, face_us) <= tol && span_residual(a.tag.v, face_vs) <= tol;
        else
          matched = element_matches(a, face, tol);
        break;
      case AtomTag::Kind::sym_rank_one: {
        Dense u = a.tag.u;
        const double nu = fnorm(u);
        if (nu > 0) u *= 1.0 / nu;
        std::vector<Dense> unit_ps;
        for (const auto& p : face_ps) {
          Dense q = p;
          const double nq = fnorm(q);
          if (nq > 0) q *= 1.0 / nq;
          unit_ps.push_back(std::move(q));
        }
        if (!unit_ps.empty())
          matched = span_residual(u, unit_ps) <= tol;
        else
          matched = element_matches(a, face, tol);
        break;
      }
      default:
        matched = element_matches(a, face, tol);
        break;
    }
    if (!matched) return false;
  }
  return true;
}

double gauge_bruteforce(const std::vector<Dense>& atoms, const Dense& x, double tol) {
  const int n = static_cast<int>(atoms.size());
  const int dim = x.size();
  if (n > 10 || dim > 6) throw TooLarge("gauge_bruteforce: beyond enumeration limits");
  for (const auto& a : atoms)
    if (a.size() != dim) throw ShapeMismatch("gauge_bruteforce: atom dimension mismatch");

  const double xnorm = fnorm(x);
  if (xnorm == 0.0) return 0.0;

  double best = kInf;
  const int max_size = std::min(dim, n);
  for (unsigned mask = 1; mask < (1u << n); ++mask) {
    if (std::popcount(mask) > max_size) continue;
    std::vector<int> idx;
    for (int j = 0; j < n; ++j)
      if (mask & (1u << j)) idx.push_back(j);
    const int k = static_cast<int>(idx.size());
    Dense a(dim, k);
    for (int c = 0; c < k; ++c)
      for (int r = 0; r < dim; ++r) a(r, c) = atoms[idx[c]][r];
    Dense xv = x.reshaped(Shape{dim, 1});
    Dense c = lstsq(a, xv);
    bool nonneg = true;
    double sum = 0.0;
    for (int j = 0; j < k; ++j) {
      if (c[j] < -tol * (1.0 + std::abs(c[j]))) {
        nonneg = false;
        break;
      }
      c[j] = std::max(0.0, c[j]);
      sum += c[j];
    }
    if (!nonneg) continue;
    Dense resid = matvec(a, c) - xv;
    if (fnorm(resid) <= tol * (1.0 + xnorm)) best = std::min(best, sum);
  }
  return best;
}

MoreauParts moreau_decompose(const AtomicSet& set, const Dense& s, double alpha) {
  if (!set.has_projector()) throw NoProjector("moreau_decompose: set has no hull projector");

  // The squared distance from (s, alpha) to the ray scale t of cone(C x {1})
  // is convex in t with derivative -2 g(t); g is nonincreasing, so the
  // minimizer is the root of g (or 0 when g(0+) <= 0).
  auto proj_at = [&](double t) { return set.project_hull((1.0 / t) * s); };
  auto g = [&](double t) {
    Dense x = proj_at(t);
    return dot(s - t * x, x) + (alpha - t);
  };

  const double tmax = std::sqrt(dot(s, s)) + std::abs(alpha) + 1.0;
  const double t_eps = 1e-14 * tmax;
  double t = 0.0;
  if (g(t_eps) > 0.0) {
    double lo = t_eps, hi = tmax;
    // g(tmax) <= 0: at tmax the ray has overshot both s and alpha
    for (int it = 0; it < 200 && hi - lo > 1e-16 * tmax; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (g(mid) > 0.0) lo = mid;
      else hi = mid;
    }
    t = 0.5 * (lo + hi);
  }

  Dense x = t > 0.0 ? proj_at(t) : Dense(s.shape());
  if (t > 0.0) {
    // one exact ray-scale update on the settled projection direction
    t = std::max(0.0, (dot(s, x) + alpha) / (1.0 + dot(x, x)));
    if (t > 0.0) x = proj_at(t);
  }

  MoreauParts out;
  out.alpha_x = t;
  out.x = x;
  out.alpha_z = t - alpha;
  Dense w = s - t * x;
  if (out.alpha_z > 1e-300) {
    out.z = (1.0 / out.alpha_z) * w;
  } else {
    out.alpha_z = 0.0;
    out.z = Dense(s.shape());
  }
  return out;
}

}  // namespace atomkit
