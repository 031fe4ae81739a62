#include "atomkit/set_calculus.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "atomkit/errors.hpp"

namespace atomkit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Shape common_shape(const std::vector<AtomicSetPtr>& parts, const char* who) {
  if (parts.size() < 2) throw ShapeMismatch(std::string(who) + ": needs at least two parts");
  const Shape s = parts[0]->shape();
  for (const auto& p : parts)
    if (!(p->shape() == s)) throw ShapeMismatch(std::string(who) + ": part shapes differ");
  return s;
}

nlohmann::json parts_recipe(const std::vector<AtomicSetPtr>& parts) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& p : parts) {
    nlohmann::json j;
    j["variant"] = p->variant();
    j["params"] = p->recipe_params();
    arr.push_back(std::move(j));
  }
  return {{"parts", arr}};
}

// Projection of each block onto tau * hull, using either the part's
// projector or its finite atom list.
Dense project_part_hull(const AtomicSet& part, const Dense& p, double tau) {
  if (tau <= 0.0) return Dense(p.shape());
  if (part.has_projector()) return tau * part.project_hull((1.0 / tau) * p);
  const auto* atoms = part.finite_atoms();
  if (!atoms) throw NoProjector("sum_gauge_numeric: part has neither projector nor atom list");
  std::vector<Dense> elems;
  elems.reserve(atoms->size());
  for (const auto& a : *atoms) elems.push_back(a.element);
  return tau * detail::project_polytope_hull(elems, (1.0 / tau) * p);
}

}  // namespace

// --- SumSet ---------------------------------------------------------------

SumSet::SumSet(std::vector<AtomicSetPtr> parts)
    : parts_(std::move(parts)), shape_(common_shape(parts_, "sum_descriptor")) {}

double SumSet::gauge(const Dense& x) const {
  check_shape(x);
  return sum_gauge_numeric(*this, x, 1e-8).value;
}

double SumSet::support(const Dense& z) const {
  check_shape(z);
  double s = 0.0;
  for (const auto& p : parts_) {
    const double si = p->support(z);
    if (std::isinf(si)) return kInf;
    s += si;
  }
  return s;
}

ExposedFace SumSet::expose(const Dense& z, int k_max, double tol) const {
  check_shape(z);
  std::vector<ExposedFace> faces;
  double sigma = 0.0;
  for (const auto& p : parts_) {
    faces.push_back(p->expose(z, k_max, tol));
    sigma += faces.back().support_value;
  }
  ExposedFace f;
  f.support_value = sigma;
  f.exposing_vector = z;
  f.tol = tol;

  // diagonal pairing first, then remaining cartesian combinations
  size_t max_len = 0;
  for (const auto& pf : faces) max_len = std::max(max_len, pf.atoms.size());
  auto emit = [&](const std::vector<size_t>& pick) {
    Atom composite;
    composite.element = Dense(shape_);
    composite.tag.kind = AtomTag::Kind::composite;
    for (size_t i = 0; i < faces.size(); ++i) {
      const Atom& ai = faces[i].atoms[std::min(pick[i], faces[i].atoms.size() - 1)];
      composite.element += ai.element;
      composite.tag.children.push_back(ai);
    }
    f.atoms.push_back(std::move(composite));
  };
  for (size_t d = 0; d < max_len && static_cast<int>(f.atoms.size()) < k_max; ++d)
    emit(std::vector<size_t>(faces.size(), d));
  // off-diagonal pairs (two-part perturbations of the diagonal)
  for (size_t i = 0; i < faces.size() && static_cast<int>(f.atoms.size()) < k_max; ++i) {
    for (size_t d = 1; d < faces[i].atoms.size() && static_cast<int>(f.atoms.size()) < k_max; ++d) {
      std::vector<size_t> pick(faces.size(), 0);
      pick[i] = d;
      if (max_len > 0 && d < max_len) emit(pick);
    }
  }
  return f;
}

AtomicDecomposition SumSet::decompose(const Dense& x, double tol) const {
  check_shape(x);
  GaugeSplit split = sum_gauge_numeric(*this, x, std::max(tol, 1e-9));
  std::vector<AtomicDecomposition> ds;
  for (size_t i = 0; i < parts_.size(); ++i) ds.push_back(parts_[i]->decompose(split.parts[i], tol));

  // couple the part decompositions into composite atoms with shared weights
  AtomicDecomposition d;
  d.minimal = false;
  d.claimed_gauge = split.value;
  std::vector<size_t> pos(parts_.size(), 0);
  std::vector<double> remaining(parts_.size(), 0.0);
  for (size_t i = 0; i < ds.size(); ++i)
    remaining[i] = ds[i].terms.empty() ? 0.0 : ds[i].terms[0].coeff;
  for (int guard = 0; guard < 4096; ++guard) {
    double step = kInf;
    bool any = false;
    for (size_t i = 0; i < ds.size(); ++i) {
      if (pos[i] < ds[i].terms.size()) {
        any = true;
        step = std::min(step, remaining[i]);
      }
    }
    if (!any) break;
    Atom composite;
    composite.element = Dense(shape_);
    composite.tag.kind = AtomTag::Kind::composite;
    for (size_t i = 0; i < ds.size(); ++i) {
      if (pos[i] >= ds[i].terms.size()) continue;
      const Atom& ai = ds[i].terms[pos[i]].atom;
      composite.element += ai.element;
      composite.tag.children.push_back(ai);
    }
    d.terms.push_back({step, std::move(composite)});
    for (size_t i = 0; i < ds.size(); ++i) {
      if (pos[i] >= ds[i].terms.size()) continue;
      remaining[i] -= step;
      if (remaining[i] <= 1e-14 * (1.0 + step)) {
        ++pos[i];
        if (pos[i] < ds[i].terms.size()) remaining[i] = ds[i].terms[pos[i]].coeff;
      }
    }
  }
  for (auto& di : ds)
    if (di.recession_part) d.recession_part = di.recession_part;  // at most one expected
  return d;
}

nlohmann::json SumSet::recipe_params() const { return parts_recipe(parts_); }

// --- UnionSet ---------------------------------------------------------------

UnionSet::UnionSet(std::vector<AtomicSetPtr> parts)
    : parts_(std::move(parts)), shape_(common_shape(parts_, "union_descriptor")) {}

double UnionSet::gauge(const Dense& x) const {
  check_shape(x);
  // exact LP when all parts are finitely generated
  bool all_finite = true;
  std::vector<Dense> merged;
  for (const auto& p : parts_) {
    const auto* atoms = p->finite_atoms();
    if (!atoms) {
      all_finite = false;
      break;
    }
    for (const auto& a : *atoms) merged.push_back(a.element);
  }
  if (all_finite) {
    if (fnorm(x) == 0.0) return 0.0;
    auto c = detail::min_sum_nonneg_solve(merged, x, 1e-9);
    if (!c) return kInf;
    double s = 0.0;
    for (double ci : *c) s += ci;
    return s;
  }

  // numeric: start from the best single-part value, refine by bisection on
  // the total budget with Frank-Wolfe feasibility over conv(union hulls)
  double hi = kInf;
  for (const auto& p : parts_) hi = std::min(hi, p->gauge(x));
  if (fnorm(x) == 0.0) return 0.0;
  if (std::isinf(hi)) {
    hi = 1.0;
    while (hi < 1e12 && !union_feasible(x, hi)) hi *= 2.0;
    if (hi >= 1e12) return kInf;
  }
  double lo = 0.0;
  for (int it = 0; it < 40; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (union_feasible(x, mid)) hi = mid;
    else lo = mid;
  }
  return hi;

}

double UnionSet::support(const Dense& z) const {
  check_shape(z);
  double s = 0.0;
  for (const auto& p : parts_) {
    const double si = p->support(z);
    if (std::isinf(si)) return kInf;
    s = std::max(s, si);
  }
  return s;
}

ExposedFace UnionSet::expose(const Dense& z, int k_max, double tol) const {
  check_shape(z);
  const double sigma = support(z);
  if (std::isinf(sigma)) throw UnboundedSupport("union: support is infinite");
  ExposedFace f;
  f.support_value = sigma;
  f.exposing_vector = z;
  f.tol = tol;
  for (const auto& p : parts_) {
    if (static_cast<int>(f.atoms.size()) >= k_max) break;
    const double si = p->support(z);
    if (si >= sigma * (1.0 - tol)) {
      ExposedFace pf = p->expose(z, k_max - static_cast<int>(f.atoms.size()), tol);
      for (auto& a : pf.atoms) f.atoms.push_back(std::move(a));
    }
  }
  return f;
}

AtomicDecomposition UnionSet::decompose(const Dense& x, double tol) const {
  check_shape(x);
  bool all_finite = true;
  std::vector<Dense> merged;
  std::vector<std::pair<size_t, size_t>> origin;  // (part, atom index)
  for (size_t pi = 0; pi < parts_.size(); ++pi) {
    const auto* atoms = parts_[pi]->finite_atoms();
    if (!atoms) {
      all_finite = false;
      break;
    }
    for (size_t ai = 0; ai < atoms->size(); ++ai) {
      merged.push_back((*atoms)[ai].element);
      origin.emplace_back(pi, ai);
    }
  }
  if (all_finite) {
    AtomicDecomposition d;
    d.minimal = true;
    if (fnorm(x) == 0.0) return d;
    auto c = detail::min_sum_nonneg_solve(merged, x, 1e-9);
    if (!c) throw NotInCone("union: element outside the conic hull");
    double cmax = 0.0;
    for (double ci : *c) cmax = std::max(cmax, ci);
    for (size_t k = 0; k < c->size(); ++k) {
      if ((*c)[k] > tol * cmax) {
        const auto [pi, ai] = origin[k];
        d.terms.push_back({(*c)[k], (*parts_[pi]->finite_atoms())[ai]});
        d.claimed_gauge += (*c)[k];
      }
    }
    return d;
  }
  // fall back to the best single part
  size_t best = 0;
  double best_g = kInf;
  for (size_t pi = 0; pi < parts_.size(); ++pi) {
    const double g = parts_[pi]->gauge(x);
    if (g < best_g) {
      best_g = g;
      best = pi;
    }
  }
  if (std::isinf(best_g)) throw NotInCone("union: element outside every part cone");
  return parts_[best]->decompose(x, tol);
}

nlohmann::json UnionSet::recipe_params() const { return parts_recipe(parts_); }

AtomicSetPtr sum_descriptor(std::vector<AtomicSetPtr> parts) {
  return std::make_shared<SumSet>(std::move(parts));
}

AtomicSetPtr union_descriptor(std::vector<AtomicSetPtr> parts) {
  return std::make_shared<UnionSet>(std::move(parts));
}

// --- numeric sum gauge -------------------------------------------------------

namespace {

// Distance from x to tau*(hull_1 + ... + hull_k) by cyclic exact block
// minimization of ||x - sum y_i||^2 over y_i in tau*hull_i, warm-started
// across levels. Alternating projections in the two-part case.
struct SplitFeasibility {
  bool feasible = false;
  std::vector<Dense> split;
  double distance = 0.0;
};

SplitFeasibility split_distance(const std::vector<AtomicSetPtr>& parts, const Dense& x,
                                double tau, double tol, int iters,
                                const std::vector<Dense>* warm) {
  const size_t k = parts.size();
  std::vector<Dense> y;
  if (warm && warm->size() == k) y = *warm;
  else y.assign(k, Dense(x.shape()));
  for (size_t i = 0; i < k; ++i) y[i] = project_part_hull(*parts[i], y[i], tau);

  SplitFeasibility out;
  const double target = tol * (1.0 + fnorm(x));
  double prev = -1.0;
  for (int it = 0; it < iters; ++it) {
    for (size_t i = 0; i < k; ++i) {
      Dense rest = x;
      for (size_t j = 0; j < k; ++j)
        if (j != i) rest -= y[j];
      y[i] = project_part_hull(*parts[i], rest, tau);
    }
    Dense resid = x;
    for (const auto& yi : y) resid -= yi;
    out.distance = fnorm(resid);
    if (out.distance <= 0.05 * target) break;
    if (prev >= 0.0 && prev - out.distance <= 1e-15 * prev) break;  // value converged
    prev = out.distance;
  }
  out.feasible = out.distance <= target;
  out.split = y;
  return out;
}

}  // namespace

static bool union_feasible_impl(const std::vector<AtomicSetPtr>& parts, const Dense& x, double budget);

GaugeSplit sum_gauge_numeric(const AtomicSet& sum_set, const Dense& x, double tol) {
  const auto* sum = dynamic_cast<const SumSet*>(&sum_set);
  if (!sum) throw ShapeMismatch("sum_gauge_numeric: descriptor is not a set sum");
  const auto& parts = sum->parts();

  if (fnorm(x) == 0.0) {
    GaugeSplit out;
    out.value = 0.0;
    out.parts.assign(parts.size(), Dense(x.shape()));
    return out;
  }

  // upper bracket: cheapest single-part assignment, else geometric growth
  double hi = kInf;
  for (const auto& p : parts) {
    try {
      hi = std::min(hi, p->gauge(x));
    } catch (const Error&) {
      // parts without a usable gauge do not contribute a bracket
    }
  }
  const int feas_iters = 1000;
  const double delta = tol * (1.0 + fnorm(x));  // distance offset defining the root
  std::vector<Dense> warm;
  auto dist_at = [&](double level) {
    auto fe = split_distance(parts, x, level, tol, feas_iters, warm.empty() ? nullptr : &warm);
    warm = fe.split;
    return fe;
  };
  if (std::isinf(hi) || hi == 0.0) {
    hi = std::max(hi == 0.0 ? fnorm(x) : 1.0, 1e-12);
    int guard = 0;
    while (guard++ < 60 && !dist_at(hi).feasible) hi *= 2.0;
    if (guard > 60) throw Infeasible("sum_gauge_numeric: element outside the sum cone");
  }

  // Bisection on the level, then a secant refinement that approaches the
  // root of the distance function from below. The distance to the scaled
  // sum hull is convex and decreasing in the level; on the infeasible side
  // it is computed reliably (no tangential slowdown), and the secant through
  // two infeasible levels underestimates the root, so successive predictions
  // increase monotonically to the gauge value.
  SplitFeasibility last = dist_at(hi);
  if (!last.feasible) throw Infeasible("sum_gauge_numeric: bracket is not feasible");
  double lo = 0.0;
  double d_lo = fnorm(x);
  for (int it = 0; it < 10; ++it) {
    const double mid = 0.5 * (lo + hi);
    auto fe = dist_at(mid);
    if (fe.feasible) {
      hi = mid;
      last = std::move(fe);
    } else {
      lo = mid;
      d_lo = fe.distance;
    }
  }

  double ta = 0.5 * lo, tb = lo;
  double da = split_distance(parts, x, ta, tol, feas_iters, &warm).distance;
  SplitFeasibility best_lower = dist_at(tb);
  double db = best_lower.distance;
  if (db <= delta) {
    hi = tb;  // the "infeasible" endpoint was already within tolerance
    last = std::move(best_lower);
  } else {
    for (int it = 0; it < 40; ++it) {
      double r = da > db ? tb + db * (tb - ta) / (da - db) : 0.5 * (tb + hi);
      if (!(r > tb) || r >= hi) r = 0.5 * (tb + hi);
      auto fe = dist_at(r);
      if (fe.distance > delta) {
        ta = tb;
        da = db;
        tb = r;
        db = fe.distance;
        if (tb - ta <= 1e-12 * (1.0 + tb)) break;
      } else {
        hi = r;
        last = std::move(fe);
        if (hi - tb <= 1e-10 * (1.0 + hi)) break;
      }
    }
  }

  // the reported level certifies the returned split: every part lies in
  // (value * hull_i) before the residual redistribution below
  GaugeSplit out;
  out.value = hi;
  out.parts = last.split;
  // remove the residual so the split reproduces x exactly
  Dense resid = x;
  for (const auto& yi : out.parts) resid -= yi;
  const double inv_k = 1.0 / static_cast<double>(out.parts.size());
  for (auto& yi : out.parts) axpy(inv_k, resid, yi);
  return out;
}

// Frank-Wolfe distance minimization for x/budget against conv of the union.
static bool union_feasible_impl(const std::vector<AtomicSetPtr>& parts, const Dense& x, double budget) {
  if (budget <= 0.0) return fnorm(x) == 0.0;
  Dense target = (1.0 / budget) * x;
  Dense y(x.shape());
  for (int it = 0; it < 600; ++it) {
    Dense g = y - target;  // gradient of 1/2 ||y - target||^2
    // LMO over conv(union of hulls + {0}): the best part atom against -g
    Dense best(x.shape());
    double best_val = 0.0;
    for (const auto& p : parts) {
      ExposedFace f = p->expose(-1.0 * g, 1, kExposeTol);
      if (f.support_value > best_val && !f.atoms.empty()) {
        best_val = f.support_value;
        best = f.atoms[0].element;
      }
    }
    Dense dir = best - y;
    const double denom = dot(dir, dir);
    if (denom <= 1e-300) break;
    double theta = -dot(g, dir) / denom;
    theta = std::clamp(theta, 0.0, 1.0);
    if (theta <= 0.0) break;
    axpy(theta, dir, y);
  }
  Dense diff = y - target;
  return fnorm(diff) <= 1e-5 * (1.0 + fnorm(target));
}

bool UnionSet::union_feasible(const Dense& x, double budget) const {
  return union_feasible_impl(parts_, x, budget);
}

}  // namespace atomkit
