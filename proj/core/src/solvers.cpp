#include "atomkit/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "atomkit/errors.hpp"
#include "atomkit/rng.hpp"

namespace atomkit {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

LinearOperator identity_operator(Shape s) {
  LinearOperator op;
  op.domain = s;
  op.range = s;
  op.apply = [](const Dense& x) { return x; };
  op.adjoint = [](const Dense& y) { return y; };
  return op;
}

LinearOperator dense_matrix_operator(Dense a) {
  LinearOperator op;
  op.domain = Shape{a.cols(), 1};
  op.range = Shape{a.rows(), 1};
  auto m = std::make_shared<Dense>(std::move(a));
  op.apply = [m](const Dense& x) { return matvec(*m, x); };
  op.adjoint = [m](const Dense& y) { return matvec_t(*m, y); };
  return op;
}

LinearOperator mask_operator(const MaskedMatrix& mask) {
  LinearOperator op;
  op.domain = mask.shape();
  op.range = Shape{mask.nnz(), 1};
  auto m = std::make_shared<MaskedMatrix>(mask);
  op.apply = [m](const Dense& x) { return m->sample(x); };
  op.adjoint = [m](const Dense& y) { return m->scatter(y); };
  return op;
}

SmoothObjective least_squares_objective(const LinearOperator& a, const Dense& b) {
  SmoothObjective obj;
  auto ap = a.apply;
  auto at = a.adjoint;
  obj.value = [ap, b](const Dense& x) {
    Dense r = ap(x) - b;
    return 0.5 * dot(r, r);
  };
  obj.gradient = [ap, at, b](const Dense& x) { return at(ap(x) - b); };
  obj.curvature = [ap](const Dense&, const Dense& d) {
    Dense ad = ap(d);
    return dot(ad, ad);
  };
  return obj;
}

std::string trace_to_csv(const CGTrace& trace) {
  std::ostringstream os;
  os << "k,gap,objective,theta,atom_tag\n";
  char buf[64];
  for (const auto& r : trace.records) {
    os << r.k << ",";
    std::snprintf(buf, sizeof(buf), "%.17g", r.gap);
    os << buf << ",";
    std::snprintf(buf, sizeof(buf), "%.17g", r.objective);
    os << buf << ",";
    std::snprintf(buf, sizeof(buf), "%.17g", r.theta);
    os << buf << "," << r.atom_tag << "\n";
  }
  return os.str();
}

// --- primal conditional gradient ------------------------------------------------

PrimalResult primal_cg(const SmoothObjective& obj, const AtomicSet& set,
                       const CGOptions& opts) {
  if (opts.tau <= 0) throw ShapeMismatch("primal_cg: tau must be positive");
  PrimalResult out;
  const Shape shape = set.shape();

  if (opts.max_iter == 0) {
    out.x = Dense(shape);
    return out;
  }

  // start from the hull's origin: the first iteration then merges the atom
  // exposed by -grad f(0), mirroring the residual recursion of the dual solver
  Dense x(shape);

  const double eps =
      opts.eps >= 0 ? opts.eps : 1e-6 * (1.0 + std::abs(obj.value(x)));

  for (int k = 0; k < opts.max_iter; ++k) {
    Dense z = -1.0 * obj.gradient(x);
    ExposedFace face = set.expose(z, 1, opts.expose_tol);
    if (face.atoms.empty()) throw EmptyFace("primal_cg: expose returned no atoms");
    Dense a = opts.tau * face.atoms[0].element;
    Dense dir = a - x;
    const double gap = dot(dir, z);
    const double fx = obj.value(x);

    if (gap < eps) {
      out.trace.converged = true;
      out.trace.iterations = k;
      break;
    }

    double theta;
    if (opts.step_rule == StepRule::exact && obj.curvature) {
      const double curv = obj.curvature(x, dir);
      theta = curv > 0 ? std::clamp(gap / curv, 0.0, 1.0) : 1.0;
      if (theta == 0.0) theta = 1e-12;
    } else {
      theta = 2.0 / (k + 2.0);
    }

    out.trace.records.push_back({k, gap, fx, theta, face.atoms[0].tag.label()});
    x = theta * a + (1.0 - theta) * x;
    out.trace.iterations = k + 1;
  }
  out.x = std::move(x);
  return out;
}

double duality_gap(const AtomicSet& set, const Dense& x, const Dense& z,
                   double alpha_star) {
  const double sigma = set.support(z);
  if (std::isinf(sigma)) throw UnboundedSupport("duality_gap: support is infinite");
  return alpha_star * sigma - dot(x, z);
}

// --- dual conditional gradient ----------------------------------------------------

DualResult dual_cg_least_squares(const LinearOperator& a, const Dense& b,
                                 const AtomicSet& set, const CGOptions& opts) {
  if (opts.tau <= 0) throw ShapeMismatch("dual_cg_least_squares: tau must be positive");
  DualResult out;

  Dense r = b;             // residual b - A x, x starts at zero
  Dense q(b.shape());      // restricted image A x

  const double eps = opts.eps >= 0 ? opts.eps : 1e-6 * (1.0 + 0.5 * dot(b, b));

  double last_gap = kInf;
  for (int k = 0; k < opts.max_iter; ++k) {
    Dense z = a.adjoint(r);  // negative gradient of 1/2 ||A x - b||^2
    ExposedFace face = set.expose(z, 1, opts.expose_tol);
    if (face.atoms.empty()) throw EmptyFace("dual_cg_least_squares: empty face");
    Dense delta_r = a.apply(opts.tau * face.atoms[0].element) - q;
    const double gap = dot(delta_r, r);
    last_gap = gap;
    const double fx = 0.5 * dot(r, r);

    if (gap < eps) {
      out.trace.converged = true;
      out.trace.iterations = k;
      break;
    }
    const double dn = dot(delta_r, delta_r);
    const double theta = dn > 0 ? std::min(1.0, gap / dn) : 1.0;
    out.trace.records.push_back({k, gap, fx, theta, face.atoms[0].tag.label()});
    axpy(-theta, delta_r, r);
    axpy(theta, delta_r, q);
    out.trace.iterations = k + 1;
  }

  out.residual = r;
  out.certificate.z_star = a.adjoint(r);
  out.certificate.support_value = set.support(out.certificate.z_star);
  if (std::isinf(last_gap)) {
    // no iterations ran; evaluate the stop test at the exit point
    ExposedFace face = set.expose(out.certificate.z_star, 1, opts.expose_tol);
    if (!face.atoms.empty()) {
      Dense delta_r = a.apply(opts.tau * face.atoms[0].element) - q;
      last_gap = dot(delta_r, r);
    }
  }
  out.certificate.gap_at_exit = last_gap;
  out.certificate.exposed = set.expose(out.certificate.z_star, 4, opts.expose_tol);
  return out;
}

// --- reduced recovery ---------------------------------------------------------------

namespace {

// Variable block of the reduced problem: either nonnegative coefficients on a
// finite list of face atoms, or a PSD trace-capped matrix S for a spectral
// face x = U S V^T (V = U for symmetric faces).
struct FaceBlock {
  bool spectral = false;
  std::vector<Atom> atoms;  // finite case
  Dense coeffs;             // finite case, (natoms, 1)
  Dense u, v;               // spectral case bases
  Dense s;                  // spectral case block
  Shape ambient;

  Dense synthesize() const {
    Dense x(ambient);
    if (spectral) {
      Dense us = matmul(u, s);
      Dense usvt = matmul(us, transpose(v));
      x += usvt.reshaped(ambient);
    } else {
      for (size_t i = 0; i < atoms.size(); ++i) axpy(coeffs[static_cast<int>(i)], atoms[i].element, x);
    }
    return x;
  }

  void pullback_gradient(const Dense& g, Dense& grad_out) const {
    if (spectral) {
      Dense gm = g.reshaped(Shape{u.rows(), v.rows()});
      Dense ug = matmul(transpose(u), matmul(gm, v));
      grad_out = symmetrized(ug);
    } else {
      grad_out = Dense(static_cast<int>(atoms.size()), 1);
      for (size_t i = 0; i < atoms.size(); ++i)
        grad_out[static_cast<int>(i)] = dot(atoms[i].element, g);
    }
  }

  void project(double tau) {
    if (spectral) s = project_trace_capped_psd(symmetrized(s), tau);
    else coeffs = project_simplex_cap(coeffs, tau);
  }
};

FaceBlock make_block(const ExposedFace& face, Shape ambient) {
  FaceBlock blk;
  blk.ambient = ambient;
  bool spectral = !face.atoms.empty();
  for (const auto& a : face.atoms)
    if (a.tag.kind != AtomTag::Kind::rank_one && a.tag.kind != AtomTag::Kind::sym_rank_one)
      spectral = false;
  blk.spectral = spectral;
  if (spectral) {
    const bool sym = face.atoms[0].tag.kind == AtomTag::Kind::sym_rank_one;
    const int m = face.atoms[0].tag.u.size();
    const int nv = sym ? m : face.atoms[0].tag.v.size();
    const int d = static_cast<int>(face.atoms.size());
    blk.u = Dense(m, d);
    blk.v = Dense(nv, d);
    for (int j = 0; j < d; ++j) {
      const auto& t = face.atoms[static_cast<size_t>(j)].tag;
      Dense uj = t.u;
      const double un = fnorm(uj);
      if (un > 0) uj *= 1.0 / un;
      for (int i = 0; i < m; ++i) blk.u(i, j) = uj[i];
      Dense vj = sym ? uj : t.v;
      for (int i = 0; i < nv; ++i) blk.v(i, j) = vj[i];
    }
    blk.s = Dense(d, d);
  } else {
    blk.atoms = face.atoms;
    blk.coeffs = Dense(static_cast<int>(face.atoms.size()), 1);
  }
  return blk;
}

}  // namespace

std::vector<Dense> recover_from_certificate(const SmoothObjective& obj,
                                            const DualCertificate& cert,
                                            const std::vector<AtomicSetPtr>& descs,
                                            double tau, const RecoverOptions& opts) {
  const Dense& z = cert.z_star;
  std::vector<FaceBlock> blocks;
  for (const auto& d : descs) {
    ExposedFace face = d->expose(z.reshaped(d->shape()), opts.face_k, opts.face_tol);
    if (face.atoms.empty()) throw EmptyFace("recover_from_certificate: empty exposed face");
    blocks.push_back(make_block(face, d->shape()));
  }

  const Shape ambient = descs[0]->shape();
  auto total = [&]() {
    Dense x(ambient);
    for (const auto& b : blocks) x += b.synthesize().reshaped(ambient);
    return x;
  };

  // Lipschitz estimate by power iteration on the reduced quadratic form,
  // using gradient differences (exact for quadratic objectives).
  Dense g0 = obj.gradient(Dense(ambient));
  double lip = 1.0;
  {
    Rng rng(11);
    std::vector<FaceBlock> dir = blocks;
    for (auto& b : dir) {
      if (b.spectral) b.s = rng.normal_dense(b.s.shape());
      else b.coeffs = rng.normal_dense(b.coeffs.shape());
    }
    for (int it = 0; it < 30; ++it) {
      double nrm = 0.0;
      for (const auto& b : dir) nrm += b.spectral ? dot(b.s, b.s) : dot(b.coeffs, b.coeffs);
      nrm = std::sqrt(nrm);
      if (nrm <= 1e-300) break;
      for (auto& b : dir) {
        if (b.spectral) b.s *= 1.0 / nrm;
        else b.coeffs *= 1.0 / nrm;
      }
      Dense xd(ambient);
      for (const auto& b : dir) xd += b.synthesize().reshaped(ambient);
      Dense hg = obj.gradient(xd) - g0;  // H * (direction image)
      double ray = 0.0;
      for (auto& b : dir) {
        Dense pb;
        b.pullback_gradient(hg, pb);
        ray += b.spectral ? dot(pb, b.s) : dot(pb, b.coeffs);
        if (b.spectral) b.s = pb;
        else b.coeffs = pb;
      }
      lip = std::max(std::abs(ray), 1e-12);
    }
  }

  const double step = 1.0 / lip;
  for (int it = 0; it < opts.max_iter; ++it) {
    Dense g = obj.gradient(total());
    double stationarity = 0.0;
    for (auto& b : blocks) {
      Dense pb;
      b.pullback_gradient(g, pb);
      FaceBlock trial = b;
      if (b.spectral) {
        axpy(-step, pb, trial.s);
        trial.project(tau);
        Dense diff = trial.s - b.s;
        stationarity += dot(diff, diff);
        b.s = trial.s;
      } else {
        axpy(-step, pb, trial.coeffs);
        trial.project(tau);
        Dense diff = trial.coeffs - b.coeffs;
        stationarity += dot(diff, diff);
        b.coeffs = trial.coeffs;
      }
    }
    if (std::sqrt(stationarity) <= opts.tol * step) break;
  }

  std::vector<Dense> components;
  for (auto& b : blocks) components.push_back(b.synthesize().reshaped(ambient));
  return components;
}

Dense psd_reduced_solve(const Dense& u, const Dense& v, const MaskedMatrix& b,
                        double tau, int max_iter) {
  auto check_orthonormal = [](const Dense& m, const char* who) {
    for (int i = 0; i < m.cols(); ++i)
      for (int j = i; j < m.cols(); ++j) {
        double s = 0.0;
        for (int r = 0; r < m.rows(); ++r) s += m(r, i) * m(r, j);
        if (std::abs(s - (i == j ? 1.0 : 0.0)) > 1e-8) throw NotOrthonormal(who);
      }
  };
  check_orthonormal(u, "psd_reduced_solve: U not orthonormal");
  check_orthonormal(v, "psd_reduced_solve: V not orthonormal");
  if (u.cols() != v.cols()) throw ShapeMismatch("psd_reduced_solve: block size mismatch");
  const int d = u.cols();

  const Dense bvals = b.values_vector();
  auto residual = [&](const Dense& s) {
    Dense x = matmul(matmul(u, s), transpose(v));
    return b.sample(x) - bvals;
  };
  auto grad = [&](const Dense& s) {
    Dense rd = b.scatter(residual(s));
    return symmetrized(matmul(transpose(u), matmul(rd, v)));
  };

  // Lipschitz bound of S -> U^T mask(U S V^T) V by power iteration
  double lip = 1e-12;
  {
    Rng rng(13);
    Dense s = symmetrized(rng.normal_dense(Shape{d, d}));
    for (int it = 0; it < 30; ++it) {
      const double ns = fnorm(s);
      if (ns <= 1e-300) break;
      s *= 1.0 / ns;
      Dense x = matmul(matmul(u, s), transpose(v));
      Dense hs = symmetrized(matmul(transpose(u), matmul(b.scatter(b.sample(x)), v)));
      lip = std::max(std::abs(dot(hs, s)), 1e-12);
      s = hs;
    }
  }

  const double step = 1.0 / lip;
  const double target = 1e-6 * (1.0 + fnorm(bvals));
  Dense s(d, d);
  for (int it = 0; it < max_iter; ++it) {
    Dense g = grad(s);
    Dense trial = s;
    axpy(-step, g, trial);
    trial = project_trace_capped_psd(symmetrized(trial), tau);
    Dense diff = trial - s;
    s = trial;
    if (fnorm(diff) / step <= target) break;
  }
  return s;
}

// --- certificates ------------------------------------------------------------------

OptimalityReport check_optimality(const AtomicSet& set, const Dense& x,
                                  const Dense& grad, OptimalityForm form,
                                  double param, double tol) {
  OptimalityReport rep;
  Dense z = -1.0 * grad;
  rep.gauge_x = set.gauge(x);
  rep.sigma_z = set.support(z);
  rep.residual = alignment_residual(set, x, z);
  const double scale = 1.0 + (std::isinf(rep.gauge_x * rep.sigma_z)
                                  ? 0.0
                                  : std::abs(rep.gauge_x * rep.sigma_z));
  rep.aligned = rep.residual <= tol * scale;
  rep.passed = rep.aligned;

  std::ostringstream detail;
  switch (form) {
    case OptimalityForm::unconstrained: {
      const double rho = param;
      const bool bound_ok = rep.sigma_z <= rho * (1.0 + tol);
      const bool tight_ok =
          rep.gauge_x <= tol * (1.0 + rep.gauge_x) || std::abs(rep.sigma_z - rho) <= rho * tol;
      rep.passed = rep.aligned && bound_ok && tight_ok;
      detail << "unconstrained: sigma(-grad)=" << rep.sigma_z << " rho=" << rho;
      break;
    }
    case OptimalityForm::gauge_constrained: {
      const double alpha = param;
      const bool feasible = rep.gauge_x <= alpha * (1.0 + tol) + tol;
      rep.passed = rep.aligned && feasible;
      detail << "gauge_constrained: gauge(x)=" << rep.gauge_x << " alpha=" << alpha;
      break;
    }
    case OptimalityForm::level_constrained: {
      detail << "level_constrained: feasibility f(x)<=tau checked by caller; "
                "strict feasibility reported, not assumed";
      break;
    }
  }
  rep.detail = detail.str();
  return rep;
}

bool check_gauge_duality(const AtomicSet& set, const Dense& x, const Dense& z,
                         const std::function<bool(const Dense&)>& member_d,
                         const std::function<bool(const Dense&)>& member_dprime,
                         double tol) {
  if (!member_d(x) || !member_dprime(z)) return false;
  if (std::abs(dot(x, z) - 1.0) > tol) return false;
  return alignment_residual(set, x, z) <= tol;
}

}  // namespace atomkit
