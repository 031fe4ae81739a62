#include "atomkit/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>

#include "atomkit/errors.hpp"
#include "atomkit/rng.hpp"

namespace atomkit {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr int kDenseCutoff = 32;  // iterative above, dense Jacobi below

}  // namespace

// --- MaskedMatrix ---------------------------------------------------------

MaskedMatrix::MaskedMatrix(Shape shape, std::vector<MaskedEntry> entries)
    : shape_(shape), entries_(std::move(entries)) {
  std::sort(entries_.begin(), entries_.end(), [](const MaskedEntry& a, const MaskedEntry& b) {
    return a.i != b.i ? a.i < b.i : a.j < b.j;
  });
  for (size_t k = 0; k < entries_.size(); ++k) {
    const auto& e = entries_[k];
    if (e.i < 0 || e.i >= shape_.rows || e.j < 0 || e.j >= shape_.cols)
      throw ShapeMismatch("MaskedMatrix: index out of range");
    if (k > 0 && entries_[k - 1].i == e.i && entries_[k - 1].j == e.j)
      throw ShapeMismatch("MaskedMatrix: duplicate index");
  }
}

Dense MaskedMatrix::sample(const Dense& x) const {
  if (!(x.shape() == shape_)) throw ShapeMismatch("MaskedMatrix::sample: shape mismatch");
  Dense out(nnz(), 1);
  for (int k = 0; k < nnz(); ++k) out[k] = x(entries_[k].i, entries_[k].j);
  return out;
}

Dense MaskedMatrix::scatter(const Dense& values) const {
  if (values.size() != nnz()) throw ShapeMismatch("MaskedMatrix::scatter: length mismatch");
  Dense out(shape_);
  for (int k = 0; k < nnz(); ++k) out(entries_[k].i, entries_[k].j) = values[k];
  return out;
}

Dense MaskedMatrix::values_vector() const {
  Dense out(nnz(), 1);
  for (int k = 0; k < nnz(); ++k) out[k] = entries_[k].value;
  return out;
}

Dense MaskedMatrix::to_dense() const {
  Dense out(shape_);
  for (const auto& e : entries_) out(e.i, e.j) = e.value;
  return out;
}

double MaskedMatrix::fnorm() const {
  double s = 0.0;
  for (const auto& e : entries_) s += e.value * e.value;
  return std::sqrt(s);
}

MaskedMatrix MaskedMatrix::with_values(const Dense& values) const {
  if (values.size() != nnz()) throw ShapeMismatch("with_values: length mismatch");
  auto entries = entries_;
  for (int k = 0; k < nnz(); ++k) entries[k].value = values[k];
  return MaskedMatrix(shape_, std::move(entries));
}

LinOp dense_linop(const Dense& a) {
  LinOp op;
  op.rows = a.rows();
  op.cols = a.cols();
  op.apply = [a](const Dense& x) { return matvec(a, x); };
  op.adjoint = [a](const Dense& y) { return matvec_t(a, y); };
  return op;
}

// --- dense Jacobi kernels --------------------------------------------------

std::pair<Dense, Dense> jacobi_eig_sym(const Dense& s_in) {
  if (!s_in.shape().is_square()) throw ShapeMismatch("jacobi_eig_sym: not square");
  const int n = s_in.rows();
  const double scale = inf_norm(s_in);
  if (max_abs_asymmetry(s_in) > 1e-12 * std::max(1.0, scale))
    throw NotSymmetric("jacobi_eig_sym: input not symmetric");
  Dense a = symmetrized(s_in);
  Dense q = Dense::identity(n);

  const int max_sweeps = 64;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) off = std::max(off, std::abs(a(i, j)));
    if (off <= 1e-15 * std::max(1.0, scale)) break;
    for (int p = 0; p < n - 1; ++p) {
      for (int qq = p + 1; qq < n; ++qq) {
        const double apq = a(p, qq);
        if (std::abs(apq) <= 1e-18 * std::max(1.0, scale)) continue;
        const double theta = (a(qq, qq) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(1.0 + theta * theta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double sn = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, qq);
          a(k, p) = c * akp - sn * akq;
          a(k, qq) = sn * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(qq, k);
          a(p, k) = c * apk - sn * aqk;
          a(qq, k) = sn * apk + c * aqk;
        }
        for (int k = 0; k < n; ++k) {
          const double qkp = q(k, p), qkq = q(k, qq);
          q(k, p) = c * qkp - sn * qkq;
          q(k, qq) = sn * qkp + c * qkq;
        }
      }
    }
  }

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int i, int j) { return a(i, i) > a(j, j); });
  Dense vals(n, 1);
  Dense vecs(n, n);
  for (int c = 0; c < n; ++c) {
    vals[c] = a(order[c], order[c]);
    for (int r = 0; r < n; ++r) vecs(r, c) = q(r, order[c]);
  }
  return {vals, vecs};
}

DenseSvd jacobi_svd(const Dense& a_in) {
  const bool transposed = a_in.rows() < a_in.cols();
  Dense a = transposed ? transpose(a_in) : a_in;
  const int m = a.rows(), n = a.cols();

  Dense v = Dense::identity(n);
  const double scale = std::max(1.0, inf_norm(a));

  auto col_dot = [&](int p, int q) {
    double s = 0.0;
    for (int i = 0; i < m; ++i) s += a(i, p) * a(i, q);
    return s;
  };

  const int max_sweeps = 64;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    bool rotated = false;
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double app = col_dot(p, p);
        const double aqq = col_dot(q, q);
        const double apq = col_dot(p, q);
        if (std::abs(apq) <= 1e-16 * scale * scale + 1e-30 ||
            std::abs(apq) <= 1e-15 * std::sqrt(app * aqq))
          continue;
        rotated = true;
        const double zeta = (aqq - app) / (2.0 * apq);
        const double t = (zeta >= 0 ? 1.0 : -1.0) /
                         (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double sn = c * t;
        for (int i = 0; i < m; ++i) {
          const double aip = a(i, p), aiq = a(i, q);
          a(i, p) = c * aip - sn * aiq;
          a(i, q) = sn * aip + c * aiq;
        }
        for (int i = 0; i < n; ++i) {
          const double vip = v(i, p), viq = v(i, q);
          v(i, p) = c * vip - sn * viq;
          v(i, q) = sn * vip + c * viq;
        }
      }
    }
    if (!rotated) break;
  }

  std::vector<double> sig(n);
  for (int j = 0; j < n; ++j) sig[j] = std::sqrt(std::max(0.0, col_dot(j, j)));
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int i, int j) { return sig[i] > sig[j]; });

  Dense u(m, n), vv(n, n), sigma(n, 1);
  for (int c = 0; c < n; ++c) {
    const int j = order[c];
    sigma[c] = sig[j];
    if (sig[j] > 1e-300) {
      for (int i = 0; i < m; ++i) u(i, c) = a(i, j) / sig[j];
    }
    for (int i = 0; i < n; ++i) vv(i, c) = v(i, j);
  }

  if (transposed) return {vv, sigma, u};
  return {u, sigma, vv};
}

Dense solve_lu(const Dense& a_in, const Dense& b_in) {
  if (!a_in.shape().is_square() || a_in.rows() != b_in.rows())
    throw ShapeMismatch("solve_lu: dimension mismatch");
  const int n = a_in.rows();
  Dense a = a_in;
  Dense b = b_in;
  std::vector<int> piv(n);
  std::iota(piv.begin(), piv.end(), 0);
  for (int k = 0; k < n; ++k) {
    int p = k;
    for (int i = k + 1; i < n; ++i)
      if (std::abs(a(i, k)) > std::abs(a(p, k))) p = i;
    if (std::abs(a(p, k)) < 1e-300) throw NumericFailure("solve_lu: singular matrix");
    if (p != k) {
      for (int j = 0; j < n; ++j) std::swap(a(k, j), a(p, j));
      for (int j = 0; j < b.cols(); ++j) std::swap(b(k, j), b(p, j));
    }
    for (int i = k + 1; i < n; ++i) {
      const double f = a(i, k) / a(k, k);
      a(i, k) = 0.0;
      for (int j = k + 1; j < n; ++j) a(i, j) -= f * a(k, j);
      for (int j = 0; j < b.cols(); ++j) b(i, j) -= f * b(k, j);
    }
  }
  for (int k = n - 1; k >= 0; --k) {
    for (int j = 0; j < b.cols(); ++j) {
      double s = b(k, j);
      for (int i = k + 1; i < n; ++i) s -= a(k, i) * b(i, j);
      b(k, j) = s / a(k, k);
    }
  }
  return b;
}

Dense lstsq(const Dense& a_in, const Dense& b_in) {
  const int m = a_in.rows(), n = a_in.cols();
  if (m < n) throw ShapeMismatch("lstsq: requires rows >= cols");
  if (b_in.rows() != m || b_in.cols() != 1) throw ShapeMismatch("lstsq: rhs mismatch");
  Dense a = a_in;
  Dense b = b_in;
  for (int k = 0; k < n; ++k) {
    double nrm = 0.0;
    for (int i = k; i < m; ++i) nrm += a(i, k) * a(i, k);
    nrm = std::sqrt(nrm);
    if (nrm < 1e-300) continue;
    const double alpha = a(k, k) >= 0 ? -nrm : nrm;
    Dense w(m, 1);
    w[k] = a(k, k) - alpha;
    for (int i = k + 1; i < m; ++i) w[i] = a(i, k);
    double wn = 0.0;
    for (int i = k; i < m; ++i) wn += w[i] * w[i];
    if (wn < 1e-300) continue;
    for (int j = k; j < n; ++j) {
      double s = 0.0;
      for (int i = k; i < m; ++i) s += w[i] * a(i, j);
      s *= 2.0 / wn;
      for (int i = k; i < m; ++i) a(i, j) -= s * w[i];
    }
    double s = 0.0;
    for (int i = k; i < m; ++i) s += w[i] * b[i];
    s *= 2.0 / wn;
    for (int i = k; i < m; ++i) b[i] -= s * w[i];
  }
  Dense x(n, 1);
  for (int k = n - 1; k >= 0; --k) {
    double s = b[k];
    for (int j = k + 1; j < n; ++j) s -= a(k, j) * x[j];
    x[k] = std::abs(a(k, k)) > 1e-300 ? s / a(k, k) : 0.0;
  }
  return x;
}

// --- top singular triples --------------------------------------------------

namespace {

std::vector<SingularTriple> dense_top_triples(const Dense& a, int k) {
  DenseSvd svd = jacobi_svd(a);
  std::vector<SingularTriple> out;
  const int r = std::min({k, svd.sigma.size()});
  for (int i = 0; i < r; ++i) {
    SingularTriple t;
    t.sigma = svd.sigma[i];
    t.u = Dense(a.rows(), 1);
    t.v = Dense(a.cols(), 1);
    for (int r2 = 0; r2 < a.rows(); ++r2) t.u[r2] = svd.u(r2, i);
    for (int r2 = 0; r2 < a.cols(); ++r2) t.v[r2] = svd.v(r2, i);
    if (t.sigma <= 1e-300) {
      // zero block: emit canonical unit vectors
      t.u = Dense(a.rows(), 1);
      t.v = Dense(a.cols(), 1);
      t.u[std::min(i, a.rows() - 1)] = 1.0;
      t.v[std::min(i, a.cols() - 1)] = 1.0;
      t.sigma = 0.0;
    }
    out.push_back(std::move(t));
  }
  return out;
}

Dense materialize(const LinOp& op) {
  Dense a(op.rows, op.cols);
  Dense e(op.cols, 1);
  for (int j = 0; j < op.cols; ++j) {
    e[j] = 1.0;
    Dense col = op.apply(e);
    for (int i = 0; i < op.rows; ++i) a(i, j) = col[i];
    e[j] = 0.0;
  }
  return a;
}

void reorthogonalize(const std::vector<Dense>& basis, Dense& w) {
  // two passes of classical Gram-Schmidt
  for (int pass = 0; pass < 2; ++pass)
    for (const Dense& q : basis) axpy(-dot(q, w), q, w);
}

}  // namespace

std::vector<SingularTriple> top_singular_triples(const LinOp& a, int k, double tol,
                                                 int max_iter, uint64_t seed) {
  if (k < 1) throw ShapeMismatch("top_singular_triples: k must be >= 1");
  const int m = a.rows, n = a.cols;
  if (k > std::min(m, n)) throw ShapeMismatch("top_singular_triples: k exceeds min dimension");
  if (tol <= 0) throw ShapeMismatch("top_singular_triples: tol must be positive");

  if (std::min(m, n) <= kDenseCutoff) return dense_top_triples(materialize(a), k);

  // Golub-Kahan-Lanczos with full reorthogonalization.
  Rng rng(seed);
  Dense v0 = rng.normal_dense(Shape{n, 1});
  double v0n = fnorm(v0);
  if (v0n == 0) {
    v0 = Dense(n, 1);
    v0[0] = 1.0;
    v0n = 1.0;
  }
  v0 *= 1.0 / v0n;

  std::vector<Dense> us, vs;
  std::vector<double> alphas, betas;  // betas[j] couples v[j+1] to u[j]
  vs.push_back(v0);

  Dense u = a.apply(vs[0]);
  if (u.rows() != m || u.cols() != 1) throw ShapeMismatch("top_singular_triples: operator dims");
  double alpha = fnorm(u);
  if (alpha <= 1e-300) {
    // zero operator
    std::vector<SingularTriple> out;
    for (int i = 0; i < k; ++i) {
      SingularTriple t;
      t.sigma = 0.0;
      t.u = Dense(m, 1);
      t.v = Dense(n, 1);
      t.u[std::min(i, m - 1)] = 1.0;
      t.v[std::min(i, n - 1)] = 1.0;
      out.push_back(std::move(t));
    }
    return out;
  }
  u *= 1.0 / alpha;
  us.push_back(u);
  alphas.push_back(alpha);

  const int max_steps = std::min({max_iter, m, n});
  std::vector<SingularTriple> result;

  for (int j = 1; j <= max_steps; ++j) {
    // extend right basis
    Dense w = a.adjoint(us.back());
    if (w.rows() != n || w.cols() != 1) throw ShapeMismatch("top_singular_triples: adjoint dims");
    axpy(-alphas.back(), vs.back(), w);
    reorthogonalize(vs, w);
    double beta = fnorm(w);
    bool breakdown = beta <= 1e-14 * alphas[0];
    if (!breakdown) {
      w *= 1.0 / beta;
      betas.push_back(beta);
      vs.push_back(w);

      Dense u2 = a.apply(vs.back());
      axpy(-beta, us.back(), u2);
      reorthogonalize(us, u2);
      double a2 = fnorm(u2);
      if (a2 <= 1e-14 * alphas[0]) {
        // range exhausted; the factorization closes with a trailing beta
        // column, A V_{p+1} = U_p B for a p x (p+1) bidiagonal B
        breakdown = true;
      } else {
        u2 *= 1.0 / a2;
        us.push_back(u2);
        alphas.push_back(a2);
      }
    }

    const int dim = static_cast<int>(alphas.size());
    const bool check_now = breakdown || dim >= k + 2 || dim == max_steps || j == max_steps;
    if (check_now) {
      // Ritz values from the small bidiagonal block, A V = U B; the block is
      // p x (p+1) when the range was exhausted with a trailing beta
      const int ncols = static_cast<int>(vs.size());
      Dense b(dim, ncols);
      for (int i = 0; i < dim; ++i) {
        b(i, i) = alphas[i];
        if (i + 1 < ncols && i < static_cast<int>(betas.size())) b(i, i + 1) = betas[i];
      }
      DenseSvd bs = jacobi_svd(b);

      // assemble candidate triples and test residuals directly
      std::vector<SingularTriple> cand;
      bool all_ok = true;
      const double sigma1 = bs.sigma[0];
      const double floor_abs = 1e-13 * alphas[0];  // rounding floor of the recursion
      const int kk = std::min(k, dim);
      for (int i = 0; i < kk; ++i) {
        SingularTriple t;
        t.sigma = bs.sigma[i];
        t.u = Dense(m, 1);
        t.v = Dense(n, 1);
        for (int r2 = 0; r2 < dim; ++r2) axpy(bs.u(r2, i), us[r2], t.u);
        for (int r2 = 0; r2 < ncols; ++r2) axpy(bs.v(r2, i), vs[r2], t.v);
        const double un = fnorm(t.u), vn = fnorm(t.v);
        if (un > 0) t.u *= 1.0 / un;
        if (vn > 0) t.v *= 1.0 / vn;
        Dense rv = a.apply(t.v);
        axpy(-t.sigma, t.u, rv);
        Dense ru = a.adjoint(t.u);
        axpy(-t.sigma, t.v, ru);
        const double res = std::max(fnorm(rv), fnorm(ru));
        if (res > tol * std::max(sigma1, 1e-300) + floor_abs) all_ok = false;
        cand.push_back(std::move(t));
      }
      if (kk < k && (breakdown || dim >= std::min(m, n))) {
        // rank-deficient operator: pad with zero-sigma complements
        auto complement = [](const std::vector<SingularTriple>& found, int len, bool left,
                             int idx) {
          Dense w(len, 1);
          w[idx % len] = 1.0;
          for (int pass = 0; pass < 2; ++pass)
            for (const auto& t : found) {
              const Dense& q = left ? t.u : t.v;
              axpy(-dot(q, w), q, w);
            }
          const double nw = fnorm(w);
          if (nw > 1e-12) w *= 1.0 / nw;
          else w[idx % len] = 1.0;
          return w;
        };
        for (int i = kk; i < k; ++i) {
          SingularTriple t;
          t.sigma = 0.0;
          t.u = complement(cand, m, true, i);
          t.v = complement(cand, n, false, i);
          cand.push_back(std::move(t));
        }
        return cand;
      }
      if (kk == k) {
        if (all_ok) return cand;
        // a spanned invariant subspace is an exact factorization
        if (breakdown || dim >= std::min(m, n)) return cand;
      }
      if (dim == max_steps || j == max_steps)
        throw NonConvergence("top_singular_triples: residual tolerance not met", j);
    }
  }
  throw NonConvergence("top_singular_triples: max_iter reached", max_steps);
}

std::vector<SingularTriple> top_singular_triples(const Dense& a, int k, double tol,
                                                 int max_iter, uint64_t seed) {
  if (std::min(a.rows(), a.cols()) <= kDenseCutoff) {
    if (k < 1 || k > std::min(a.rows(), a.cols()))
      throw ShapeMismatch("top_singular_triples: bad k");
    return dense_top_triples(a, k);
  }
  return top_singular_triples(dense_linop(a), k, tol, max_iter, seed);
}

// --- symmetric top eigenpair -----------------------------------------------

std::pair<double, Dense> sym_eig_top(const Dense& s_in, double tol, int max_iter,
                                     uint64_t seed) {
  if (!s_in.shape().is_square()) throw ShapeMismatch("sym_eig_top: not square");
  const double scale = inf_norm(s_in);
  if (max_abs_asymmetry(s_in) > 1e-12 * std::max(1.0, scale))
    throw NotSymmetric("sym_eig_top: input not symmetric");
  const Dense s = symmetrized(s_in);
  const int n = s.rows();

  if (scale == 0.0) {
    Dense u(n, 1);
    u[0] = 1.0;
    return {0.0, u};
  }

  if (n <= kDenseCutoff) {
    auto [vals, vecs] = jacobi_eig_sym(s);
    Dense u(n, 1);
    for (int i = 0; i < n; ++i) u[i] = vecs(i, 0);
    return {vals[0], u};
  }

  // Lanczos tridiagonalization with full reorthogonalization.
  Rng rng(seed);
  Dense q = rng.normal_dense(Shape{n, 1});
  q *= 1.0 / fnorm(q);
  std::vector<Dense> qs{q};
  std::vector<double> alphas, betas;

  for (int j = 0; j < std::min(max_iter, n); ++j) {
    Dense w = matvec(s, qs.back());
    const double alpha = dot(qs.back(), w);
    alphas.push_back(alpha);
    axpy(-alpha, qs.back(), w);
    if (j > 0) axpy(-betas.back(), qs[qs.size() - 2], w);
    reorthogonalize(qs, w);
    const double beta = fnorm(w);

    const int dim = static_cast<int>(alphas.size());
    if (dim >= 2 || beta <= 1e-14 * scale || j == std::min(max_iter, n) - 1) {
      Dense t(dim, dim);
      for (int i = 0; i < dim; ++i) {
        t(i, i) = alphas[i];
        if (i + 1 < dim) {
          t(i, i + 1) = betas[i];
          t(i + 1, i) = betas[i];
        }
      }
      auto [vals, vecs] = jacobi_eig_sym(t);
      Dense u(n, 1);
      for (int r2 = 0; r2 < dim; ++r2) axpy(vecs(r2, 0), qs[r2], u);
      u *= 1.0 / fnorm(u);
      Dense res = matvec(s, u);
      axpy(-vals[0], u, res);
      if (fnorm(res) <= tol * scale || beta <= 1e-14 * scale) return {vals[0], u};
      if (j == std::min(max_iter, n) - 1)
        throw NonConvergence("sym_eig_top: tolerance not met", j + 1);
    }
    if (beta <= 1e-14 * scale) break;
    w *= 1.0 / beta;
    betas.push_back(beta);
    qs.push_back(w);
  }
  throw NonConvergence("sym_eig_top: max_iter reached", max_iter);
}

std::pair<double, Dense> gen_eig_max(const Dense& z, const Dense& v, const Dense& lambda) {
  const int r = v.cols();
  if (lambda.size() != r) throw ShapeMismatch("gen_eig_max: lambda length mismatch");
  for (int i = 0; i < r; ++i)
    if (lambda[i] <= 0) throw NonPositiveWeight("gen_eig_max: nonpositive weight");
  // orthonormality of V's columns
  for (int i = 0; i < r; ++i)
    for (int j = i; j < r; ++j) {
      double s = 0.0;
      for (int k = 0; k < v.rows(); ++k) s += v(k, i) * v(k, j);
      if (std::abs(s - (i == j ? 1.0 : 0.0)) > 1e-8)
        throw NotOrthonormal("gen_eig_max: V columns not orthonormal");
    }

  // C = Lambda^{-1/2} V^T Z V Lambda^{-1/2}
  Dense zv = matmul(z, v);
  Dense c = matmul(transpose(v), zv);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j) c(i, j) /= std::sqrt(lambda[i] * lambda[j]);
  c = symmetrized(c);
  auto [lmax, w] = sym_eig_top(c);
  Dense p(r, 1);
  for (int i = 0; i < r; ++i) p[i] = w[i] / std::sqrt(lambda[i]);
  return {lmax, p};
}

// --- DCT ---------------------------------------------------------------

namespace {

struct DctTables {
  // per recursion level: half-length cosine factors 2*cos(pi*(2i+1)/(2n))
  std::vector<std::vector<double>> levels;
};

const DctTables& dct_tables(int n) {
  static std::mutex mu;
  static std::map<int, DctTables> cache;
  std::scoped_lock lock(mu);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  DctTables t;
  for (int len = n; len >= 2; len /= 2) {
    std::vector<double> cs(len / 2);
    for (int i = 0; i < len / 2; ++i)
      cs[i] = 2.0 * std::cos(kPi * (2.0 * i + 1.0) / (2.0 * len));
    t.levels.push_back(std::move(cs));
  }
  return cache.emplace(n, std::move(t)).first->second;
}

// Unnormalized DCT-II, y_k = sum_j x_j cos(pi (2j+1) k / (2n)), recursive.
void dct2_unnormalized(double* x, double* tmp, int n, const DctTables& tables, int level) {
  if (n == 1) return;
  const int h = n / 2;
  const auto& cs = tables.levels[level];
  for (int i = 0; i < h; ++i) {
    tmp[i] = x[i] + x[n - 1 - i];
    tmp[h + i] = (x[i] - x[n - 1 - i]) / cs[i];
  }
  dct2_unnormalized(tmp, x, h, tables, level + 1);
  dct2_unnormalized(tmp + h, x, h, tables, level + 1);
  for (int i = 0; i < h; ++i) {
    x[2 * i] = tmp[i];
    x[2 * i + 1] = tmp[h + i] + (i + 1 < h ? tmp[h + i + 1] : 0.0);
  }
}

// Inverse of dct2_unnormalized (exactly reverses its steps).
void idct2_unnormalized(double* y, double* tmp, int n, const DctTables& tables, int level) {
  if (n == 1) return;
  const int h = n / 2;
  const auto& cs = tables.levels[level];
  // recover the two half-transforms
  for (int i = 0; i < h; ++i) tmp[i] = y[2 * i];
  tmp[h + (h - 1)] = y[n - 1];
  for (int i = h - 2; i >= 0; --i) tmp[h + i] = y[2 * i + 1] - tmp[h + i + 1];
  idct2_unnormalized(tmp, y, h, tables, level + 1);
  idct2_unnormalized(tmp + h, y, h, tables, level + 1);
  for (int i = 0; i < h; ++i) {
    const double s = tmp[i];
    const double d = tmp[h + i] * cs[i];
    y[i] = 0.5 * (s + d);
    y[n - 1 - i] = 0.5 * (s - d);
  }
}

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

}  // namespace

Dense dct_apply(const Dense& x, DctDirection direction) {
  const int n = x.size();
  if (n == 0) return x;
  const double s0 = std::sqrt(1.0 / n);
  const double sk = std::sqrt(2.0 / n);
  Dense out(x.shape());

  if (is_pow2(n)) {
    const auto& tables = dct_tables(n);
    std::vector<double> buf(x.values().begin(), x.values().end());
    std::vector<double> tmp(n);
    if (direction == DctDirection::forward) {
      dct2_unnormalized(buf.data(), tmp.data(), n, tables, 0);
      out[0] = buf[0] * s0;
      for (int k = 1; k < n; ++k) out[k] = buf[k] * sk;
    } else {
      buf[0] = x[0] / s0;
      for (int k = 1; k < n; ++k) buf[k] = x[k] / sk;
      idct2_unnormalized(buf.data(), tmp.data(), n, tables, 0);
      for (int k = 0; k < n; ++k) out[k] = buf[k];
    }
    return out;
  }

  if (direction == DctDirection::forward) {
    for (int k = 0; k < n; ++k) {
      double s = 0.0;
      for (int j = 0; j < n; ++j) s += x[j] * std::cos(kPi * (2.0 * j + 1.0) * k / (2.0 * n));
      out[k] = s * (k == 0 ? s0 : sk);
    }
  } else {
    for (int j = 0; j < n; ++j) {
      double s = x[0] * s0;
      for (int k = 1; k < n; ++k)
        s += x[k] * sk * std::cos(kPi * (2.0 * j + 1.0) * k / (2.0 * n));
      out[j] = s;
    }
  }
  return out;
}

// --- projections ----------------------------------------------------------

Dense project_simplex(const Dense& v, double tau) {
  const int n = v.size();
  std::vector<double> u(v.values().begin(), v.values().end());
  std::sort(u.begin(), u.end(), std::greater<double>());
  double css = 0.0, theta = 0.0;
  int rho = 0;
  for (int i = 0; i < n; ++i) {
    css += u[i];
    const double t = (css - tau) / (i + 1);
    if (u[i] - t > 0) {
      rho = i + 1;
      theta = t;
    }
  }
  if (rho == 0) theta = (css - tau) / n;
  Dense out(v.shape());
  for (int i = 0; i < n; ++i) out[i] = std::max(0.0, v[i] - theta);
  return out;
}

Dense project_simplex_cap(const Dense& v, double tau) {
  Dense clamped(v.shape());
  double s = 0.0;
  for (int i = 0; i < v.size(); ++i) {
    clamped[i] = std::max(0.0, v[i]);
    s += clamped[i];
  }
  if (s <= tau) return clamped;
  return project_simplex(v, tau);
}

Dense project_l1_ball(const Dense& x, double tau) {
  if (one_norm(x) <= tau) return x;
  Dense a(x.shape());
  for (int i = 0; i < x.size(); ++i) a[i] = std::abs(x[i]);
  Dense p = project_simplex(a, tau);
  Dense out(x.shape());
  for (int i = 0; i < x.size(); ++i) out[i] = x[i] >= 0 ? p[i] : -p[i];
  return out;
}

Dense project_trace_capped_psd(const Dense& s, double tau) {
  if (tau <= 0) throw ShapeMismatch("project_trace_capped_psd: tau must be positive");
  if (!s.shape().is_square()) throw ShapeMismatch("project_trace_capped_psd: not square");
  if (max_abs_asymmetry(s) > 1e-12 * std::max(1.0, inf_norm(s)))
    throw NotSymmetric("project_trace_capped_psd: input not symmetric");
  auto [vals, vecs] = jacobi_eig_sym(s);
  Dense lam = project_simplex_cap(vals, tau);
  const int n = s.rows();
  Dense out(n, n);
  for (int k = 0; k < n; ++k) {
    if (lam[k] == 0.0) continue;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) out(i, j) += lam[k] * vecs(i, k) * vecs(j, k);
  }
  return symmetrized(out);
}

}  // namespace atomkit
