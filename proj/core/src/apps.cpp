#include "atomkit/apps.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

#include "atomkit/atomic_sets.hpp"
#include "atomkit/errors.hpp"
#include "atomkit/rng.hpp"
#include "atomkit/set_calculus.hpp"

namespace atomkit {

namespace {

double now_seconds() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

// --- matrix completion ---------------------------------------------------------

MatCompInstance gen_matcomp_instance(int m, int n, double density, double noise,
                                     uint64_t seed) {
  if (m < 10 || n < 10) throw ShapeMismatch("gen_matcomp_instance: m, n must be >= 10");
  if (density <= 0.0 || density > 1.0)
    throw BadDensity("gen_matcomp_instance: density outside (0, 1]");
  MatCompInstance inst;
  inst.m = m;
  inst.n = n;
  inst.true_rank = std::max(1, static_cast<int>(std::lround(m / 100.0)));
  inst.density = density;
  inst.noise_scale = noise;
  inst.seed = seed;

  Rng rng(seed);
  Dense u = rng.normal_dense(Shape{m, inst.true_rank});
  Dense v = rng.normal_dense(Shape{n, inst.true_rank});
  Dense noise_mat = rng.normal_dense(Shape{m, n});

  const int nnz = std::max(1, static_cast<int>(std::lround(density * m * n)));
  std::vector<int> cells = rng.sample_without_replacement(m * n, nnz);

  std::vector<MaskedEntry> mask_entries, value_entries;
  mask_entries.reserve(cells.size());
  value_entries.reserve(cells.size());
  for (int cell : cells) {
    const int i = cell / n;
    const int j = cell % n;
    double signal = 0.0;
    for (int r = 0; r < inst.true_rank; ++r) signal += u(i, r) * v(j, r);
    mask_entries.push_back({i, j, 1.0});
    value_entries.push_back({i, j, signal + noise * noise_mat(i, j)});
  }
  inst.omega = MaskedMatrix(Shape{m, n}, std::move(mask_entries));
  inst.b = MaskedMatrix(Shape{m, n}, std::move(value_entries));
  return inst;
}

std::pair<Dense, Dense> matcomp_planted_factors(const MatCompInstance& inst) {
  Rng rng(inst.seed);
  Dense u = rng.normal_dense(Shape{inst.m, inst.true_rank});
  Dense v = rng.normal_dense(Shape{inst.n, inst.true_rank});
  return {u, v};
}

double matcomp_planted_nuclear_norm(const MatCompInstance& inst) {
  auto [u, v] = matcomp_planted_factors(inst);
  const int r = inst.true_rank;
  Dense gu = matmul(transpose(u), u);
  Dense gv = matmul(transpose(v), v);
  // singular values of U V^T are sqrt of eig(Gu^{1/2} Gv Gu^{1/2})
  auto [du, qu] = jacobi_eig_sym(symmetrized(gu));
  Dense half(r, r);
  for (int k = 0; k < r; ++k) {
    const double s = std::sqrt(std::max(0.0, du[k]));
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < r; ++j) half(i, j) += s * qu(i, k) * qu(j, k);
  }
  Dense c = symmetrized(matmul(half, matmul(gv, half)));
  auto [vals, vecs] = jacobi_eig_sym(c);
  (void)vecs;
  double nn = 0.0;
  for (int i = 0; i < r; ++i) nn += std::sqrt(std::max(0.0, vals[i]));
  return nn;
}

int estimate_rank_90_sigma(const Dense& sigma) {
  double total = 0.0;
  for (int i = 0; i < sigma.size(); ++i) total += sigma[i] * sigma[i];
  if (total == 0.0) throw ZeroMatrix("estimate_rank_90: zero input");
  const double target = 0.9 * std::sqrt(total);
  double acc = 0.0;
  for (int k = 0; k < sigma.size(); ++k) {
    acc += sigma[k] * sigma[k];
    if (std::sqrt(acc) >= target) return k + 1;
  }
  return sigma.size();
}

int estimate_rank_90(const Dense& x) {
  if (fnorm(x) == 0.0) throw ZeroMatrix("estimate_rank_90: zero input");
  DenseSvd svd = jacobi_svd(x);
  return estimate_rank_90_sigma(svd.sigma);
}

namespace {
BenchRow bench_one_size(int size, int iters, int ell, uint64_t seed);
}  // namespace

std::vector<BenchRow> run_matcomp_benchmark(const std::vector<int>& sizes, int iters,
                                            int ell, uint64_t seed, int jobs) {
  std::vector<BenchRow> rows(sizes.size());
  std::atomic<size_t> next{0};
  auto worker = [&]() {
    for (size_t idx = next.fetch_add(1); idx < sizes.size(); idx = next.fetch_add(1))
      rows[idx] = bench_one_size(sizes[idx], iters, ell, seed);
  };
  const int nthreads = std::max(1, std::min<int>(jobs, static_cast<int>(sizes.size())));
  if (nthreads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return rows;
}

namespace {

BenchRow bench_one_size(int size, int iters, int ell, uint64_t seed) {
  MatCompInstance inst = gen_matcomp_instance(size, size, 0.10, 0.1, seed);
  const double tau = matcomp_planted_nuclear_norm(inst);
  const Dense bvals = inst.b.values_vector();
  LinearOperator mask_op = mask_operator(inst.omega);
  AtomicSetPtr ball = nuclear_ball(size, size);

  BenchRow row;
  row.size = size;
  if (iters == 0) {
    row.residual_primal = row.residual_dual = inst.b.fnorm();
    return row;
  }

  CGOptions opts;
  opts.tau = tau;
  opts.eps = 0.0;  // run the full iteration budget
  opts.max_iter = iters;
  opts.step_rule = StepRule::exact;

  SmoothObjective obj = least_squares_objective(mask_op, bvals);
  double t0 = now_seconds();
  PrimalResult primal = primal_cg(obj, *ball, opts);
  row.time_primal_s = now_seconds() - t0;
  row.residual_primal = fnorm(inst.omega.sample(primal.x) - bvals);
  row.rank_primal = estimate_rank_90(primal.x);

  t0 = now_seconds();
  DualResult dual = dual_cg_least_squares(mask_op, bvals, *ball, opts);
  // the loop residual belongs to the implicit dual iterate; the recovery
  // provides the rank estimate of the returned factorization
  Dense z = dual.certificate.z_star;
  const int d = std::min(ell, size);
  auto triples = top_singular_triples(z, d, 1e-10, 1000, 7);
  Dense u(size, d), v(size, d);
  for (int j = 0; j < d; ++j)
    for (int i = 0; i < size; ++i) {
      u(i, j) = triples[j].u[i];
      v(i, j) = triples[j].v[i];
    }
  Dense s = psd_reduced_solve(u, v, inst.b, tau);
  row.time_dual_s = now_seconds() - t0;
  row.residual_dual = fnorm(dual.residual);
  auto [svals, svecs] = jacobi_eig_sym(symmetrized(s));
  (void)svecs;
  Dense sig(d, 1);
  for (int i = 0; i < d; ++i) sig[i] = std::max(0.0, svals[i]);
  row.rank_dual = fnorm(sig) > 0 ? estimate_rank_90_sigma(sig) : 0;
  return row;
}

}  // namespace

std::string benchrows_to_csv(const std::vector<BenchRow>& rows, bool include_time) {
  std::ostringstream os;
  if (include_time)
    os << "size,residual_primal,rank_primal,time_primal_s,residual_dual,rank_dual,time_dual_s\n";
  else
    os << "size,residual_primal,rank_primal,residual_dual,rank_dual\n";
  for (const auto& r : rows) {
    os << r.size << "," << fmt17(r.residual_primal) << "," << r.rank_primal;
    if (include_time) os << "," << fmt17(r.time_primal_s);
    os << "," << fmt17(r.residual_dual) << "," << r.rank_dual;
    if (include_time) os << "," << fmt17(r.time_dual_s);
    os << "\n";
  }
  return os.str();
}

// --- demixing ------------------------------------------------------------------

namespace {

Dense blocky_sign_vector(int size, int block, int offset) {
  Dense v(size, 1);
  for (int i = 0; i < size; ++i) v[i] = (((i + offset) / block) % 2 == 0) ? 1.0 : -1.0;
  return v;
}

void scale_to_unit_fnorm(Dense& x) {
  const double n = fnorm(x);
  if (n > 0) x *= 1.0 / n;
}

DemixInstance draw_demix(int size, double sparse_frac, int rank, double dct_frac,
                         uint64_t seed) {
  DemixInstance inst;
  inst.size = size;
  inst.seed = seed;
  inst.sparse_frac = sparse_frac;
  inst.dct_frac = dct_frac;
  inst.rank = rank;
  Rng rng(seed);
  const Shape img{size, size};

  inst.x_lowrank = Dense(img);
  for (int k = 0; k < rank; ++k) {
    const int block = std::max(1, size / (4 + 2 * k));
    Dense u = blocky_sign_vector(size, block, rng.index(size));
    Dense v = blocky_sign_vector(size, block, rng.index(size));
    inst.x_lowrank += outer(u, v);
  }
  scale_to_unit_fnorm(inst.x_lowrank);

  inst.x_sparse = Dense(img);
  const int n_spikes = static_cast<int>(std::lround(sparse_frac * size * size));
  if (n_spikes > 0) {
    auto cells = rng.sample_without_replacement(size * size, n_spikes);
    for (int cell : cells) inst.x_sparse[cell] = rng.normal();
    scale_to_unit_fnorm(inst.x_sparse);
  }

  inst.x_dct = Dense(img);
  const int n_coef = static_cast<int>(std::lround(dct_frac * size * size));
  if (n_coef > 0) {
    Dense coef(size * size, 1);
    auto cells = rng.sample_without_replacement(size * size, n_coef);
    for (int cell : cells) coef[cell] = rng.normal();
    inst.x_dct = dct_apply(coef, DctDirection::inverse).reshaped(img);
    scale_to_unit_fnorm(inst.x_dct);
  }

  inst.b = inst.x_sparse + inst.x_lowrank + inst.x_dct;
  return inst;
}

double max_pairwise_coherence(const DemixInstance& inst) {
  std::vector<const Dense*> parts;
  if (fnorm(inst.x_sparse) > 0) parts.push_back(&inst.x_sparse);
  if (fnorm(inst.x_lowrank) > 0) parts.push_back(&inst.x_lowrank);
  if (fnorm(inst.x_dct) > 0) parts.push_back(&inst.x_dct);
  double worst = 0.0;
  for (size_t i = 0; i < parts.size(); ++i)
    for (size_t j = i + 1; j < parts.size(); ++j) {
      const double c = std::abs(dot(*parts[i], *parts[j])) /
                       (fnorm(*parts[i]) * fnorm(*parts[j]));
      worst = std::max(worst, c);
    }
  return worst;
}

}  // namespace

DemixInstance gen_demix_instance(int size, double sparse_frac, int rank, double dct_frac,
                                 uint64_t seed) {
  if (sparse_frac < 0.0 || sparse_frac > 0.2 || dct_frac < 0.0 || dct_frac > 0.2)
    throw BadFraction("gen_demix_instance: fractions outside [0, 0.2]");
  if (rank < 0 || rank > size / 4)
    throw BadFraction("gen_demix_instance: rank outside [0, size/4]");

  // redraw until the planted components are incoherent enough
  for (int attempt = 0; attempt < 32; ++attempt) {
    DemixInstance inst = draw_demix(size, sparse_frac, rank, dct_frac, seed + attempt);
    if (max_pairwise_coherence(inst) <= 0.5) return inst;
  }
  throw NumericFailure("gen_demix_instance: could not plant incoherent components");
}

DemixResult run_mca_demix(const DemixInstance& inst, double tau, int iters,
                          const RecoverOptions& recover) {
  const int size = inst.size;
  const Shape img{size, size};
  AtomicSetPtr a1 = signed_basis(img);
  AtomicSetPtr a2 = nuclear_ball(size, size);
  AtomicSetPtr a3 =
      transform(signed_basis(img), LinearMap::dct_transpose(size * size), TransformMode::image);
  std::vector<AtomicSetPtr> parts{a1, a2, a3};
  AtomicSetPtr sum = sum_descriptor(parts);

  DemixResult out;
  if (tau <= 0) {
    const double g1 = a1->gauge(inst.x_sparse);
    const double g2 = a2->gauge(inst.x_lowrank);
    const double g3 = a3->gauge(inst.x_dct);
    tau = 1.1 * std::max({g1, g2, g3});
  }
  out.tau = tau;

  CGOptions opts;
  opts.tau = tau;
  opts.eps = -1.0;
  opts.max_iter = iters;
  LinearOperator ident = identity_operator(img);
  DualResult stage1 = dual_cg_least_squares(ident, inst.b, *sum, opts);
  out.trace = stage1.trace;
  out.z_star = stage1.certificate.z_star;
  out.stage1_objective = 0.5 * dot(stage1.residual, stage1.residual);
  out.stage1_gap = std::max(0.0, stage1.certificate.gap_at_exit);

  SmoothObjective obj = least_squares_objective(ident, inst.b);
  out.components = recover_from_certificate(obj, stage1.certificate, parts, tau, recover);

  Dense model(img);
  for (const auto& c : out.components) model += c;
  out.stage2_objective = obj.value(model);

  const Dense* truth[3] = {&inst.x_sparse, &inst.x_lowrank, &inst.x_dct};
  for (int i = 0; i < 3; ++i) {
    Dense diff = out.components[i] - *truth[i];
    const double denom = std::max(fnorm(*truth[i]), 1e-30);
    out.rel_errors.push_back(fnorm(diff) / denom);
    out.alignment_residuals.push_back(
        alignment_residual(*parts[i], out.components[i], out.z_star));
  }
  return out;
}

std::string demix_metrics_json(const DemixResult& r) {
  std::ostringstream os;
  os << "{\n  \"tau\": " << fmt17(r.tau) << ",\n  \"stage1_objective\": "
     << fmt17(r.stage1_objective) << ",\n  \"stage1_gap\": " << fmt17(r.stage1_gap)
     << ",\n  \"stage2_objective\": " << fmt17(r.stage2_objective) << ",\n  \"rel_errors\": [";
  for (size_t i = 0; i < r.rel_errors.size(); ++i)
    os << (i ? ", " : "") << fmt17(r.rel_errors[i]);
  os << "],\n  \"alignment_residuals\": [";
  for (size_t i = 0; i < r.alignment_residuals.size(); ++i)
    os << (i ? ", " : "") << fmt17(r.alignment_residuals[i]);
  os << "]\n}\n";
  return os.str();
}

void write_pgm(const std::string& path, const Dense& image) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw NumericFailure("write_pgm: cannot open " + path);
  double lo = image.size() ? image[0] : 0.0;
  double hi = lo;
  for (int i = 0; i < image.size(); ++i) {
    lo = std::min(lo, image[i]);
    hi = std::max(hi, image[i]);
  }
  const double span = hi - lo;
  f << "P5\n" << image.cols() << " " << image.rows() << "\n255\n";
  for (int i = 0; i < image.size(); ++i) {
    const double t = span > 0 ? (image[i] - lo) / span : 0.5;
    const unsigned char byte = static_cast<unsigned char>(std::lround(255.0 * t));
    f.write(reinterpret_cast<const char*>(&byte), 1);
  }
}

}  // namespace atomkit
