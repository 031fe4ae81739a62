// atomkit command-line interface: gauges, alignment checks, solvers,
// benchmarks, demixing, and the property self-test suite.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "atomkit/apps.hpp"
#include "atomkit/atomic_sets.hpp"
#include "atomkit/errors.hpp"
#include "atomkit/recipe.hpp"
#include "atomkit/rng.hpp"
#include "atomkit/selftest.hpp"
#include "atomkit/set_calculus.hpp"
#include "atomkit/solvers.hpp"

namespace {

using namespace atomkit;

std::string num17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

uint64_t default_seed() {
  if (const char* env = std::getenv("ATOMKIT_SEED")) return std::strtoull(env, nullptr, 10);
  return 0;
}

AtomicSetPtr load_set(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ShapeMismatch("cannot open recipe " + path);
  nlohmann::json j;
  f >> j;
  return descriptor_from_recipe(j);
}

void emit(const std::string& s, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << s;
    return;
  }
  std::ofstream f(out_path);
  if (!f) throw ShapeMismatch("cannot open output " + out_path);
  f << s;
}

struct LassoInstance {
  Dense a;   // 10 x 20
  Dense b;   // 10
  Dense x0;  // planted 2-sparse
  double tau = 0.0;
};

LassoInstance make_lasso(uint64_t seed) {
  Rng rng(seed);
  LassoInstance inst;
  inst.a = rng.normal_dense(Shape{10, 20});
  inst.x0 = Dense(20, 1);
  const int i = rng.index(20);
  int j = rng.index(20);
  while (j == i) j = rng.index(20);
  inst.x0[i] = 1.0 + rng.uniform();
  inst.x0[j] = -(1.0 + rng.uniform());
  inst.b = matvec(inst.a, inst.x0);
  inst.tau = 0.35 * one_norm(inst.x0);
  return inst;
}

int cmd_eval(const std::string& which, const std::string& set_path,
             const std::string& input_path, int k, double tol) {
  AtomicSetPtr set = load_set(set_path);
  Dense x = dense_from_csv_file(input_path).reshaped(set->shape());
  std::ostringstream os;
  if (which == "gauge") {
    os << "{\"gauge\": " << num17(set->gauge(x)) << "}\n";
  } else if (which == "support") {
    os << "{\"support\": " << num17(set->support(x)) << "}\n";
  } else {
    ExposedFace f = set->expose(x, k, tol);
    os << "{\"support\": " << num17(f.support_value) << ", \"atoms\": [";
    for (size_t i = 0; i < f.atoms.size(); ++i) {
      os << (i ? ", " : "") << "{\"tag\": \"" << f.atoms[i].tag.label() << "\", \"element\": [";
      auto vals = f.atoms[i].element.values();
      for (size_t v = 0; v < vals.size(); ++v) os << (v ? ", " : "") << num17(vals[v]);
      os << "]}";
    }
    os << "]}\n";
  }
  std::cout << os.str();
  return 0;
}

int cmd_align(const std::string& set_path, const std::string& x_path,
              const std::string& z_path, double tol) {
  AtomicSetPtr set = load_set(set_path);
  Dense x = dense_from_csv_file(x_path).reshaped(set->shape());
  Dense z = dense_from_csv_file(z_path).reshaped(set->shape());
  const double resid = alignment_residual(*set, x, z);
  const double g = set->gauge(x);
  const double s = set->support(z);
  const double scale = 1.0 + (std::isinf(g * s) ? 0.0 : std::abs(g * s));
  std::cout << "{\"residual\": " << num17(resid) << ", \"aligned\": "
            << (resid <= tol * scale ? "true" : "false") << "}\n";
  return 0;
}

int cmd_solve(const std::string& problem, const std::string& solver, double tau,
              double eps, int iters, uint64_t seed, const std::string& set_path,
              const std::string& a_path, const std::string& b_path, int m, int n,
              const std::string& trace_path) {
  CGOptions opts;
  opts.eps = eps;
  opts.max_iter = iters;

  LinearOperator op;
  Dense rhs;
  AtomicSetPtr set;
  if (problem == "lasso") {
    LassoInstance inst = make_lasso(seed);
    op = dense_matrix_operator(inst.a);
    rhs = inst.b;
    set = signed_basis(20);
    opts.tau = tau > 0 ? tau : inst.tau;
  } else if (problem == "matcomp") {
    MatCompInstance inst = gen_matcomp_instance(m, n, 0.10, 0.1, seed);
    op = mask_operator(inst.omega);
    rhs = inst.b.values_vector();
    set = nuclear_ball(m, n);
    opts.tau = tau > 0 ? tau : matcomp_planted_nuclear_norm(inst);
  } else {
    set = load_set(set_path);
    Dense a = dense_from_csv_file(a_path);
    op = dense_matrix_operator(a);
    rhs = dense_from_csv_file(b_path).reshaped(Shape{a.rows(), 1});
    if (tau <= 0) throw ShapeMismatch("solve --problem custom requires --tau");
    opts.tau = tau;
  }

  std::ostringstream os;
  CGTrace trace;
  if (solver == "primal") {
    SmoothObjective obj = least_squares_objective(op, rhs);
    PrimalResult res = primal_cg(obj, *set, opts);
    trace = res.trace;
    Dense z = -1.0 * obj.gradient(res.x);
    os << "{\"objective\": " << num17(obj.value(res.x))
       << ", \"gauge\": " << num17(set->gauge(res.x))
       << ", \"gap\": " << num17(duality_gap(*set, res.x, z, opts.tau))
       << ", \"iterations\": " << trace.iterations
       << ", \"converged\": " << (trace.converged ? "true" : "false") << "}\n";
  } else {
    DualResult res = dual_cg_least_squares(op, rhs, *set, opts);
    trace = res.trace;
    os << "{\"objective\": " << num17(0.5 * dot(res.residual, res.residual))
       << ", \"support_value\": " << num17(res.certificate.support_value)
       << ", \"gap_at_exit\": " << num17(res.certificate.gap_at_exit)
       << ", \"iterations\": " << trace.iterations
       << ", \"converged\": " << (trace.converged ? "true" : "false") << "}\n";
  }
  std::cout << os.str();
  if (!trace_path.empty()) emit(trace_to_csv(trace), trace_path);
  return 0;
}

int cmd_bench(const std::vector<int>& sizes, int iters, int ell, uint64_t seed,
              bool no_time, int jobs, const std::string& out_path) {
  auto rows = run_matcomp_benchmark(sizes, iters, ell, seed, jobs);
  emit(benchrows_to_csv(rows, !no_time), out_path);
  return 0;
}

int cmd_demix(int size, double tau, int iters, uint64_t seed, const std::string& out_dir) {
  DemixInstance inst = gen_demix_instance(size, 0.02, 2, 0.02, seed);
  DemixResult res = run_mca_demix(inst, tau, iters);
  std::cout << demix_metrics_json(res);
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    write_pgm(out_dir + "/observation.pgm", inst.b);
    write_pgm(out_dir + "/sparse.pgm", res.components[0]);
    write_pgm(out_dir + "/lowrank.pgm", res.components[1]);
    write_pgm(out_dir + "/cosine.pgm", res.components[2]);
    Dense model = res.components[0] + res.components[1] + res.components[2];
    write_pgm(out_dir + "/reconstruction.pgm", model);
    std::ofstream metrics(out_dir + "/metrics.json");
    metrics << demix_metrics_json(res);
  }
  return 0;
}

int cmd_selftest(const std::string& filter, uint64_t seed) {
  auto results = run_selftest(filter, seed);
  int failures = 0;
  for (const auto& r : results) {
    std::cout << (r.failures == 0 ? "[pass] " : "[FAIL] ") << r.name << ": "
              << (r.checks - r.failures) << "/" << r.checks << " checks\n";
    failures += r.failures;
  }
  std::cout << (failures == 0 ? "selftest passed\n" : "selftest FAILED\n");
  return failures == 0 ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"atomkit: atomic sets, gauges, alignment, and conditional-gradient solvers"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags like --seed may follow the subcommand

  uint64_t seed = default_seed();
  app.add_option("--seed", seed, "seed for all randomness (env ATOMKIT_SEED)");

  std::string set_path, input_path, x_path, z_path, out_path;
  double tol = 1e-9;
  int expose_k = 4;

  auto* gauge_cmd = app.add_subcommand("gauge", "evaluate a gauge");
  gauge_cmd->add_option("--set", set_path, "descriptor recipe (json)")->required();
  gauge_cmd->add_option("--input", input_path, "element (csv)")->required();

  auto* support_cmd = app.add_subcommand("support", "evaluate a support function");
  support_cmd->add_option("--set", set_path, "descriptor recipe (json)")->required();
  support_cmd->add_option("--input", input_path, "element (csv)")->required();

  auto* expose_cmd = app.add_subcommand("expose", "atoms exposed by a direction");
  expose_cmd->add_option("--set", set_path, "descriptor recipe (json)")->required();
  expose_cmd->add_option("--input", input_path, "direction (csv)")->required();
  expose_cmd->add_option("--k", expose_k, "max atoms");
  expose_cmd->add_option("--tol", tol, "face tolerance");

  auto* align_cmd = app.add_subcommand("align", "alignment residual of a pair");
  align_cmd->add_option("--set", set_path, "descriptor recipe (json)")->required();
  align_cmd->add_option("--x", x_path, "primal element (csv)")->required();
  align_cmd->add_option("--z", z_path, "dual element (csv)")->required();
  align_cmd->add_option("--tol", tol, "alignment tolerance");

  std::string problem = "lasso", solver = "primal", a_path, b_path, trace_path;
  double tau = -1.0, eps = -1.0;
  int iters = 500, bench_iters = 10, ell = 4, m = 100, n = 100;

  auto* solve_cmd = app.add_subcommand("solve", "run a conditional-gradient solver");
  solve_cmd->add_option("--problem", problem, "lasso|matcomp|custom")
      ->check(CLI::IsMember({"lasso", "matcomp", "custom"}));
  solve_cmd->add_option("--solver", solver, "primal|dual")
      ->check(CLI::IsMember({"primal", "dual"}));
  solve_cmd->add_option("--tau", tau, "gauge bound");
  solve_cmd->add_option("--eps", eps, "stopping tolerance");
  solve_cmd->add_option("--iters", iters, "iteration budget");
  solve_cmd->add_option("--set", set_path, "descriptor recipe (custom problem)");
  solve_cmd->add_option("--a", a_path, "matrix csv (custom problem)");
  solve_cmd->add_option("--b", b_path, "rhs csv (custom problem)");
  solve_cmd->add_option("--m", m, "rows (matcomp)");
  solve_cmd->add_option("--n", n, "cols (matcomp)");
  solve_cmd->add_option("--trace", trace_path, "write the iteration trace csv here");

  std::vector<int> sizes{100};
  bool no_time = false;
  int jobs = 1;
  auto* bench_cmd = app.add_subcommand("bench", "benchmarks");
  auto* bench_matcomp = bench_cmd->add_subcommand("matcomp", "matrix-completion benchmark");
  bench_matcomp->add_option("--sizes", sizes, "problem sizes")->delimiter(',');
  bench_matcomp->add_option("--iters", bench_iters, "iterations per solve");
  bench_matcomp->add_option("--ell", ell, "recovery subspace dimension");
  bench_matcomp->add_flag("--no-time", no_time, "omit timing columns");
  bench_matcomp->add_option("--jobs", jobs, "solve sizes on this many threads");
  bench_matcomp->add_option("--out", out_path, "write csv here (default stdout)");

  int demix_size = 64;
  double demix_tau = -1.0;
  int demix_iters = 30;
  std::string demix_out;
  auto* demix_cmd = app.add_subcommand("demix", "two-stage signal demixing");
  demix_cmd->add_option("--size", demix_size, "image side length");
  demix_cmd->add_option("--tau", demix_tau, "gauge budget (default from instance)");
  demix_cmd->add_option("--iters", demix_iters, "stage-1 iterations");
  demix_cmd->add_option("--out", demix_out, "directory for pgm images and metrics");

  std::string filter;
  auto* selftest_cmd = app.add_subcommand("selftest", "run the property self-tests");
  selftest_cmd->add_option("--filter", filter, "keep suites whose name contains this");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 1;
  }

  try {
    if (*gauge_cmd) return cmd_eval("gauge", set_path, input_path, expose_k, tol);
    if (*support_cmd) return cmd_eval("support", set_path, input_path, expose_k, tol);
    if (*expose_cmd) return cmd_eval("expose", set_path, input_path, expose_k, tol);
    if (*align_cmd) return cmd_align(set_path, x_path, z_path, tol);
    if (*solve_cmd)
      return cmd_solve(problem, solver, tau, eps, iters, seed, set_path, a_path, b_path, m, n,
                       trace_path);
    if (*bench_matcomp) return cmd_bench(sizes, bench_iters, ell, seed, no_time, jobs, out_path);
    if (*demix_cmd) return cmd_demix(demix_size, demix_tau, demix_iters, seed, demix_out);
    if (*selftest_cmd) return cmd_selftest(filter, seed);
  } catch (const Error& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
