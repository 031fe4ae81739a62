#include "doctest.h"

#include <cmath>

#include "atomkit/errors.hpp"
#include "atomkit/linalg.hpp"
#include "atomkit/rng.hpp"
#include "oracles.hpp"

using namespace atomkit;

TEST_CASE("top_singular_triples on the 2x2 identity") {
  auto triples = top_singular_triples(Dense::identity(2), 1);
  CHECK(triples.size() == 1);
  CHECK(triples[0].sigma == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fnorm(triples[0].u) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fnorm(triples[0].v) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("top_singular_triples on diag(3,1)") {
  Dense a(2, 2);
  a(0, 0) = 3.0;
  a(1, 1) = 1.0;
  auto t = top_singular_triples(a, 1);
  CHECK(t[0].sigma == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(std::abs(t[0].u[0]) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(std::abs(t[0].v[0]) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("top_singular_triples matches the Jacobi oracle on a random 5x4") {
  Rng rng(42);
  Dense a = rng.normal_dense(Shape{5, 4});
  auto triples = top_singular_triples(a, 3, 1e-12);
  Dense sv = oracles::singular_values(a);
  for (int i = 0; i < 3; ++i) {
    CHECK(triples[i].sigma == doctest::Approx(sv[i]).epsilon(1e-8));
    Dense rv = matvec(a, triples[i].v) - triples[i].sigma * triples[i].u;
    Dense ru = matvec_t(a, triples[i].u) - triples[i].sigma * triples[i].v;
    CHECK(fnorm(rv) <= 1e-8 * sv[0]);
    CHECK(fnorm(ru) <= 1e-8 * sv[0]);
  }
  CHECK(triples[0].sigma >= triples[1].sigma);
  CHECK(triples[1].sigma >= triples[2].sigma);
}

TEST_CASE("top_singular_triples iterative path matches the oracle") {
  Rng rng(5);
  Dense a = rng.normal_dense(Shape{40, 35});
  auto triples = top_singular_triples(a, 3, 1e-11, 1000, 9);
  Dense sv = oracles::singular_values(a);
  for (int i = 0; i < 3; ++i)
    CHECK(triples[i].sigma == doctest::Approx(sv[i]).epsilon(1e-8));
}

TEST_CASE("top_singular_triples argument validation") {
  Dense a = Dense::identity(3);
  CHECK_THROWS_AS(top_singular_triples(a, 0), ShapeMismatch);
  CHECK_THROWS_AS(top_singular_triples(a, 4), ShapeMismatch);
}

TEST_CASE("sym_eig_top basics") {
  Dense d(2, 2);
  d(0, 0) = 2.0;
  d(1, 1) = -5.0;
  auto [lmax, u] = sym_eig_top(d);
  CHECK(lmax == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(std::abs(u[0]) == doctest::Approx(1.0).epsilon(1e-10));

  auto [lz, uz] = sym_eig_top(Dense(3, 3));
  CHECK(lz == 0.0);
  CHECK(fnorm(uz) == doctest::Approx(1.0));
}

TEST_CASE("sym_eig_top matches the Jacobi oracle on a random symmetric 6x6") {
  Rng rng(11);
  Dense s = symmetrized(rng.normal_dense(Shape{6, 6}));
  auto [lmax, u] = sym_eig_top(s);
  auto [vals, vecs] = oracles::eig_sym(s);
  (void)vecs;
  CHECK(lmax == doctest::Approx(vals[0]).epsilon(1e-9));
  Dense r = matvec(s, u) - lmax * u;
  CHECK(fnorm(r) <= 1e-9 * (1.0 + std::abs(vals[0])));
}

TEST_CASE("sym_eig_top rejects asymmetric input") {
  Dense s(2, 2);
  s(0, 1) = 1.0;
  CHECK_THROWS_AS(sym_eig_top(s), NotSymmetric);
}

TEST_CASE("gen_eig_max reductions") {
  Rng rng(3);
  // Z = L: the pencil (L, L) has top generalized eigenvalue 1
  Dense v = Dense::identity(3);
  Dense lambda = Dense::vector({0.5, 1.5, 3.0});
  Dense l(3, 3);
  for (int i = 0; i < 3; ++i) l(i, i) = lambda[i];
  auto [one, p] = gen_eig_max(l, v, lambda);
  CHECK(one == doctest::Approx(1.0).epsilon(1e-10));
  double plp = 0.0;
  for (int i = 0; i < 3; ++i) plp += p[i] * p[i] * lambda[i];
  CHECK(plp == doctest::Approx(1.0).epsilon(1e-10));

  // Lambda = I, V = I reduces to sym_eig_top
  Dense z = symmetrized(rng.normal_dense(Shape{3, 3}));
  Dense ones = Dense::vector({1.0, 1.0, 1.0});
  auto [gl, gp] = gen_eig_max(z, Dense::identity(3), ones);
  auto [sl, su] = sym_eig_top(z);
  (void)gp;
  (void)su;
  CHECK(gl == doctest::Approx(sl).epsilon(1e-10));
}

TEST_CASE("gen_eig_max matches the explicit congruence oracle on a random pencil") {
  Rng rng(17);
  auto [vals0, q] = oracles::eig_sym(symmetrized(rng.normal_dense(Shape{5, 5})));
  (void)vals0;
  Dense lambda = Dense::vector({0.3, 0.9, 1.4, 2.2, 5.0});
  Dense z = symmetrized(rng.normal_dense(Shape{5, 5}));
  auto [lmax, p] = gen_eig_max(z, q, lambda);
  Dense c = matmul(transpose(q), matmul(z, q));
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) c(i, j) /= std::sqrt(lambda[i] * lambda[j]);
  auto [vals, vecs] = oracles::eig_sym(symmetrized(c));
  (void)vecs;
  CHECK(lmax == doctest::Approx(vals[0]).epsilon(1e-9));
  double plp = 0.0;
  for (int i = 0; i < 5; ++i) plp += p[i] * p[i] * lambda[i];
  CHECK(plp == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("gen_eig_max rejects nonpositive weights") {
  Dense lambda = Dense::vector({1.0, -0.5});
  CHECK_THROWS_AS(gen_eig_max(Dense::identity(2), Dense::identity(2), lambda),
                  NonPositiveWeight);
}

TEST_CASE("dct forward of a constant vector") {
  Dense x = Dense::vector({1.0, 1.0, 1.0, 1.0});
  Dense y = dct_apply(x, DctDirection::forward);
  CHECK(y[0] == doctest::Approx(2.0).epsilon(1e-14));
  for (int k = 1; k < 4; ++k) CHECK(std::abs(y[k]) <= 1e-14);
}

TEST_CASE("dct inverse composes to the identity for every length up to 256") {
  Rng rng(8);
  for (int n = 2; n <= 256; ++n) {
    Dense x = rng.normal_dense(Shape{n, 1});
    Dense y = dct_apply(dct_apply(x, DctDirection::forward), DctDirection::inverse);
    CHECK(fnorm(y - x) <= 1e-12 * (1.0 + fnorm(x)));
  }
}

TEST_CASE("dct rows are orthonormal at n = 4") {
  Dense rows(4, 4);
  for (int j = 0; j < 4; ++j) {
    Dense e(4, 1);
    e[j] = 1.0;
    Dense col = dct_apply(e, DctDirection::forward);
    for (int i = 0; i < 4; ++i) rows(i, j) = col[i];
  }
  Dense gram = matmul(rows, transpose(rows));
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      CHECK(gram(i, j) == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-12));
}

TEST_CASE("project_trace_capped_psd examples") {
  SUBCASE("already feasible is unchanged") {
    Dense s(2, 2);
    s(0, 0) = 1.0;
    s(1, 1) = 2.0;
    Dense p = project_trace_capped_psd(s, 5.0);
    CHECK(fnorm(p - s) <= 1e-12);
  }
  SUBCASE("clamp only") {
    Dense s(2, 2);
    s(0, 0) = -1.0;
    s(1, 1) = 2.0;
    Dense p = project_trace_capped_psd(s, 5.0);
    CHECK(p(0, 0) == doctest::Approx(0.0));
    CHECK(p(1, 1) == doctest::Approx(2.0));
  }
  SUBCASE("simplex cap") {
    Dense s(2, 2);
    s(0, 0) = 3.0;
    s(1, 1) = 3.0;
    Dense p = project_trace_capped_psd(s, 4.0);
    CHECK(p(0, 0) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(p(1, 1) == doctest::Approx(2.0).epsilon(1e-12));
  }
  SUBCASE("rejects asymmetric input") {
    Dense s(2, 2);
    s(0, 1) = 1.0;
    CHECK_THROWS_AS(project_trace_capped_psd(s, 1.0), NotSymmetric);
  }
}

TEST_CASE("project_trace_capped_psd is the nearest feasible point") {
  Rng rng(23);
  const int n = 4;
  const double tau = 2.5;
  Dense s = symmetrized(rng.normal_dense(Shape{n, n}));
  Dense p = project_trace_capped_psd(s, tau);

  auto [vals, vecs] = oracles::eig_sym(p);
  (void)vecs;
  CHECK(vals[n - 1] >= -1e-10);
  double tr = 0.0;
  for (int i = 0; i < n; ++i) tr += p(i, i);
  CHECK(tr <= tau + 1e-10);

  const double dp = fnorm(s - p);
  for (int trial = 0; trial < 100; ++trial) {
    Dense m = rng.normal_dense(Shape{n, n});
    Dense q = matmul(m, transpose(m));
    double trq = 0.0;
    for (int i = 0; i < n; ++i) trq += q(i, i);
    q *= rng.uniform() * tau / trq;
    CHECK(dp <= fnorm(s - q) + 1e-10);
  }
}

TEST_CASE("masked matrix validates and round-trips") {
  CHECK_THROWS_AS(MaskedMatrix(Shape{2, 2}, {{0, 0, 1.0}, {0, 0, 2.0}}), ShapeMismatch);
  CHECK_THROWS_AS(MaskedMatrix(Shape{2, 2}, {{2, 0, 1.0}}), ShapeMismatch);
  MaskedMatrix m(Shape{2, 3}, {{0, 1, 5.0}, {1, 2, -1.0}});
  Dense d = m.to_dense();
  CHECK(d(0, 1) == 5.0);
  CHECK(d(1, 2) == -1.0);
  CHECK(m.fnorm() == doctest::Approx(std::sqrt(26.0)));
  Dense sampled = m.sample(d);
  CHECK(sampled[0] == 5.0);
  CHECK(sampled[1] == -1.0);
  Dense back = m.scatter(sampled);
  CHECK(fnorm(back - d) == 0.0);
}

TEST_CASE("simplex projections") {
  Dense v = Dense::vector({3.0, 1.0});
  Dense p = project_simplex(v, 1.0);
  CHECK(p[0] == doctest::Approx(1.0));
  CHECK(p[1] == doctest::Approx(0.0));

  Dense w = project_l1_ball(Dense::vector({2.0, -1.0}), 1.0);
  CHECK(one_norm(w) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(w[0] == doctest::Approx(1.0));
  CHECK(w[1] == doctest::Approx(0.0));

  Rng rng(31);
  Dense x = rng.normal_dense(Shape{5, 1});
  Dense px = project_l1_ball(x, 1.0);
  for (int t = 0; t < 200; ++t) {
    Dense q = project_l1_ball(rng.normal_dense(Shape{5, 1}), 1.0);
    CHECK(fnorm(x - px) <= fnorm(x - q) + 1e-12);
  }
}
