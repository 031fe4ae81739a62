#include "doctest.h"

#include <cmath>

#include "atomkit/errors.hpp"
#include "atomkit/rng.hpp"
#include "atomkit/set_calculus.hpp"
#include "oracles.hpp"

using namespace atomkit;

TEST_CASE("sum support is additive and composites double the basis") {
  AtomicSetPtr sb = signed_basis(2);
  AtomicSetPtr sum = sum_descriptor({sb, sb});
  Dense z = Dense::vector({3.0, 1.0});
  CHECK(sum->support(z) == doctest::Approx(6.0));
  ExposedFace f = sum->expose(z, 2, 1e-9);
  REQUIRE(!f.atoms.empty());
  CHECK(f.atoms[0].tag.kind == AtomTag::Kind::composite);
  CHECK(fnorm(f.atoms[0].element - Dense::vector({2.0, 0.0})) <= 1e-12);
}

TEST_CASE("sum of elementwise and spectral balls on 2x2 matrices") {
  AtomicSetPtr ones = signed_basis(Shape{2, 2});
  AtomicSetPtr nuc = nuclear_ball(2, 2);
  AtomicSetPtr sum = sum_descriptor({ones, nuc});
  Dense z(2, 2);
  z(0, 0) = 1.0;
  CHECK(sum->support(z) == doctest::Approx(2.0).epsilon(1e-10));
}

TEST_CASE("adding the zero set changes nothing") {
  AtomicSetPtr sb = signed_basis(3);
  AtomicSetPtr zero = finite_atom_set(Shape{3, 1}, {Dense(3, 1)});
  AtomicSetPtr sum = sum_descriptor({sb, zero});
  Rng rng(71);
  for (int t = 0; t < 100; ++t) {
    Dense z = rng.normal_dense(Shape{3, 1});
    CHECK(sum->support(z) == doctest::Approx(sb->support(z)).epsilon(1e-12));
    ExposedFace f = sum->expose(z, 1, 1e-9);
    ExposedFace fb = sb->expose(z, 1, 1e-9);
    CHECK(fnorm(f.atoms[0].element - fb.atoms[0].element) <= 1e-12);
  }
}

TEST_CASE("sum support additivity over random pairings") {
  Rng rng(73);
  AtomicSetPtr a = signed_basis(4);
  AtomicSetPtr b = two_norm_ball(Shape{4, 1});
  AtomicSetPtr c = box_set(Shape{4, 1});
  AtomicSetPtr sum = sum_descriptor({a, b, c});
  for (int t = 0; t < 1000; ++t) {
    Dense z = rng.normal_dense(Shape{4, 1});
    const double expect = a->support(z) + b->support(z) + c->support(z);
    CHECK(std::abs(sum->support(z) - expect) <= 1e-12 * (1.0 + expect));
  }
}

TEST_CASE("union is idempotent and takes the max support") {
  AtomicSetPtr sb = signed_basis(2);
  AtomicSetPtr uni = union_descriptor({sb, sb});
  Rng rng(79);
  for (int t = 0; t < 100; ++t) {
    Dense z = rng.normal_dense(Shape{2, 1});
    CHECK(uni->support(z) == doctest::Approx(sb->support(z)).epsilon(1e-12));
    Dense x = rng.normal_dense(Shape{2, 1});
    CHECK(uni->gauge(x) == doctest::Approx(sb->gauge(x)).epsilon(1e-9));
  }

  AtomicSetPtr tb = two_norm_ball(Shape{2, 1});
  AtomicSetPtr mixed = union_descriptor({sb, tb});
  for (int t = 0; t < 1000; ++t) {
    Dense z = rng.normal_dense(Shape{2, 1});
    const double expect = std::max(sb->support(z), tb->support(z));
    CHECK(std::abs(mixed->support(z) - expect) <= 1e-12 * (1.0 + expect));
  }
}

TEST_CASE("union of two rays needs one atom from each") {
  AtomicSetPtr r1 = finite_atom_set(Shape{2, 1}, {Dense::vector({1.0, 0.0})});
  AtomicSetPtr r2 = finite_atom_set(Shape{2, 1}, {Dense::vector({0.0, 1.0})});
  AtomicSetPtr uni = union_descriptor({r1, r2});
  Dense x = Dense::vector({1.0, 1.0});
  CHECK(uni->gauge(x) == doctest::Approx(2.0).epsilon(1e-10));
  const double bf = gauge_bruteforce({Dense::vector({1.0, 0.0}), Dense::vector({0.0, 1.0})}, x, 1e-9);
  CHECK(uni->gauge(x) == doctest::Approx(bf).epsilon(1e-10));

  AtomicDecomposition d = uni->decompose(x, 1e-10);
  CHECK(d.terms.size() == 2);
  CHECK(d.claimed_gauge == doctest::Approx(2.0).epsilon(1e-10));
}

TEST_CASE("union gauge equals the merged brute force on finite atoms") {
  Rng rng(83);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Dense> atoms1, atoms2, merged;
    for (int i = 0; i < 3; ++i) {
      atoms1.push_back(rng.normal_dense(Shape{3, 1}));
      atoms2.push_back(rng.normal_dense(Shape{3, 1}));
      merged.push_back(atoms1.back());
      merged.push_back(atoms2.back());
    }
    AtomicSetPtr uni = union_descriptor(
        {finite_atom_set(Shape{3, 1}, atoms1), finite_atom_set(Shape{3, 1}, atoms2)});
    Dense x(3, 1);
    for (const auto& a : merged) axpy(rng.uniform(), a, x);
    const double bf = gauge_bruteforce(merged, x, 1e-9);
    if (std::isinf(bf)) continue;
    CHECK(std::abs(uni->gauge(x) - bf) <= 1e-8 * (1.0 + bf));
  }
}

TEST_CASE("sum_gauge_numeric: symmetric two-norm split") {
  AtomicSetPtr tb = two_norm_ball(Shape{3, 1});
  AtomicSetPtr sum = sum_descriptor({tb, tb});
  Dense x = Dense::vector({2.0, 0.0, 0.0});
  GaugeSplit split = sum_gauge_numeric(*sum, x, 1e-8);
  CHECK(split.value == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(fnorm(split.parts[0] + split.parts[1] - x) <= 1e-8 * (1.0 + fnorm(x)));
  CHECK(fnorm(split.parts[0] - Dense::vector({1.0, 0.0, 0.0})) <= 1e-4);
}

TEST_CASE("sum_gauge_numeric: one-norm plus one-norm") {
  AtomicSetPtr sb = signed_basis(2);
  AtomicSetPtr sum = sum_descriptor({sb, sb});
  Dense x = Dense::vector({2.0, 0.0});
  GaugeSplit split = sum_gauge_numeric(*sum, x, 1e-8);
  CHECK(split.value == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(fnorm(split.parts[0] - Dense::vector({1.0, 0.0})) <= 1e-4);
  CHECK(fnorm(split.parts[1] - Dense::vector({1.0, 0.0})) <= 1e-4);
}

TEST_CASE("sum_gauge_numeric matches the split grid oracle on the plane") {
  AtomicSetPtr sb = signed_basis(2);
  AtomicSetPtr tb = two_norm_ball(Shape{2, 1});
  AtomicSetPtr sum = sum_descriptor({sb, tb});
  Rng rng(89);
  for (int trial = 0; trial < 10; ++trial) {
    Dense x = rng.normal_dense(Shape{2, 1});
    GaugeSplit split = sum_gauge_numeric(*sum, x, 1e-8);
    // oracle: min over splits w of max(||w||_1, ||x - w||_2)
    auto level = [&](double w0, double w1) {
      const double g1 = std::abs(w0) + std::abs(w1);
      const double g2 = std::hypot(x[0] - w0, x[1] - w1);
      return std::max(g1, g2);
    };
    const double r = fnorm(x) + 1.0;
    auto [w0, w1] = oracles::grid_refine_2d(level, -r, r, -r, r, 300, 50);
    const double oracle = level(w0, w1);
    CHECK(std::abs(split.value - oracle) <= 1e-4 * (1.0 + oracle));
  }
}

TEST_CASE("sum_gauge_numeric active parts have equal gauges") {
  AtomicSetPtr sb = signed_basis(2);
  AtomicSetPtr tb = two_norm_ball(Shape{2, 1});
  AtomicSetPtr sum = sum_descriptor({sb, tb});
  Dense x = Dense::vector({1.0, 1.0});
  GaugeSplit split = sum_gauge_numeric(*sum, x, 1e-8);
  const double g1 = sb->gauge(split.parts[0]);
  const double g2 = tb->gauge(split.parts[1]);
  CHECK(g1 <= split.value + 1e-5);
  CHECK(g2 <= split.value + 1e-5);
  // both parts must be active here (neither alone contains x at this level)
  CHECK(std::abs(g1 - g2) <= 1e-3 * (1.0 + split.value));
}

TEST_CASE("alignment inheritance through the sum split") {
  AtomicSetPtr sb = signed_basis(2);
  AtomicSetPtr tb = two_norm_ball(Shape{2, 1});
  AtomicSetPtr sum = sum_descriptor({sb, tb});
  Rng rng(97);
  for (int trial = 0; trial < 10; ++trial) {
    Dense z = rng.normal_dense(Shape{2, 1});
    // aligned pair built from the composite exposed atom
    ExposedFace f = sum->expose(z, 1, 1e-9);
    Dense x = 2.5 * f.atoms[0].element;
    GaugeSplit split = sum_gauge_numeric(*sum, x, 1e-8);
    const double tol = 1e-6;
    const double resid_sum = sum->support(z) * split.value - dot(x, z);
    if (std::abs(resid_sum) <= tol * (1.0 + sum->support(z) * split.value)) {
      CHECK(alignment_residual(*sb, split.parts[0], z) <= 10 * tol * (1.0 + sb->support(z)));
      CHECK(alignment_residual(*tb, split.parts[1], z) <= 10 * tol * (1.0 + tb->support(z)));
    }
  }
}

TEST_CASE("union exposes atoms of the argmax part") {
  AtomicSetPtr sb = signed_basis(2);
  AtomicSetPtr tb = two_norm_ball(Shape{2, 1});
  AtomicSetPtr uni = union_descriptor({sb, tb});
  Dense z = Dense::vector({3.0, 4.0});
  // two-norm support 5 beats the max-abs 4
  ExposedFace f = uni->expose(z, 4, 1e-9);
  CHECK(f.support_value == doctest::Approx(5.0));
  REQUIRE(!f.atoms.empty());
  CHECK(fnorm(f.atoms[0].element - Dense::vector({0.6, 0.8})) <= 1e-12);
}

TEST_CASE("shape mismatches are rejected") {
  CHECK_THROWS_AS(sum_descriptor({signed_basis(2), signed_basis(3)}), ShapeMismatch);
  CHECK_THROWS_AS(union_descriptor({signed_basis(2)}), ShapeMismatch);
  AtomicSetPtr sb = signed_basis(2);
  CHECK_THROWS_AS(sum_gauge_numeric(*sb, Dense(2, 1), 1e-8), ShapeMismatch);
}
