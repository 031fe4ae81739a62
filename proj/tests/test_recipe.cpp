#include "doctest.h"

#include <fstream>
#include <sstream>

#include "atomkit/recipe.hpp"
#include "atomkit/rng.hpp"
#include "atomkit/set_calculus.hpp"

using namespace atomkit;

namespace {

// behavioral equality on random probes
void check_same_behavior(const AtomicSet& a, const AtomicSet& b, uint64_t seed) {
  Rng rng(seed);
  REQUIRE(a.shape() == b.shape());
  for (int t = 0; t < 25; ++t) {
    Dense z = rng.normal_dense(a.shape());
    if (a.variant() == "spectrahedron" || a.variant() == "weighted_spectrahedron")
      z = symmetrized(z);
    const double sa = a.support(z);
    const double sb = b.support(z);
    if (std::isinf(sa) || std::isinf(sb)) {
      CHECK(std::isinf(sa) == std::isinf(sb));
      continue;
    }
    CHECK(sa == doctest::Approx(sb).epsilon(1e-12));
  }
}

}  // namespace

TEST_CASE("recipes round-trip parse -> serialize -> parse") {
  std::vector<AtomicSetPtr> sets{
      signed_basis(4),
      two_norm_ball(Shape{3, 1}),
      box_set(Shape{3, 1}),
      nuclear_ball(3, 4),
      spectrahedron(3),
      tv_atoms(5),
      group_norm(5, {{0, 1}, {2, 3, 4}}),
      finite_atom_set(Shape{2, 1}, {Dense::vector({1.0, 0.5}), Dense::vector({-1.0, 2.0})}),
      scale_set(signed_basis(4), 2.5),
      transform(signed_basis(8), LinearMap::dct_transpose(8), TransformMode::image),
      transform(signed_basis(3),
                LinearMap::dense_map(Dense(Shape{3, 3}, {2, 0, 1, 0, 1, 0, -1, 0, 3})),
                TransformMode::preimage),
      sum_descriptor({signed_basis(4), two_norm_ball(Shape{4, 1})}),
      union_descriptor({signed_basis(4), box_set(Shape{4, 1})}),
  };
  uint64_t seed = 1;
  for (const auto& set : sets) {
    nlohmann::json j1 = descriptor_to_recipe(*set);
    AtomicSetPtr parsed = descriptor_from_recipe(j1);
    nlohmann::json j2 = descriptor_to_recipe(*parsed);
    CHECK(j1 == j2);
    check_same_behavior(*set, *parsed, seed++);
  }
}

TEST_CASE("subspace and weighted-spectrahedron recipes carry their bases") {
  Dense q(3, 1);
  q[0] = 0.6;
  q[1] = 0.8;
  AtomicSetPtr sub = subspace_set(q);
  AtomicSetPtr sub2 = descriptor_from_recipe(descriptor_to_recipe(*sub));
  check_same_behavior(*sub, *sub2, 5);

  Dense v = Dense::identity(3);
  Dense lambda = Dense::vector({1.0, 2.0, 0.5});
  AtomicSetPtr ws = weighted_spectrahedron(v, lambda);
  AtomicSetPtr ws2 = descriptor_from_recipe(descriptor_to_recipe(*ws));
  check_same_behavior(*ws, *ws2, 6);
}

TEST_CASE("unknown variants are rejected") {
  nlohmann::json j{{"variant", "mystery"}, {"params", nlohmann::json::object()}};
  CHECK_THROWS(descriptor_from_recipe(j));
}

TEST_CASE("masked csv loads triples under the documented header") {
  const std::string path = "/tmp/atomkit_masked.csv";
  {
    std::ofstream f(path);
    f << "i,j,value\n0,2,1.5\n1,0,-2\n";
  }
  MaskedMatrix m = masked_from_csv_file(path, Shape{2, 3});
  CHECK(m.nnz() == 2);
  CHECK(m.to_dense()(0, 2) == 1.5);
  CHECK(m.to_dense()(1, 0) == -2.0);

  {
    std::ofstream f(path);
    f << "0,2,1.5\n";
  }
  CHECK_THROWS(masked_from_csv_file(path, Shape{2, 3}));
}

TEST_CASE("dense csv round-trips") {
  Dense x(2, 3);
  x(0, 0) = 1.0;
  x(0, 2) = -2.5;
  x(1, 1) = 1e-17;
  std::istringstream in(dense_to_csv(x));
  Dense y = dense_from_csv(in);
  REQUIRE(y.shape() == x.shape());
  for (int k = 0; k < x.size(); ++k) CHECK(y[k] == x[k]);
}
