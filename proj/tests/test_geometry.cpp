#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "painet/geometry.hpp"
#include "painet/rng.hpp"

using namespace painet;

TEST_CASE("random rotations are proper rotations for any seed") {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    Rng rng(seed);
    RigidTransform t{random_rotation(rng), Array({3})};
    CHECK(t.valid(1e-10));
  }
}

TEST_CASE("random rotation is deterministic per seed") {
  Rng a(42), b(42);
  CHECK(max_abs_diff(random_rotation(a), random_rotation(b)) == 0.0);
}

TEST_CASE("90 degree rotation about z maps x-axis onto y-axis") {
  RigidTransform t;
  t.rotation = Array{{0, -1, 0}, {1, 0, 0}, {0, 0, 1}};
  t.translation = Array({3});
  Array x{{1, 0, 0}};
  Array out = apply(t, x);
  CHECK(out(0, 0) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(out(0, 1) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(out(0, 2) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("identity transform leaves positions unchanged") {
  Rng rng(7);
  Array x = rng.gaussian_array({6, 3});
  CHECK(max_abs_diff(apply(RigidTransform::identity(), x), x) == 0.0);
}

TEST_CASE("pure translation preserves pairwise distances exactly") {
  Rng rng(8);
  Array x = rng.gaussian_array({5, 3});
  RigidTransform t = RigidTransform::identity();
  t.translation = Array({3}, {1.5, -2.0, 0.25});
  Array y = apply(t, x);
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 5; ++j)
      CHECK(std::fabs(row_sqdist(x, i, x, j) - row_sqdist(y, i, y, j)) < 1e-12);
}

TEST_CASE("rigid transforms preserve distances to 1e-10") {
  Rng rng(9);
  Array x = rng.gaussian_array({8, 3});
  for (int k = 0; k < 10; ++k) {
    RigidTransform t = random_transform(rng, 3.0);
    Array y = apply(t, x);
    for (std::size_t i = 0; i < 8; ++i)
      for (std::size_t j = 0; j < 8; ++j)
        CHECK(std::fabs(std::sqrt(row_sqdist(x, i, x, j)) - std::sqrt(row_sqdist(y, i, y, j))) <
              1e-10);
  }
}

TEST_CASE("composition matches sequential application") {
  Rng rng(10);
  Array x = rng.gaussian_array({4, 3});
  RigidTransform t1 = random_transform(rng);
  RigidTransform t2 = random_transform(rng);
  Array sequential = apply(t2, apply(t1, x));
  Array composed = apply(compose(t2, t1), x);
  CHECK(max_abs_diff(sequential, composed) < 1e-12);
}

TEST_CASE("velocities rotate but ignore the translation") {
  Rng rng(11);
  Array v = rng.gaussian_array({5, 3});

  RigidTransform ident = RigidTransform::identity();
  ident.translation = Array({3}, {10.0, 20.0, 30.0});
  CHECK(max_abs_diff(apply_to_velocity(ident, v), v) == 0.0);

  RigidTransform half_turn;
  half_turn.rotation = Array{{-1, 0, 0}, {0, -1, 0}, {0, 0, 1}};
  half_turn.translation = Array({3});
  Array w{{1, 1, 0}};
  Array out = apply_to_velocity(half_turn, w);
  CHECK(out(0, 0) == doctest::Approx(-1.0));
  CHECK(out(0, 1) == doctest::Approx(-1.0));
  CHECK(out(0, 2) == doctest::Approx(0.0));

  RigidTransform t = random_transform(rng);
  Array rv = apply_to_velocity(t, v);
  for (std::size_t i = 0; i < 5; ++i) {
    double n0 = 0.0, n1 = 0.0;
    for (std::size_t k = 0; k < 3; ++k) {
      n0 += v(i, k) * v(i, k);
      n1 += rv(i, k) * rv(i, k);
    }
    CHECK(std::fabs(std::sqrt(n0) - std::sqrt(n1)) < 1e-10);
  }
}

TEST_CASE("permutations validate, invert and round-trip") {
  CHECK_THROWS_AS(Permutation({0, 0, 1}), contract_error);
  CHECK_THROWS_AS(Permutation({0, 3, 1}), contract_error);

  Rng rng(12);
  Permutation p = Permutation::random(7, rng);
  Array a = rng.gaussian_array({7, 4});
  Array round_trip = p.inverse().apply_rows(p.apply_rows(a));
  CHECK(max_abs_diff(round_trip, a) == 0.0);

  // relabel is the inverse index map
  for (std::size_t i = 0; i < 7; ++i) CHECK(p.relabel(p(i)) == i);
}
