#include <cmath>
#include <vector>

#include "doctest.h"
#include "jpool/multiset.hpp"
#include "jpool/rng.hpp"

using jpool::Multiset;

namespace {

Multiset random_multiset(std::size_t dim, std::size_t n, jpool::CounterRng& rng) {
  std::vector<double> flat(dim * n);
  for (double& v : flat) v = rng.uniform(-1.0, 1.0);
  return Multiset::from_flat(dim, flat);
}

}  // namespace

TEST_CASE("multiset construction and canonical form") {
  Multiset m(2, {{1.0, 2.0}, {0.5, -1.0}, {1.0, 1.0}});
  CHECK(m.dim() == 2);
  CHECK(m.size() == 3);
  CHECK_FALSE(m.is_canonical());

  const Multiset c = m.canonicalized();
  CHECK(c.is_canonical());
  CHECK(c[0] == jpool::Point{0.5, -1.0});
  CHECK(c[1] == jpool::Point{1.0, 1.0});
  CHECK(c[2] == jpool::Point{1.0, 2.0});
  CHECK(m == c);  // same multiset, different order

  const auto flat = m.flat();
  CHECK(Multiset::from_flat(2, flat) == m);

  CHECK_THROWS_AS(Multiset(0, {}), jpool::Error);
  CHECK_THROWS_AS(Multiset(2, {{1.0}}), jpool::Error);
  const double nan = std::nan("");
  CHECK_THROWS_AS(Multiset(1, {{nan}}), jpool::Error);
}

TEST_CASE("wasserstein distance on hand cases") {
  // n = 1 is just the l-inf distance.
  Multiset a(2, {{0.0, 0.0}}), b(2, {{0.25, -0.75}});
  CHECK(jpool::wasserstein_distance(a, b) == 0.75);

  // Crossing pairs: optimal matching is identity after sorting.
  Multiset p(1, {{0.0}, {1.0}});
  Multiset q(1, {{0.9}, {0.1}});
  CHECK(jpool::wasserstein_distance(p, q) == doctest::Approx(0.2));

  // Identical multisets in different orders have distance exactly zero.
  Multiset u(2, {{0.3, 0.4}, {-1.0, 2.0}, {0.0, 0.0}});
  Multiset v(2, {{0.0, 0.0}, {0.3, 0.4}, {-1.0, 2.0}});
  CHECK(jpool::wasserstein_distance(u, v) == 0.0);

  Multiset w(3, {{0.0, 0.0, 0.0}});
  CHECK_THROWS_AS(jpool::wasserstein_distance(a, w), jpool::Error);
}

TEST_CASE("wasserstein matches brute force") {
  jpool::CounterRng rng(2024);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t dim = 1 + trial % 3;
    const std::size_t n = 1 + (trial / 3) % 7;
    const Multiset a = random_multiset(dim, n, rng);
    const Multiset b = random_multiset(dim, n, rng);
    CHECK(jpool::wasserstein_distance(a, b) ==
          jpool::wasserstein_bruteforce(a, b));
  }
}

TEST_CASE("wasserstein metric axioms") {
  jpool::CounterRng rng(77);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t dim = 1 + trial % 2;
    const std::size_t n = 2 + trial % 4;
    const Multiset a = random_multiset(dim, n, rng);
    const Multiset b = random_multiset(dim, n, rng);
    const Multiset c = random_multiset(dim, n, rng);
    const double ab = jpool::wasserstein_distance(a, b);
    const double ba = jpool::wasserstein_distance(b, a);
    const double ac = jpool::wasserstein_distance(a, c);
    const double cb = jpool::wasserstein_distance(c, b);
    CHECK(jpool::wasserstein_distance(a, a) == 0.0);
    CHECK(ab == doctest::Approx(ba).epsilon(1e-12));
    CHECK(ab <= ac + cb + 1e-9 * (1.0 + ab));
    CHECK(ab >= 0.0);
  }
}

TEST_CASE("assignment solver on a fixed cost matrix") {
  // Optimum is the anti-diagonal: 1 + 2 + 1 = 4.
  const std::vector<std::vector<double>> cost = {
      {8.0, 7.0, 1.0}, {6.0, 2.0, 9.0}, {1.0, 4.0, 5.0}};
  const auto match = jpool::solve_assignment(cost);
  REQUIRE(match.size() == 3);
  double total = 0.0;
  for (std::size_t i = 0; i < 3; ++i) total += cost[i][match[i]];
  CHECK(total == 4.0);
  CHECK(match[0] == 2);
  CHECK(match[1] == 1);
  CHECK(match[2] == 0);
}

TEST_CASE("approx_equal is a bottleneck test, not a sum test") {
  Multiset a(1, {{0.0}, {1.0}});
  Multiset close(1, {{1.0 + 1e-10}, {-1e-10}});
  CHECK(jpool::approx_equal(a, close, 1e-9));

  // Sum of errors is small but one matched pair must exceed tol.
  Multiset off(1, {{0.5}, {1.7}});
  CHECK_FALSE(jpool::approx_equal(a, off, 0.6));
  CHECK(jpool::approx_equal(a, off, 0.71));

  Multiset other_size(1, {{0.0}});
  CHECK_FALSE(jpool::approx_equal(a, other_size, 1.0));
  Multiset other_dim(2, {{0.0, 0.0}, {1.0, 1.0}});
  CHECK_FALSE(jpool::approx_equal(a, other_dim, 1.0));
}

TEST_CASE("separation statistics") {
  Multiset m(1, {{0.0}, {0.1}, {1.0}});
  CHECK(jpool::min_separation(m) == doctest::Approx(0.1).epsilon(1e-15));

  const auto stats = jpool::separation_stats(m);
  CHECK(stats.min_separation == doctest::Approx(0.1));
  CHECK(stats.max_pairwise == doctest::Approx(1.0));
  CHECK(stats.normalized == doctest::Approx(0.1));

  Multiset dup(2, {{0.5, 0.5}, {0.5, 0.5}});
  CHECK(jpool::min_separation(dup) == 0.0);

  Multiset single(1, {{0.0}});
  CHECK_THROWS_AS(jpool::min_separation(single), jpool::Error);

  const auto report = jpool::separation_report({m, dup});
  CHECK(report.domain_min_separation == 0.0);
  CHECK(report.per_multiset.size() == 2);
  CHECK(report.per_multiset[0].normalized == doctest::Approx(0.1));
}
