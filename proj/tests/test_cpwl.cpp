#include <cmath>
#include <memory>
#include <vector>

#include "doctest.h"
#include "fixtures.hpp"
#include "jpool/cpwl.hpp"
#include "jpool/lp.hpp"
#include "jpool/multiset.hpp"
#include "jpool/numeric.hpp"
#include "jpool/rng.hpp"

using namespace jpool;

TEST_CASE("affine maps apply and compose") {
  AffineMap f(2, 3);
  f.at(0, 0) = 1.0;
  f.at(0, 2) = 2.0;
  f.at(1, 1) = -1.0;
  f.bias = {0.5, 1.0};
  const std::vector<double> x = {1.0, 2.0, 3.0};
  CHECK(f.apply(x) == std::vector<double>{7.5, -1.0});

  AffineMap g(1, 2);
  g.at(0, 0) = 2.0;
  g.at(0, 1) = 3.0;
  g.bias = {-1.0};
  const AffineMap h = composed(g, f);
  CHECK(h.apply(x) == g.apply(f.apply(x)));

  const AffineMap id = AffineMap::identity(3);
  CHECK(id.apply(x) == x);
}

TEST_CASE("two-phase simplex") {
  // min -x0 - x1  s.t.  x0 <= 1, x1 <= 2, x0 + x1 <= 2.5, x >= 0
  LpResult r = solve_lp_leq({{1.0, 0.0}, {0.0, 1.0}, {1.0, 1.0}},
                            {1.0, 2.0, 2.5}, {-1.0, -1.0});
  REQUIRE(r.status == LpResult::Status::optimal);
  CHECK(r.value == doctest::Approx(-2.5).epsilon(1e-12));

  // Negative rhs forces phase 1: x0 >= 1 (as -x0 <= -1), x0 <= 2.
  r = solve_lp_leq({{-1.0}, {1.0}}, {-1.0, 2.0}, {1.0});
  REQUIRE(r.status == LpResult::Status::optimal);
  CHECK(r.value == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.x[0] == doctest::Approx(1.0).epsilon(1e-12));

  // Infeasible: x0 <= 1 and x0 >= 2.
  r = solve_lp_leq({{1.0}, {-1.0}}, {1.0, -2.0}, {0.0});
  CHECK(r.status == LpResult::Status::infeasible);

  // Unbounded: min -x0 with no upper bound.
  r = solve_lp_leq({{-1.0}}, {0.0}, {-1.0});
  CHECK(r.status == LpResult::Status::unbounded);
}

TEST_CASE("four-square partition basics") {
  const ExplicitPartition p = fixtures::four_square();
  CHECK(p.input_dim() == 2);
  CHECK(p.output_dim() == 1);
  CHECK(p.num_cells() == 4);

  // Interior points land in exactly one cell; law matches the closed form.
  auto value = [](double x, double y) {
    return 0.375 + 1.25 * x - 0.75 * y + 2.0 * std::fabs(x - 0.5) +
           1.5 * std::fabs(y - 0.5);
  };
  const std::vector<std::vector<double>> probes = {
      {0.25, 0.25}, {0.25, 0.75}, {0.75, 0.25}, {0.75, 0.75}, {0.1, 0.9}};
  for (const auto& pt : probes) {
    CHECK(p.locate(pt).size() == 1);
    CHECK(p.evaluate(pt)[0] == doctest::Approx(value(pt[0], pt[1])).epsilon(1e-14));
  }

  // Facet and corner points belong to every touching cell.
  CHECK(p.locate(Point{0.5, 0.25}).size() == 2);
  CHECK(p.locate(Point{0.5, 0.5}).size() == 4);
  CHECK_THROWS_AS(p.locate(Point{2.0, 0.0}), Error);

  CHECK(p.l1_distance_to_cell(Point{0.25, 0.25}, 0) == 0.0);
  CHECK(p.l1_distance_to_cell(Point{0.25, 0.25}, 3) ==
        doctest::Approx(0.5).epsilon(1e-12));  // 0.25 on each axis
  CHECK(p.l1_distance_to_cell(Point{0.25, 0.25}, 2) ==
        doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("four-square continuity and region oracles") {
  const ExplicitPartition p = fixtures::four_square();
  CounterRng rng(5);
  const std::vector<double> lo = {0.0, 0.0}, hi = {1.0, 1.0};
  const auto rep = continuity_check(p, lo, hi, 40, rng);
  CHECK(rep.ok());
  CHECK(rep.crossings_checked > 0);

  // Stability radius keeps the region id on probe points of the inf-ball.
  for (int t = 0; t < 50; ++t) {
    std::vector<double> x = {rng.uniform(0.01, 0.99), rng.uniform(0.01, 0.99)};
    const auto sr = p.stability_radius(x);
    if (sr.on_boundary) continue;
    REQUIRE(sr.value > 0.0);
    const RegionId id = p.region_id(x);
    const double r = sr.value * (1.0 - 1e-9);
    for (int corner = 0; corner < 4; ++corner) {
      std::vector<double> q = x;
      q[0] += (corner & 1) ? r : -r;
      q[1] += (corner & 2) ? r : -r;
      if (q[0] < 0.0 || q[0] > 1.0 || q[1] < 0.0 || q[1] > 1.0) continue;
      CHECK(p.region_id(q) == id);
    }

    const double cl = p.region_clearance_l1(x);
    REQUIRE(cl > 0.0);
    for (int axis = 0; axis < 2; ++axis) {
      std::vector<double> q = x;
      q[axis] += cl * (1.0 - 1e-9);
      if (q[axis] > 1.0) continue;
      CHECK(p.region_id(q) == id);
    }
  }

  // Boundary points report a zero stability radius.
  const auto sr = p.stability_radius(Point{0.5, 0.25});
  CHECK(sr.on_boundary);
  CHECK(sr.value == 0.0);

  // Covers: a facet point's cover contains the interior cover next to it.
  const RegionCover facet = p.region_cover(Point{0.5, 0.25});
  const RegionCover inside = p.region_cover(Point{0.49, 0.25});
  CHECK(RegionCover::subset(inside, facet));
  CHECK_FALSE(RegionCover::subset(facet, inside));
}

TEST_CASE("relu nets are consistent with their local laws") {
  CounterRng rng(11);
  for (int t = 0; t < 10; ++t) {
    const ReluNet net = ReluNet::random(2, {5, 4}, 2, rng);
    CHECK(net.input_dim() == 2);
    CHECK(net.output_dim() == 2);
    CHECK(net.num_hidden_units() == 9);

    for (int probe = 0; probe < 20; ++probe) {
      const std::vector<double> x = {rng.uniform(-2.0, 2.0),
                                     rng.uniform(-2.0, 2.0)};
      const auto [law, id] = net.local_affine(x);
      const auto direct = net.evaluate(x);
      const auto via_law = law.apply(x);
      CHECK(linf_diff(direct, via_law) <=
            1e-11 * (1.0 + linf_norm(direct)));

      const auto sr = net.stability_radius(x);
      if (!sr.on_boundary && sr.value > 0.0 && std::isfinite(sr.value)) {
        for (int axis = 0; axis < 2; ++axis) {
          std::vector<double> q = x;
          q[axis] += sr.value * (1.0 - 1e-9);
          CHECK(net.region_id(q) == id);
        }
      }
    }
  }
}

TEST_CASE("relu net continuity") {
  CounterRng rng(13);
  const ReluNet net = ReluNet::random(3, {6, 5}, 1, rng);
  const std::vector<double> lo = {-1.0, -1.0, -1.0}, hi = {1.0, 1.0, 1.0};
  const auto rep = continuity_check(net, lo, hi, 30, rng);
  CHECK(rep.ok());
}

TEST_CASE("affine precompose pulls back evaluation") {
  auto base = std::make_shared<ExplicitPartition>(fixtures::four_square());
  AffineMap seg(2, 1);  // t -> alpha + (beta - alpha) t
  const std::vector<double> alpha = {0.1, 0.2}, beta = {0.8, 0.9};
  for (int i = 0; i < 2; ++i) {
    seg.at(i, 0) = beta[i] - alpha[i];
    seg.bias[i] = alpha[i];
  }
  const AffinePrecompose lifted(base, seg);
  CHECK(lifted.input_dim() == 1);
  CHECK(lifted.output_dim() == 1);

  CounterRng rng(3);
  for (int t = 0; t < 40; ++t) {
    const double u = rng.uniform(0.0, 1.0);
    const std::vector<double> x = {u};
    const std::vector<double> mapped = {alpha[0] + (beta[0] - alpha[0]) * u,
                                        alpha[1] + (beta[1] - alpha[1]) * u};
    CHECK(lifted.evaluate(x)[0] ==
          doctest::Approx(base->evaluate(mapped)[0]).epsilon(1e-13));
    CHECK(lifted.region_id(x) == base->region_id(mapped));
  }
}

TEST_CASE("random grid partitions are continuous and box-covering") {
  CounterRng rng(21);
  for (int t = 0; t < 6; ++t) {
    const std::size_t dim = 1 + t % 3;
    const std::size_t res = 2 + t;
    const ExplicitPartition p = random_grid_partition(dim, res, 1, rng);
    std::size_t expect = 1;
    for (std::size_t j = 0; j < dim; ++j) expect *= res;
    CHECK(p.num_cells() == expect);

    std::vector<double> lo(dim, 0.0), hi(dim, 1.0);
    const auto rep = continuity_check(p, lo, hi, 25, rng);
    CHECK(rep.ok());

    for (int probe = 0; probe < 30; ++probe) {
      std::vector<double> x(dim);
      for (auto& v : x) v = rng.uniform(0.0, 1.0);
      CHECK(!p.locate(x).empty());
    }
  }
}

TEST_CASE("continuity check flags a mismatched facet") {
  // Two interval cells whose laws disagree by 0.1 at the shared endpoint.
  HPolytope left{{{-1.0}}, {0.5}};
  HPolytope right{{{1.0}}, {-0.5}};
  AffineMap f0(1, 1), f1(1, 1);
  f0.at(0, 0) = 1.0;
  f1.at(0, 0) = 1.0;
  f1.bias[0] = 0.1;
  const ExplicitPartition broken({left, right}, {f0, f1}, {0.0}, {1.0});

  CounterRng rng(11);
  const std::vector<double> lo = {0.0}, hi = {1.0};
  const auto rep = continuity_check(broken, lo, hi, 30, rng);
  CHECK_FALSE(rep.ok());
  CHECK(rep.violations.size() >= 1);
  CHECK(rep.worst_jump == doctest::Approx(0.1).epsilon(1e-9));
}
