#include <cmath>
#include <memory>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "fixtures.hpp"
#include "jpool/janossy.hpp"
#include "jpool/numeric.hpp"
#include "jpool/rng.hpp"

using namespace jpool;

namespace {

std::shared_ptr<const CpwlFunction> four_square_fn() {
  return std::make_shared<ExplicitPartition>(fixtures::four_square());
}

}  // namespace

TEST_CASE("combination enumeration") {
  std::vector<std::vector<std::size_t>> seen;
  pooling::for_each_combination(4, 2, [&](std::span<const std::size_t> idx) {
    seen.emplace_back(idx.begin(), idx.end());
  });
  const std::vector<std::vector<std::size_t>> expect = {
      {0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};
  CHECK(seen == expect);

  std::size_t count = 0;
  pooling::for_each_combination(10, 4, [&](auto) { ++count; });
  CHECK(count == 210);

  CHECK(pooling::factorial(0) == 1);
  CHECK(pooling::factorial(5) == 120);
  CHECK_THROWS_AS(pooling::factorial(21), Error);
}

TEST_CASE("product pooling reference value") {
  // k=2, d=1, f(x,y) = x*y over (1,2,3): all S_3 orderings / (3-2)! = 22.
  auto f = [](std::span<const double> t) {
    return std::vector<double>{t[0] * t[1]};
  };
  const std::vector<double> pts = {1.0, 2.0, 3.0};
  CHECK(pooling::sum_permutations(f, 2, 3, 1, pts, 1)[0] ==
        doctest::Approx(22.0).epsilon(1e-15));
  // Ascending form with inline symmetrization: 2*(2 + 3 + 6) = 22.
  CHECK(pooling::sum_ascending_symmetrized(f, 2, 3, 1, pts, 1)[0] ==
        doctest::Approx(22.0).epsilon(1e-15));
}

TEST_CASE("symmetrized function is slot-permutation invariant") {
  auto sym = symmetrize(four_square_fn(), 2);
  CHECK(sym->input_dim() == 2);
  CHECK(sym->block() == 1);

  CounterRng rng(17);
  for (int t = 0; t < 30; ++t) {
    const std::vector<double> x = {rng.uniform(0.0, 1.0),
                                   rng.uniform(0.0, 1.0)};
    const std::vector<double> swapped = {x[1], x[0]};
    CHECK(sym->evaluate(x) == sym->evaluate(swapped));
  }
}

TEST_CASE("pooling matches the permutation form") {
  PoolingSpec spec;
  spec.arity = 2;
  spec.count = 4;
  spec.point_dim = 1;
  spec.f = four_square_fn();
  spec.validate();

  CounterRng rng(23);
  for (int t = 0; t < 25; ++t) {
    std::vector<double> flat(spec.count);
    for (auto& v : flat) v = rng.uniform(0.0, 1.0);
    const auto fast = janossy_pool(spec, flat);
    const auto slow = janossy_pool_permutations(spec, flat);
    REQUIRE(fast.size() == 1);
    CHECK(fast[0] == doctest::Approx(slow[0]).epsilon(1e-9));
  }
}

TEST_CASE("pooled output is bit-identical across input orderings") {
  PoolingSpec spec;
  spec.arity = 2;
  spec.count = 6;
  spec.point_dim = 1;
  spec.f = four_square_fn();

  CounterRng rng(29);
  std::vector<double> flat(spec.count);
  for (auto& v : flat) v = rng.uniform(0.0, 1.0);

  const auto rep = invariance_check(spec, flat, 200, 7);
  CHECK(rep.trials == 200);
  CHECK(rep.max_deviation == 0.0);
}

TEST_CASE("exact pooling agrees with floats on dyadic inputs") {
  PoolingSpec spec;
  spec.arity = 2;
  spec.count = 3;
  spec.point_dim = 1;
  spec.f = four_square_fn();

  const std::vector<double> flat = {0.375, 0.25, 0.125};
  const auto approx = janossy_pool(spec, flat);

  std::vector<Rational> exact_in;
  for (double v : flat) exact_in.push_back(to_rational(v));
  const auto exact = janossy_pool_exact(spec, exact_in);
  REQUIRE(exact.size() == 1);
  // Dyadic inputs, dyadic coefficients: the float sum is exact too.
  CHECK(to_double(exact[0]) == approx[0]);
}

TEST_CASE("pooling spec validation") {
  PoolingSpec spec;
  spec.arity = 3;
  spec.count = 2;  // k > n
  spec.point_dim = 1;
  spec.f = four_square_fn();
  CHECK_THROWS_AS(spec.validate(), Error);

  spec.arity = 1;
  spec.count = 2;
  spec.point_dim = 3;  // input_dim != arity * point_dim
  CHECK_THROWS_AS(spec.validate(), Error);

  spec.f = nullptr;
  CHECK_THROWS_AS(spec.validate(), Error);
}

TEST_CASE("deviation detection catches deliberately broken pooling") {
  CounterRng rng(77);
  const auto f = std::make_shared<ReluNet>(ReluNet::random(2, {3}, 1, rng));
  std::vector<double> x(4);
  for (auto& v : x) v = rng.uniform(0.0, 1.0);

  // Mutant S_n pooling: the normalization lands on only the first half of
  // the enumeration, so the total depends on which values sit at the low
  // positions of the input ordering.
  auto broken_pool = [&](const std::vector<double>& pts) {
    std::vector<std::size_t> idx(pts.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    double total = 0.0;
    std::size_t rank = 0;
    do {
      const std::vector<double> tup = {pts[idx[0]], pts[idx[1]]};
      total += (rank++ < 12 ? 1.0 : 0.5) * f->evaluate(tup)[0];
    } while (std::next_permutation(idx.begin(), idx.end()));
    return total;
  };

  const double base = broken_pool(x);
  double dev = 0.0;
  std::vector<double> shuffled = x;
  for (int t = 0; t < 16; ++t) {
    rng.shuffle(shuffled);
    dev = std::max(dev, std::fabs(broken_pool(shuffled) - base));
  }
  CHECK(dev > 1e-6);
}
