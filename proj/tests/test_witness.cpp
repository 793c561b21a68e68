#include <cmath>
#include <memory>
#include <vector>

#include "doctest.h"
#include "fixtures.hpp"
#include "jpool/janossy.hpp"
#include "jpool/numeric.hpp"
#include "jpool/witness.hpp"

using namespace jpool;

namespace {

std::vector<std::vector<BigInt>> brute_counts(std::size_t n, std::size_t k) {
  std::vector<std::vector<BigInt>> m(k, std::vector<BigInt>(n, 0));
  pooling::for_each_combination(n, k, [&](std::span<const std::size_t> idx) {
    for (std::size_t j = 0; j < k; ++j) m[j][idx[j]] += 1;
  });
  return m;
}

}  // namespace

TEST_CASE("tuple system coefficients match enumeration") {
  for (std::size_t n = 1; n <= 8; ++n) {
    for (std::size_t k = 1; k < n && k <= 4; ++k) {
      const auto fast = tuple_system_coeffs(n, k);
      const auto slow = brute_counts(n, k);
      REQUIRE(fast.size() == k);
      CHECK(fast == slow);
    }
  }
  // Spot value: n=3, k=2 is the second-difference system.
  const auto m = tuple_system_coeffs(3, 2);
  CHECK(m[0] == std::vector<BigInt>{2, 1, 0});
  CHECK(m[1] == std::vector<BigInt>{0, 1, 2});
}

TEST_CASE("collision direction is an exact primitive null vector") {
  for (std::size_t k = 1; k <= 3; ++k) {
    for (std::size_t n = k + 1; n <= k + 4; ++n) {
      const auto dir = collision_direction(n, k);
      REQUIRE(dir.size() == n);
      CHECK(dir[0] > 0);

      const auto m = tuple_system_coeffs(n, k);
      for (std::size_t j = 0; j < k; ++j) {
        BigInt dot = 0;
        for (std::size_t i = 0; i < n; ++i) dot += m[j][i] * dir[i];
        CHECK(dot == 0);
      }

      // Primitive: gcd of |entries| is 1.
      BigInt g = 0;
      for (const auto& v : dir) g = boost::multiprecision::gcd(g, v < 0 ? BigInt(-v) : v);
      CHECK(g == 1);
    }
  }
  CHECK(collision_direction(3, 2) == std::vector<BigInt>{1, -2, 1});
}

TEST_CASE("collision delta is dyadic and inside the budget") {
  for (double radius : {1.0, 0.3, 1e-4}) {
    const auto delta = collision_delta(4, 2, radius);
    double linf = 0.0;
    for (double v : delta) linf = std::max(linf, std::fabs(v));
    CHECK(linf <= radius / 2.0);
    CHECK(linf > radius / 4.0);

    // Entries are the integer direction times one power of two: the float
    // residual of the tuple system must vanish identically.
    const auto m = tuple_system_coeffs(4, 2);
    for (std::size_t j = 0; j < 2; ++j) {
      double dot = 0.0;
      for (std::size_t i = 0; i < 4; ++i)
        dot += static_cast<double>(m[j][i].convert_to<double>()) * delta[i];
      CHECK(dot == 0.0);
    }
  }
  CHECK_THROWS_AS(collision_delta(3, 2, 0.0), Error);
}

TEST_CASE("nested chain on the four-square partition: frozen arithmetic") {
  const ExplicitPartition p = fixtures::four_square();
  const NestedPointCertificate cert = nested_point(p, 3, 0.25);

  // Everything here is dyadic, so the comparisons are exact.
  CHECK(cert.base == 0.25);
  REQUIRE(cert.eps.size() == 2);
  CHECK(cert.eps[0] == 0.125);
  CHECK(cert.eps[1] == 0.0625);
  CHECK(cert.ratio == 0.5);

  REQUIRE(cert.v_chain.size() == 3);
  CHECK(cert.v_chain[0] == std::vector<double>{0.25, 0.25});
  CHECK(cert.v_chain[1] == std::vector<double>{0.3125, 0.25});
  CHECK(cert.v_chain[2] == std::vector<double>{0.3125, 0.28125});

  CHECK(cert.offsets == std::vector<double>{0.03125, 0.015625, 0.0078125});
  CHECK(cert.w == std::vector<double>{0.28125, 0.265625, 0.2578125});

  const auto rep = validate_nested(p, cert);
  for (const auto& item : rep.items)
    INFO(item.name, ": ", item.detail);
  CHECK(rep.ok());

  const auto chk = check_nested(p, cert.w, 2);
  CHECK(chk.ok);
  CHECK(chk.min_margin > 0.0);
}

TEST_CASE("check_nested figure anchors") {
  const ExplicitPartition p = fixtures::four_square();
  CHECK(check_nested(p, std::vector<double>{0.375, 0.25, 0.125}, 2).ok);
  CHECK_FALSE(check_nested(p, std::vector<double>{0.875, 0.75, 0.125}, 2).ok);
}

TEST_CASE("collision search on the four-square partition") {
  auto p = std::make_shared<ExplicitPartition>(fixtures::four_square());
  WitnessOptions opts;
  opts.exact = true;
  const CollisionCertificate cert = find_collision(p, 2, 3, opts);

  CHECK(cert.arity == 2);
  CHECK(cert.count == 3);
  CHECK(cert.point_dim == 1);
  CHECK_FALSE(cert.has_lift);
  REQUIRE(cert.delta.size() == 3);
  CHECK(cert.delta[0] != 0.0);

  const auto rep = verify_collision(p, cert, opts);
  for (const auto& item : rep.items)
    INFO(item.name, ": ", item.detail);
  CHECK(rep.ok());
  // Dyadic laws, dyadic points: the pooled residual is exactly zero.
  CHECK(rep.pooled_residual == 0.0);
  CHECK(rep.multiset_gap >= opts.min_gap);

  auto [a, b] = collision_multisets(cert);
  CHECK(a != b);
  CHECK(wasserstein_distance(a, b) > 0.0);

  // Same pooled value through the public pooling entry point.
  PoolingSpec spec{2, 3, 1, p};
  const auto fa = janossy_pool(spec, a.flat());
  const auto fb = janossy_pool(spec, b.flat());
  CHECK(linf_diff(fa, fb) == 0.0);
}

TEST_CASE("lifted collision on a segment in the plane") {
  auto p = std::make_shared<ExplicitPartition>(fixtures::four_square());
  const Point alpha = {0.05, 0.1}, beta = {0.45, 0.4};
  WitnessOptions opts;
  opts.exact = true;
  const CollisionCertificate cert =
      find_lifted_collision(p, 1, 3, alpha, beta, opts);

  CHECK(cert.arity == 1);
  CHECK(cert.count == 3);
  CHECK(cert.point_dim == 2);
  CHECK(cert.has_lift);

  const auto rep = verify_collision(p, cert, opts);
  for (const auto& item : rep.items)
    INFO(item.name, ": ", item.detail);
  CHECK(rep.ok());

  auto [a, b] = collision_multisets(cert);
  CHECK(a.dim() == 2);
  CHECK(a != b);

  // The planar multisets pool identically under f itself (k=1, d=2).
  PoolingSpec spec{1, 3, 2, p};
  const auto fa = janossy_pool(spec, a.flat());
  const auto fb = janossy_pool(spec, b.flat());
  CHECK(linf_diff(fa, fb) <= 1e-12 * (1.0 + linf_norm(fa)));
}

TEST_CASE("verification fails on tampered certificates") {
  auto p = std::make_shared<ExplicitPartition>(fixtures::four_square());
  CollisionCertificate cert = find_collision(p, 2, 3, {});

  CollisionCertificate bad = cert;
  bad.delta[0] *= 2.0;  // no longer matched to the stored perturbed pool
  CHECK_FALSE(verify_collision(p, bad, {}).ok());

  CollisionCertificate shifted = cert;
  shifted.nested.w[0] += 0.2;  // leaves the shared cell / breaks the chain
  CHECK_FALSE(verify_collision(p, shifted, {}).ok());
}
