#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "jpool/cpwl.hpp"
#include "jpool/janossy.hpp"
#include "jpool/multiset.hpp"
#include "jpool/rational.hpp"

namespace jpool {

// Interior tolerance: a tuple only counts as inside a cell when every
// constraint has at least this much slack.
inline constexpr double kStrictInteriorTol = 1e-12;

// Chain construction around a diagonal seed point: anchors v_0..v_k, safe
// radii eps_1..eps_k, decay ratio rho, and the scalar offsets y_i placing the
// n points w_i = base + y_i so that every ascending k-tuple of w shares one
// linear region.
struct NestedPointCertificate {
  double base = 0.0;
  std::vector<double> eps;                   // k radii, eps_i <= eps_{i-1}/2
  std::vector<std::vector<double>> v_chain;  // k+1 anchors in R^k
  double ratio = 0.0;                        // rho in (0, 1/2]
  std::vector<double> offsets;               // y_1 > ... > y_n > 0
  std::vector<double> w;                     // base + y_i, strictly decreasing
  RegionId region;                           // shared region of all tuples
};

struct CollisionCertificate {
  std::size_t arity = 0;      // tuple size k
  std::size_t count = 0;      // number of points n
  std::size_t point_dim = 1;  // dimension of the final multisets
  NestedPointCertificate nested;
  std::vector<double> delta;  // n entries, dyadic multiples of a null vector
  double radius = 0.0;        // safe perturbation budget used to size delta
  std::vector<double> pooled_base;
  std::vector<double> pooled_perturbed;
  bool has_lift = false;                  // point_dim > 1 via the segment map
  std::vector<double> lift_alpha, lift_beta;  // segment endpoints in R^d
};

struct WitnessOptions {
  double seed_point = 0.25;  // first diagonal seed in (0,1)
  std::uint64_t seed = 42;   // retries draw new seeds from this stream
  int max_attempts = 16;
  double tol = 1e-9;       // pooled-residual tolerance (relative)
  double min_gap = 1e-6;   // wanted l-inf gap between the two multisets
  bool exact = false;      // also run the rational-arithmetic checks
};

// counts[j][i] = number of ascending k-tuples from n indices with index i at
// slot j (0-based). The k x n system whose null directions leave pooling
// unchanged.
std::vector<std::vector<BigInt>> tuple_system_coeffs(std::size_t n,
                                                        std::size_t k);

// Primitive integer null direction of that system, first nonzero entry
// positive. Exact by rational elimination.
std::vector<BigInt> collision_direction(std::size_t n, std::size_t k);

// The direction scaled by a power of two so its l-inf norm lands in
// (radius/4, radius/2]. Entries stay exact in double arithmetic, so the
// tuple-count residual is zero even in floats.
std::vector<double> collision_delta(std::size_t n, std::size_t k,
                                    double radius);

// Do all ascending `arity`-tuples of w sit strictly inside one common cell?
struct NestedCheckResult {
  bool ok = false;
  std::vector<std::size_t> host_cells;  // cells strictly containing all tuples
  double min_margin = 0.0;              // slack of the best host cell
  std::string detail;
};
NestedCheckResult check_nested(const ExplicitPartition& cells,
                               std::span<const double> w, std::size_t arity);

// Region-oracle variant for any CPwL function (activation regions etc.).
struct RegionNestedResult {
  bool ok = false;
  RegionId region;
  double min_stability = 0.0;
  std::string detail;
};
RegionNestedResult check_nested_region(const CpwlFunction& f,
                                       std::span<const double> w,
                                       std::size_t arity);

// Builds the chain under `region_source` (the symmetrized tuple function, or
// a raw partition) for `count` points, seeded on the diagonal at seed_point.
// Throws Errc::degenerate_input when the seed sits on a region boundary or
// the radii collapse.
NestedPointCertificate nested_point(const CpwlFunction& region_source,
                                         std::size_t count, double seed_point);

struct CheckItem {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct VerificationReport {
  std::vector<CheckItem> items;
  double pooled_residual = 0.0;
  double multiset_gap = 0.0;

  bool ok() const {
    for (const auto& it : items)
      if (!it.pass) return false;
    return true;
  }
  void add(std::string name, bool pass, std::string detail = {}) {
    items.push_back({std::move(name), pass, std::move(detail)});
  }
};

// Recomputes every structural identity of the chain: radii halving, anchor
// recurrence, offset decay, convex reconstruction of the leading tuple, and
// the shared strict-interior region of all tuples.
VerificationReport validate_nested(const CpwlFunction& region_source,
                                   const NestedPointCertificate& cert);

// Searches for a pooling collision of f with tuple size `arity` over `count`
// scalar points. f consumes arity coordinates.
CollisionCertificate find_collision(std::shared_ptr<const CpwlFunction> f,
                                    std::size_t arity, std::size_t count,
                                    const WitnessOptions& opts = {});

// Same, but the points live on the segment [alpha, beta] in R^d and f
// consumes arity*d coordinates.
CollisionCertificate find_lifted_collision(
    std::shared_ptr<const CpwlFunction> f, std::size_t arity,
    std::size_t count, const Point& alpha, const Point& beta,
    const WitnessOptions& opts = {});

// The two colliding multisets described by the certificate.
std::pair<Multiset, Multiset> collision_multisets(
    const CollisionCertificate& cert);

// Full re-check of a certificate against f: structure, null direction,
// region stability, pooled equality (and the exact-arithmetic versions when
// requested). Everything is recomputed; nothing is trusted from the file.
VerificationReport verify_collision(std::shared_ptr<const CpwlFunction> f,
                                    const CollisionCertificate& cert,
                                    const WitnessOptions& opts = {});

}  // namespace jpool
