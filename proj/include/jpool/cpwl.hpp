#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "jpool/error.hpp"
#include "jpool/rational.hpp"
#include "jpool/rng.hpp"

namespace jpool {

struct AffineMap {
  std::size_t rows = 0, cols = 0;
  std::vector<double> weights;  // row-major, rows x cols
  std::vector<double> bias;     // rows

  AffineMap() = default;
  AffineMap(std::size_t r, std::size_t c)
      : rows(r), cols(c), weights(r * c, 0.0), bias(r, 0.0) {}

  double& at(std::size_t r, std::size_t c) { return weights[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return weights[r * cols + c]; }

  std::vector<double> apply(std::span<const double> x) const;
  std::vector<Rational> apply_exact(std::span<const Rational> x) const;

  static AffineMap identity(std::size_t n);
  void validate() const;
};

// outer(inner(x)) flattened into a single map.
AffineMap composed(const AffineMap& outer, const AffineMap& inner);

// Intersection of half-spaces normals[j] . x + offsets[j] >= 0.
struct HPolytope {
  std::vector<std::vector<double>> normals;
  std::vector<double> offsets;

  std::size_t dim() const { return normals.empty() ? 0 : normals[0].size(); }
  std::size_t num_constraints() const { return normals.size(); }

  // Smallest constraint slack; >= 0 means inside (boundary included).
  double margin(std::span<const double> x) const;
  Rational margin_exact(std::span<const Rational> x) const;
  bool contains(std::span<const double> x, double tol) const {
    return margin(x) >= -tol;
  }
  void validate(std::size_t expected_dim) const;
};

// Identifier of the linear region a point sits in. Comparable and hashable by
// value; the encoding is owner-specific (cell index, activation bits, ...).
struct RegionId {
  std::vector<std::int32_t> key;
  friend bool operator==(const RegionId&, const RegionId&) = default;
  friend auto operator<=>(const RegionId&, const RegionId&) = default;
};

// Set-valued region membership for boundary points: one slot per decision,
// each slot holding every admissible value there. A point's cover is
// contained in another's exactly when the region (closure) relation holds.
struct RegionCover {
  std::vector<std::vector<std::int32_t>> slots;  // each sorted ascending

  static bool subset(const RegionCover& inner, const RegionCover& outer);
};

struct StabilityRadius {
  double value = 0.0;
  bool on_boundary = false;  // true => value is 0 and x sits on a region face
};

// Continuous piecewise-linear function R^in -> R^out presented through its
// region structure.
class CpwlFunction {
public:
  virtual ~CpwlFunction() = default;

  virtual std::size_t input_dim() const = 0;
  virtual std::size_t output_dim() const = 0;

  virtual std::vector<double> evaluate(std::span<const double> x) const = 0;
  virtual std::vector<Rational> evaluate_exact(
      std::span<const Rational> x) const = 0;

  // The affine law and region identity at x; on a boundary the tie breaks
  // deterministically (lowest cell index / zero activation side).
  virtual std::pair<AffineMap, RegionId> local_affine(
      std::span<const double> x) const = 0;

  RegionId region_id(std::span<const double> x) const {
    return local_affine(x).second;
  }

  // Radius r (l-inf) such that the closed ball B(x, r) keeps the region id.
  virtual StabilityRadius stability_radius(std::span<const double> x) const = 0;

  // Half the l1 distance from x to the nearest other region: every point of
  // the open l1 ball of this radius shares x's region.
  virtual double region_clearance_l1(std::span<const double> x) const = 0;

  virtual RegionCover region_cover(std::span<const double> x) const = 0;
};

// Explicit cell decomposition: cells cover a box, each with its own law.
class ExplicitPartition final : public CpwlFunction {
public:
  static constexpr double kMembershipTol = 1e-12;

  ExplicitPartition(std::vector<HPolytope> cells, std::vector<AffineMap> maps,
                    std::vector<double> box_lo, std::vector<double> box_hi);

  std::size_t input_dim() const override { return box_lo_.size(); }
  std::size_t output_dim() const override { return out_dim_; }
  std::size_t num_cells() const { return cells_.size(); }
  const HPolytope& cell(std::size_t i) const { return cells_[i]; }
  const AffineMap& map(std::size_t i) const { return maps_[i]; }
  const std::vector<double>& box_lo() const { return box_lo_; }
  const std::vector<double>& box_hi() const { return box_hi_; }

  // Indices (ascending) of all cells containing x up to tol; error if none.
  std::vector<std::size_t> locate(std::span<const double> x,
                                  double tol = kMembershipTol) const;
  std::vector<std::size_t> locate_exact(std::span<const Rational> x) const;

  // Exact l1 distance from v to cell i (0 when inside). Box-shaped cells go
  // through a closed form, anything else through the LP.
  double l1_distance_to_cell(std::span<const double> v, std::size_t i) const;

  std::vector<double> evaluate(std::span<const double> x) const override;
  std::vector<Rational> evaluate_exact(
      std::span<const Rational> x) const override;
  std::pair<AffineMap, RegionId> local_affine(
      std::span<const double> x) const override;
  StabilityRadius stability_radius(std::span<const double> x) const override;
  double region_clearance_l1(std::span<const double> x) const override;
  RegionCover region_cover(std::span<const double> x) const override;

private:
  std::vector<HPolytope> cells_;
  std::vector<AffineMap> maps_;
  std::vector<double> box_lo_, box_hi_;
  std::size_t out_dim_ = 0;
  // Per-cell interval form when every constraint is axis-aligned; empty
  // vectors for general cells.
  struct BoxForm {
    bool is_box = false;
    std::vector<double> lo, hi;
  };
  std::vector<BoxForm> box_forms_;
};

// Fully-connected ReLU network; layers.back() is the linear output layer.
class ReluNet final : public CpwlFunction {
public:
  explicit ReluNet(std::vector<AffineMap> layers);

  static ReluNet random(std::size_t input_dim,
                        const std::vector<std::size_t>& hidden,
                        std::size_t output_dim, CounterRng& rng);

  std::size_t input_dim() const override { return layers_.front().cols; }
  std::size_t output_dim() const override { return layers_.back().rows; }
  const std::vector<AffineMap>& layers() const { return layers_; }
  std::size_t num_hidden_units() const { return hidden_units_; }

  // Activation pattern over all hidden units: 1 where the pre-activation is
  // strictly positive.
  std::vector<std::int32_t> pattern(std::span<const double> x) const;

  std::vector<double> evaluate(std::span<const double> x) const override;
  std::vector<Rational> evaluate_exact(
      std::span<const Rational> x) const override;
  std::pair<AffineMap, RegionId> local_affine(
      std::span<const double> x) const override;
  StabilityRadius stability_radius(std::span<const double> x) const override;
  double region_clearance_l1(std::span<const double> x) const override;
  RegionCover region_cover(std::span<const double> x) const override;

private:
  std::vector<AffineMap> layers_;
  std::size_t hidden_units_ = 0;
};

// base(pre(x)): pulls a CPwL function back through an affine map.
class AffinePrecompose final : public CpwlFunction {
public:
  AffinePrecompose(std::shared_ptr<const CpwlFunction> base, AffineMap pre);

  std::size_t input_dim() const override { return pre_.cols; }
  std::size_t output_dim() const override { return base_->output_dim(); }
  const CpwlFunction& base() const { return *base_; }
  const AffineMap& pre() const { return pre_; }

  std::vector<double> evaluate(std::span<const double> x) const override;
  std::vector<Rational> evaluate_exact(
      std::span<const Rational> x) const override;
  std::pair<AffineMap, RegionId> local_affine(
      std::span<const double> x) const override;
  StabilityRadius stability_radius(std::span<const double> x) const override;
  double region_clearance_l1(std::span<const double> x) const override;
  RegionCover region_cover(std::span<const double> x) const override;

private:
  std::shared_ptr<const CpwlFunction> base_;
  AffineMap pre_;
  double row_linf_norm_ = 0.0;  // max_i sum_j |a_ij|: l-inf -> l-inf bound
  double col_l1_norm_ = 0.0;    // max_j sum_i |a_ij|: l1 -> l1 bound
};

// Random continuous CPwL on the unit box whose linear regions are the
// resolution^dim axis-aligned grid cells: a linear part plus hinge terms
// |x_j - i/resolution| with nonzero weights, expanded into per-cell maps.
ExplicitPartition random_grid_partition(std::size_t dim,
                                        std::size_t resolution,
                                        std::size_t output_dim,
                                        CounterRng& rng);

struct ContinuityViolation {
  std::vector<double> at;
  double jump = 0.0;
};

struct ContinuityReport {
  std::size_t segments_checked = 0;
  std::size_t crossings_checked = 0;
  double worst_jump = 0.0;
  std::vector<ContinuityViolation> violations;
  bool ok() const { return violations.empty(); }
};

// Samples random segments in the box, bisects to each region crossing and
// compares the two adjacent laws there. For explicit partitions this is
// exactly the facet-agreement check.
ContinuityReport continuity_check(const CpwlFunction& f,
                                  std::span<const double> box_lo,
                                  std::span<const double> box_hi,
                                  std::size_t segments, CounterRng& rng,
                                  double tol = 1e-9);

}  // namespace jpool
