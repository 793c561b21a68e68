#pragma once


#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "jpool/error.hpp"
#include "jpool/multiset.hpp"
#include "jpool/rng.hpp"

namespace jpool {

using CubeIndex = std::vector<std::int64_t>;

// Sum-pooled cube features over a grid: every active cube contributes one
// indicator value plus d recentred coordinates, giving |cubes| * (d+1)
// encoding slots. Cube side is separation/2; the indicator decays linearly
// across a margin shell strictly thinner than separation/4.
class GridCodec {
public:
  static GridCodec build(double separation, std::span<const double> box_lo,
                         std::span<const double> box_hi, double margin = -1.0);
  // Derives the separation level from the dataset's own minimum separation.
  static GridCodec build_for(const std::vector<Multiset>& data,
                             double margin = -1.0);

  double separation() const { return separation_; }
  double cube_side() const { return side_; }
  double margin() const { return margin_; }
  std::size_t dim() const { return box_lo_.size(); }
  std::size_t num_cubes() const { return active_.size(); }
  std::size_t output_dim() const { return active_.size() * (dim() + 1); }
  const std::vector<CubeIndex>& active_cubes() const { return active_; }
  const std::vector<double>& box_lo() const { return box_lo_; }
  const std::vector<double>& box_hi() const { return box_hi_; }

  Point cube_center(const CubeIndex& q) const;
  // l-inf distance from x to the closed cube; 0 inside.
  double cube_dist(const CubeIndex& q, std::span<const double> x) const;

  // 1 on the closed cube, linear decay to 0 across the margin shell.
  double indicator_feature(const CubeIndex& q, std::span<const double> x) const;
  // Recentred coordinates on the cube, tapered with the indicator outside;
  // identically 0 wherever the indicator is 0.
  std::vector<double> coordinate_feature(const CubeIndex& q,
                                         std::span<const double> x) const;

  std::vector<double> encode(const Multiset& points) const;

  // Reads back every block whose indicator is within ind_tol of 1; exact for
  // admissible inputs. Duplicate reads of one point (facet cases) collapse.
  Multiset decode(std::span<const double> encoding,
                  double ind_tol = 1e-6) const;

  // Every point inside the box and pairwise separation at least
  // side + 2*margin: the regime where each cube support sees one point.
  bool admits(const Multiset& points) const;

private:
  GridCodec() = default;

  double separation_ = 0.0, side_ = 0.0, margin_ = 0.0;
  std::vector<double> box_lo_, box_hi_;
  std::vector<CubeIndex> active_;  // lexicographic order
  std::map<CubeIndex, std::size_t> block_of_;
};

// Multisets with a guaranteed minimum pairwise separation, built from jittered
// per-axis level grids: distinct grid tuples always differ by >= separation on
// some axis.
class SeparatedMultisetSampler {
public:
  SeparatedMultisetSampler(std::size_t dim, std::size_t count,
                           double separation, std::vector<double> box_lo,
                           std::vector<double> box_hi);

  std::size_t dim() const { return lo_.size(); }
  std::size_t count() const { return count_; }
  double separation() const { return sep_; }

  Multiset sample(CounterRng& rng) const;

private:
  std::size_t count_;
  double sep_;
  std::vector<double> lo_, hi_;
  std::vector<std::size_t> levels_;
};

struct BilipEstimate {
  double min_ratio = 0.0;
  double max_ratio = 0.0;
  std::size_t pairs = 0;
  std::size_t skipped = 0;  // sampled pairs that were (numerically) equal
};

// Ratio ||E(A)-E(B)||_inf / d_W(A,B) over sampled pairs.
BilipEstimate bilip_estimate(const GridCodec& codec,
                             const SeparatedMultisetSampler& sampler,
                             std::size_t trials, CounterRng& rng);

}  // namespace jpool
