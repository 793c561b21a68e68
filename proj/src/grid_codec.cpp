#include "jpool/grid_codec.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "jpool/numeric.hpp"

namespace jpool {

GridCodec GridCodec::build(double separation, std::span<const double> box_lo,
                           std::span<const double> box_hi, double margin) {
  const std::size_t d = box_lo.size();
  require(d >= 1, Errc::invalid_argument, "codec: empty box");
  require(box_hi.size() == d, Errc::dimension_mismatch,
          "codec: box corner dimension mismatch");
  for (std::size_t t = 0; t < d; ++t)
    require(box_lo[t] < box_hi[t], Errc::invalid_argument,
            "codec: box must have positive extent");
  require(std::isfinite(separation) && separation > 0.0,
          Errc::invalid_argument, "codec: separation must be positive");

  GridCodec c;
  c.separation_ = separation;
  c.side_ = separation / 2.0;
  c.margin_ = margin < 0.0 ? separation / 8.0 : margin;
  require(c.margin_ > 0.0 && c.margin_ < separation / 4.0,
          Errc::invalid_argument,
          "codec: margin must lie in (0, separation/4)");
  c.box_lo_.assign(box_lo.begin(), box_lo.end());
  c.box_hi_.assign(box_hi.begin(), box_hi.end());

  // Active cubes: every cube whose margin-fattened support meets the box.
  std::vector<std::int64_t> lo_idx(d), hi_idx(d);
  for (std::size_t t = 0; t < d; ++t) {
    lo_idx[t] = static_cast<std::int64_t>(
        std::ceil((box_lo[t] - c.margin_) / c.side_ - 1.0));
    hi_idx[t] = static_cast<std::int64_t>(
        std::floor((box_hi[t] + c.margin_) / c.side_));
    require(hi_idx[t] >= lo_idx[t], Errc::internal, "codec: empty index range");
  }

  CubeIndex cur(lo_idx.begin(), lo_idx.end());
  for (;;) {
    c.block_of_.emplace(cur, c.active_.size());
    c.active_.push_back(cur);
    std::size_t t = d;
    while (t > 0 && cur[t - 1] == hi_idx[t - 1]) {
      cur[t - 1] = lo_idx[t - 1];
      --t;
    }
    if (t == 0) break;
    ++cur[t - 1];
  }
  return c;
}

GridCodec GridCodec::build_for(const std::vector<Multiset>& data,
                               double margin) {
  const SeparationReport rep = separation_report(data);
  require(rep.domain_min_separation > 0.0, Errc::degenerate_input,
          "codec: dataset contains duplicate points");
  std::vector<double> lo(data[0].dim(),
                         std::numeric_limits<double>::infinity());
  std::vector<double> hi(data[0].dim(),
                         -std::numeric_limits<double>::infinity());
  for (const Multiset& m : data) {
    require(m.dim() == lo.size(), Errc::dimension_mismatch,
            "codec: mixed dataset dimensions");
    for (const Point& p : m.elements())
      for (std::size_t t = 0; t < p.size(); ++t) {
        lo[t] = std::min(lo[t], p[t]);
        hi[t] = std::max(hi[t], p[t]);
      }
  }
  for (std::size_t t = 0; t < lo.size(); ++t)
    if (!(lo[t] < hi[t])) hi[t] = lo[t] + rep.domain_min_separation;
  return build(rep.domain_min_separation, lo, hi, margin);
}

Point GridCodec::cube_center(const CubeIndex& q) const {
  require(q.size() == dim(), Errc::dimension_mismatch,
          "codec: cube index dimension mismatch");
  Point c(dim());
  for (std::size_t t = 0; t < dim(); ++t)
    c[t] = (static_cast<double>(q[t]) + 0.5) * side_;
  return c;
}

double GridCodec::cube_dist(const CubeIndex& q,
                            std::span<const double> x) const {
  require(q.size() == dim() && x.size() == dim(), Errc::dimension_mismatch,
          "codec: dimension mismatch");
  double dist = 0.0;
  for (std::size_t t = 0; t < dim(); ++t) {
    const double lo = static_cast<double>(q[t]) * side_;
    const double hi = lo + side_;
    if (x[t] < lo)
      dist = std::max(dist, lo - x[t]);
    else if (x[t] > hi)
      dist = std::max(dist, x[t] - hi);
  }
  return dist;
}

double GridCodec::indicator_feature(const CubeIndex& q,
                                    std::span<const double> x) const {
  const double dist = cube_dist(q, x);
  if (dist == 0.0) return 1.0;
  return std::max(0.0, 1.0 - dist / margin_);
}

std::vector<double> GridCodec::coordinate_feature(
    const CubeIndex& q, std::span<const double> x) const {
  const double ind = indicator_feature(q, x);
  const double cap = (side_ / 2.0) * ind;
  const Point c = cube_center(q);
  std::vector<double> out(dim());
  for (std::size_t t = 0; t < dim(); ++t) {
    const double off =
        std::clamp(x[t] - c[t], -side_ / 2.0, side_ / 2.0);
    out[t] = std::clamp(off, -cap, cap);
  }
  return out;
}

std::vector<double> GridCodec::encode(const Multiset& points) const {
  require(points.dim() == dim(), Errc::dimension_mismatch,
          "encode: dimension mismatch");
  std::vector<double> out(output_dim(), 0.0);
  const std::size_t stride = dim() + 1;
  // Accumulate in canonical element order so the encoding is bitwise
  // independent of the caller's ordering even when blocks overlap.
  const Multiset canon = points.canonicalized();
  for (const Point& p : canon.elements())
    for (std::size_t t = 0; t < dim(); ++t)
      require(p[t] >= box_lo_[t] && p[t] <= box_hi_[t], Errc::domain_violation,
              "encode: element outside the covered box");
  for (const Point& p : canon.elements()) {
    for (std::size_t b = 0; b < active_.size(); ++b) {
      const double ind = indicator_feature(active_[b], p);
      if (ind == 0.0) continue;
      out[b * stride] += ind;
      const std::vector<double> coords = coordinate_feature(active_[b], p);
      for (std::size_t t = 0; t < dim(); ++t)
        out[b * stride + 1 + t] += coords[t];
    }
  }
  return out;
}

Multiset GridCodec::decode(std::span<const double> encoding,
                           double ind_tol) const {
  require(encoding.size() == output_dim(), Errc::size_mismatch,
          "decode: encoding length mismatch");
  require(ind_tol >= 0.0 && ind_tol < 0.5, Errc::invalid_argument,
          "decode: indicator tolerance out of range");
  const std::size_t stride = dim() + 1;
  std::vector<Point> pts;
  for (std::size_t b = 0; b < active_.size(); ++b) {
    const double ind = encoding[b * stride];
    if (std::fabs(ind - 1.0) > ind_tol) continue;
    const Point c = cube_center(active_[b]);
    Point p(dim());
    for (std::size_t t = 0; t < dim(); ++t)
      p[t] = c[t] + encoding[b * stride + 1 + t];
    pts.push_back(std::move(p));
  }
  if (pts.empty()) {
    // All-zero encodings decode to the empty multiset; anything else with no
    // full indicator is a separation violation or a corrupted vector.
    for (double v : encoding)
      require(v == 0.0, Errc::domain_violation,
              "decode: nonzero encoding without a full indicator block");
  }
  // A point on a shared facet reads back from each touching cube; collapse
  // anything closer than a quarter cube.
  std::sort(pts.begin(), pts.end());
  std::vector<Point> unique;
  for (const Point& p : pts) {
    bool dup = false;
    for (const Point& q : unique)
      if (linf_dist(p, q) < side_ / 4.0) {
        dup = true;
        break;
      }
    if (!dup) unique.push_back(p);
  }
  Multiset out(dim());
  if (!unique.empty()) out = Multiset(dim(), std::move(unique));
  return out;
}

bool GridCodec::admits(const Multiset& points) const {
  if (points.dim() != dim()) return false;
  for (const Point& p : points.elements())
    for (std::size_t t = 0; t < dim(); ++t)
      if (p[t] < box_lo_[t] || p[t] > box_hi_[t]) return false;
  if (points.size() >= 2 &&
      min_separation(points) < side_ + 2.0 * margin_ - 1e-15)
    return false;
  return true;
}

// ---------------------------------------------------------------------------
// SeparatedMultisetSampler

SeparatedMultisetSampler::SeparatedMultisetSampler(std::size_t dim,
                                                   std::size_t count,
                                                   double separation,
                                                   std::vector<double> box_lo,
                                                   std::vector<double> box_hi)
    : count_(count),
      sep_(separation),
      lo_(std::move(box_lo)),
      hi_(std::move(box_hi)) {
  require(dim >= 1 && lo_.size() == dim && hi_.size() == dim,
          Errc::dimension_mismatch, "sampler: box dimension mismatch");
  require(count_ >= 1, Errc::invalid_argument, "sampler: count must be >= 1");
  require(std::isfinite(sep_) && sep_ > 0.0, Errc::invalid_argument,
          "sampler: separation must be positive");

  std::vector<std::size_t> capacity(dim);
  for (std::size_t t = 0; t < dim; ++t) {
    require(lo_[t] < hi_[t], Errc::invalid_argument,
            "sampler: box must have positive extent");
    capacity[t] =
        static_cast<std::size_t>(std::floor((hi_[t] - lo_[t]) / sep_)) + 1;
  }

  levels_.assign(dim, 1);
  auto product = [&] {
    std::size_t p = 1;
    for (std::size_t l : levels_) {
      if (p > (std::size_t{1} << 62) / l) return std::numeric_limits<std::size_t>::max();
      p *= l;
    }
    return p;
  };
  while (product() < count_) {
    std::size_t best = dim;
    for (std::size_t t = 0; t < dim; ++t) {
      if (levels_[t] >= capacity[t]) continue;
      if (best == dim || levels_[t] < levels_[best]) best = t;
    }
    require(best != dim, Errc::domain_violation,
            "sampler: count exceeds the box's packing capacity");
    ++levels_[best];
  }
}

Multiset SeparatedMultisetSampler::sample(CounterRng& rng) const {
  const std::size_t d = dim();

  // Jittered levels per axis with gaps kept >= sep even after rounding.
  std::vector<std::vector<double>> axis_pos(d);
  for (std::size_t t = 0; t < d; ++t) {
    const std::size_t L = levels_[t];
    const double span = hi_[t] - lo_[t];
    double slack = span - static_cast<double>(L - 1) * sep_;
    slack = std::max(0.0, slack - 1e-9 * (1.0 + std::fabs(hi_[t])));
    std::vector<double> jitter(L);
    for (double& u : jitter) u = rng.uniform(0.0, slack);
    std::sort(jitter.begin(), jitter.end());
    axis_pos[t].resize(L);
    for (std::size_t j = 0; j < L; ++j) {
      axis_pos[t][j] = lo_[t] + static_cast<double>(j) * sep_ + jitter[j];
      while (j > 0 && axis_pos[t][j] - axis_pos[t][j - 1] < sep_)
        axis_pos[t][j] =
            std::nextafter(axis_pos[t][j], std::numeric_limits<double>::max());
    }
  }

  // Pick distinct level tuples.
  std::size_t total = 1;
  bool huge = false;
  for (std::size_t L : levels_) {
    if (total > (std::size_t{1} << 40) / L) {
      huge = true;
      break;
    }
    total *= L;
  }

  std::vector<std::size_t> chosen;
  if (!huge && total <= 4096) {
    std::vector<std::size_t> all(total);
    std::iota(all.begin(), all.end(), std::size_t{0});
    rng.shuffle(all);
    chosen.assign(all.begin(), all.begin() + count_);
  } else {
    std::vector<std::size_t> seen;
    while (seen.size() < count_) {
      std::size_t v = 0;
      // Mixed-radix draw, axis by axis.
      for (std::size_t t = 0; t < d; ++t)
        v = v * levels_[t] + rng.next_below(levels_[t]);
      if (std::find(seen.begin(), seen.end(), v) == seen.end())
        seen.push_back(v);
    }
    chosen = std::move(seen);
  }

  std::vector<Point> pts;
  pts.reserve(count_);
  for (std::size_t lin : chosen) {
    Point p(d);
    for (std::size_t t = d; t-- > 0;) {
      p[t] = axis_pos[t][lin % levels_[t]];
      lin /= levels_[t];
    }
    pts.push_back(std::move(p));
  }
  return Multiset(d, std::move(pts));
}

// ---------------------------------------------------------------------------

BilipEstimate bilip_estimate(const GridCodec& codec,
                             const SeparatedMultisetSampler& sampler,
                             std::size_t trials, CounterRng& rng) {
  require(sampler.dim() == codec.dim(), Errc::dimension_mismatch,
          "bilip: sampler and codec dimensions differ");
  require(trials >= 1, Errc::invalid_argument, "bilip: need at least 1 trial");

  BilipEstimate est;
  est.min_ratio = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < trials; ++i) {
    const Multiset a = sampler.sample(rng);
    const Multiset b = sampler.sample(rng);
    const double dw = wasserstein_distance(a, b);
    if (dw < 1e-9) {
      ++est.skipped;
      continue;
    }
    const double de = linf_diff(codec.encode(a), codec.encode(b));
    const double ratio = de / dw;
    est.min_ratio = std::min(est.min_ratio, ratio);
    est.max_ratio = std::max(est.max_ratio, ratio);
    ++est.pairs;
  }
  require(est.pairs >= 1, Errc::degenerate_input,
          "bilip: every sampled pair coincided");
  return est;
}

}  // namespace jpool
