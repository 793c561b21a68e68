#include "jpool/cpwl.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "jpool/lp.hpp"
#include "jpool/numeric.hpp"

namespace jpool {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

// ---------------------------------------------------------------------------
// AffineMap

void AffineMap::validate() const {
  require(rows >= 1 && cols >= 1, Errc::invalid_argument,
          "AffineMap: empty shape");
  require(weights.size() == rows * cols, Errc::size_mismatch,
          "AffineMap: weight count != rows*cols");
  require(bias.size() == rows, Errc::size_mismatch,
          "AffineMap: bias count != rows");
  for (double v : weights)
    require(std::isfinite(v), Errc::invalid_argument,
            "AffineMap: non-finite weight");
  for (double v : bias)
    require(std::isfinite(v), Errc::invalid_argument,
            "AffineMap: non-finite bias");
}

std::vector<double> AffineMap::apply(std::span<const double> x) const {
  require(x.size() == cols, Errc::dimension_mismatch,
          "AffineMap: input dimension mismatch");
  std::vector<double> out(bias);
  for (std::size_t r = 0; r < rows; ++r) {
    double acc = 0.0;
    const double* w = weights.data() + r * cols;
    for (std::size_t c = 0; c < cols; ++c) acc += w[c] * x[c];
    out[r] += acc;
  }
  return out;
}

std::vector<Rational> AffineMap::apply_exact(
    std::span<const Rational> x) const {
  require(x.size() == cols, Errc::dimension_mismatch,
          "AffineMap: input dimension mismatch");
  std::vector<Rational> out(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    Rational acc = to_rational(bias[r]);
    for (std::size_t c = 0; c < cols; ++c)
      acc += to_rational(at(r, c)) * x[c];
    out[r] = acc;
  }
  return out;
}

AffineMap AffineMap::identity(std::size_t n) {
  AffineMap m(n, n);
  for (std::size_t i = 0; i < n; ++i) m.at(i, i) = 1.0;
  return m;
}

AffineMap composed(const AffineMap& outer, const AffineMap& inner) {
  require(outer.cols == inner.rows, Errc::dimension_mismatch,
          "composed: shape mismatch");
  AffineMap m(outer.rows, inner.cols);
  for (std::size_t r = 0; r < outer.rows; ++r) {
    for (std::size_t k = 0; k < outer.cols; ++k) {
      const double w = outer.at(r, k);
      if (w == 0.0) continue;
      for (std::size_t c = 0; c < inner.cols; ++c)
        m.at(r, c) += w * inner.at(k, c);
    }
    double acc = outer.bias[r];
    for (std::size_t k = 0; k < outer.cols; ++k)
      acc += outer.at(r, k) * inner.bias[k];
    m.bias[r] = acc;
  }
  return m;
}

// ---------------------------------------------------------------------------
// HPolytope

void HPolytope::validate(std::size_t expected_dim) const {
  require(!normals.empty(), Errc::invalid_argument,
          "HPolytope: no constraints");
  require(normals.size() == offsets.size(), Errc::size_mismatch,
          "HPolytope: normals/offsets length mismatch");
  for (const auto& n : normals) {
    require(n.size() == expected_dim, Errc::dimension_mismatch,
            "HPolytope: constraint dimension mismatch");
    for (double v : n)
      require(std::isfinite(v), Errc::invalid_argument,
              "HPolytope: non-finite normal");
  }
  for (double v : offsets)
    require(std::isfinite(v), Errc::invalid_argument,
            "HPolytope: non-finite offset");
}

double HPolytope::margin(std::span<const double> x) const {
  double m = kInf;
  for (std::size_t j = 0; j < normals.size(); ++j) {
    double s = offsets[j];
    for (std::size_t i = 0; i < x.size(); ++i) s += normals[j][i] * x[i];
    m = std::min(m, s);
  }
  return m;
}

Rational HPolytope::margin_exact(std::span<const Rational> x) const {
  Rational m;
  bool first = true;
  for (std::size_t j = 0; j < normals.size(); ++j) {
    Rational s = to_rational(offsets[j]);
    for (std::size_t i = 0; i < x.size(); ++i)
      s += to_rational(normals[j][i]) * x[i];
    if (first || s < m) {
      m = s;
      first = false;
    }
  }
  return m;
}

// ---------------------------------------------------------------------------
// RegionCover

bool RegionCover::subset(const RegionCover& inner, const RegionCover& outer) {
  if (inner.slots.size() != outer.slots.size()) return false;
  for (std::size_t s = 0; s < inner.slots.size(); ++s) {
    if (!std::includes(outer.slots[s].begin(), outer.slots[s].end(),
                       inner.slots[s].begin(), inner.slots[s].end()))
      return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// ExplicitPartition

ExplicitPartition::ExplicitPartition(std::vector<HPolytope> cells,
                                     std::vector<AffineMap> maps,
                                     std::vector<double> box_lo,
                                     std::vector<double> box_hi)
    : cells_(std::move(cells)),
      maps_(std::move(maps)),
      box_lo_(std::move(box_lo)),
      box_hi_(std::move(box_hi)) {
  const std::size_t d = box_lo_.size();
  require(d >= 1, Errc::invalid_argument, "partition: empty box");
  require(box_hi_.size() == d, Errc::dimension_mismatch,
          "partition: box corner dimension mismatch");
  for (std::size_t i = 0; i < d; ++i)
    require(box_lo_[i] < box_hi_[i], Errc::invalid_argument,
            "partition: box must have positive extent");
  require(!cells_.empty(), Errc::invalid_argument, "partition: no cells");
  require(cells_.size() == maps_.size(), Errc::size_mismatch,
          "partition: cells/maps count mismatch");
  out_dim_ = maps_[0].rows;
  for (const auto& c : cells_) c.validate(d);
  for (const auto& m : maps_) {
    m.validate();
    require(m.cols == d, Errc::dimension_mismatch,
            "partition: map input dimension mismatch");
    require(m.rows == out_dim_, Errc::dimension_mismatch,
            "partition: inconsistent output dimensions");
  }

  box_forms_.resize(cells_.size());
  for (std::size_t ci = 0; ci < cells_.size(); ++ci) {
    BoxForm& bf = box_forms_[ci];
    bf.lo.assign(d, -kInf);
    bf.hi.assign(d, kInf);
    bf.is_box = true;
    for (std::size_t j = 0; j < cells_[ci].normals.size() && bf.is_box; ++j) {
      const auto& a = cells_[ci].normals[j];
      std::size_t nz = 0, axis = 0;
      for (std::size_t t = 0; t < d; ++t)
        if (a[t] != 0.0) {
          ++nz;
          axis = t;
        }
      if (nz != 1) {
        bf.is_box = false;
        break;
      }
      const double bound = -cells_[ci].offsets[j] / a[axis];
      if (a[axis] > 0.0)
        bf.lo[axis] = std::max(bf.lo[axis], bound);
      else
        bf.hi[axis] = std::min(bf.hi[axis], bound);
    }
    if (!bf.is_box) {
      bf.lo.clear();
      bf.hi.clear();
    }
  }
}

std::vector<std::size_t> ExplicitPartition::locate(std::span<const double> x,
                                                   double tol) const {
  require(x.size() == input_dim(), Errc::dimension_mismatch,
          "locate: point dimension mismatch");
  std::vector<std::size_t> hits;
  for (std::size_t i = 0; i < cells_.size(); ++i)
    if (cells_[i].contains(x, tol)) hits.push_back(i);
  require(!hits.empty(), Errc::domain_violation,
          "locate: point lies in no cell");
  return hits;
}

std::vector<std::size_t> ExplicitPartition::locate_exact(
    std::span<const Rational> x) const {
  require(x.size() == input_dim(), Errc::dimension_mismatch,
          "locate: point dimension mismatch");
  std::vector<std::size_t> hits;
  for (std::size_t i = 0; i < cells_.size(); ++i)
    if (cells_[i].margin_exact(x) >= 0) hits.push_back(i);
  require(!hits.empty(), Errc::domain_violation,
          "locate: point lies in no cell");
  return hits;
}

double ExplicitPartition::l1_distance_to_cell(std::span<const double> v,
                                              std::size_t i) const {
  require(i < cells_.size(), Errc::invalid_argument,
          "l1_distance_to_cell: bad cell index");
  require(v.size() == input_dim(), Errc::dimension_mismatch,
          "l1_distance_to_cell: point dimension mismatch");

  const BoxForm& bf = box_forms_[i];
  if (bf.is_box) {
    double dist = 0.0;
    for (std::size_t t = 0; t < v.size(); ++t) {
      require(bf.lo[t] <= bf.hi[t], Errc::domain_violation,
              "l1_distance_to_cell: empty cell");
      if (v[t] < bf.lo[t])
        dist += bf.lo[t] - v[t];
      else if (v[t] > bf.hi[t])
        dist += v[t] - bf.hi[t];
    }
    return dist;
  }

  // min sum(t) s.t. v + (u - w) in cell, |u - w| <= t componentwise.
  const std::size_t d = v.size();
  const auto& cell = cells_[i];
  const std::size_t nvar = 3 * d;
  std::vector<std::vector<double>> A;
  std::vector<double> b;
  for (std::size_t t = 0; t < d; ++t) {
    std::vector<double> r1(nvar, 0.0), r2(nvar, 0.0);
    r1[t] = 1.0;
    r1[d + t] = -1.0;
    r1[2 * d + t] = -1.0;
    r2[t] = -1.0;
    r2[d + t] = 1.0;
    r2[2 * d + t] = -1.0;
    A.push_back(std::move(r1));
    b.push_back(0.0);
    A.push_back(std::move(r2));
    b.push_back(0.0);
  }
  for (std::size_t j = 0; j < cell.normals.size(); ++j) {
    std::vector<double> row(nvar, 0.0);
    double rhs = cell.offsets[j];
    for (std::size_t t = 0; t < d; ++t) {
      row[t] = -cell.normals[j][t];
      row[d + t] = cell.normals[j][t];
      rhs += cell.normals[j][t] * v[t];
    }
    A.push_back(std::move(row));
    b.push_back(rhs);
  }
  std::vector<double> c(nvar, 0.0);
  for (std::size_t t = 0; t < d; ++t) c[2 * d + t] = 1.0;

  LpResult res = solve_lp_leq(A, b, c);
  require(res.status != LpResult::Status::infeasible, Errc::domain_violation,
          "l1_distance_to_cell: empty cell");
  require(res.status == LpResult::Status::optimal, Errc::internal,
          "l1_distance_to_cell: unbounded distance LP");
  return std::max(0.0, res.value);
}

std::vector<double> ExplicitPartition::evaluate(
    std::span<const double> x) const {
  return maps_[locate(x).front()].apply(x);
}

std::vector<Rational> ExplicitPartition::evaluate_exact(
    std::span<const Rational> x) const {
  return maps_[locate_exact(x).front()].apply_exact(x);
}

std::pair<AffineMap, RegionId> ExplicitPartition::local_affine(
    std::span<const double> x) const {
  const std::size_t cell = locate(x).front();
  return {maps_[cell], RegionId{{static_cast<std::int32_t>(cell)}}};
}

StabilityRadius ExplicitPartition::stability_radius(
    std::span<const double> x) const {
  const auto hits = locate(x);
  if (hits.size() > 1) return {0.0, true};
  const std::size_t own = hits.front();
  double dmin = kInf;
  for (std::size_t i = 0; i < cells_.size(); ++i) {
    if (i == own) continue;
    dmin = std::min(dmin, l1_distance_to_cell(x, i));
  }
  // l1 distance D shields the l-inf ball of radius D/dim; halve for safety.
  double r = dmin / 2.0 / static_cast<double>(input_dim());
  for (std::size_t t = 0; t < x.size(); ++t) {
    r = std::min(r, x[t] - box_lo_[t]);
    r = std::min(r, box_hi_[t] - x[t]);
  }
  r = std::max(0.0, r);
  return {r, r == 0.0 && dmin == 0.0};
}

double ExplicitPartition::region_clearance_l1(std::span<const double> x) const {
  const auto hits = locate(x);
  double dmin = kInf;
  std::size_t next = 0;
  for (std::size_t i = 0; i < cells_.size(); ++i) {
    if (next < hits.size() && hits[next] == i) {
      ++next;
      continue;
    }
    dmin = std::min(dmin, l1_distance_to_cell(x, i));
  }
  double r = dmin / 2.0;
  // The l1 ball must also stay inside the covered box.
  for (std::size_t t = 0; t < x.size(); ++t) {
    r = std::min(r, x[t] - box_lo_[t]);
    r = std::min(r, box_hi_[t] - x[t]);
  }
  return std::max(0.0, r);
}

RegionCover ExplicitPartition::region_cover(std::span<const double> x) const {
  const auto hits = locate(x);
  RegionCover cover;
  cover.slots.emplace_back();
  for (std::size_t i : hits)
    cover.slots.back().push_back(static_cast<std::int32_t>(i));
  return cover;
}

// ---------------------------------------------------------------------------
// ReluNet

ReluNet::ReluNet(std::vector<AffineMap> layers) : layers_(std::move(layers)) {
  require(!layers_.empty(), Errc::invalid_argument, "ReluNet: no layers");
  for (const auto& l : layers_) l.validate();
  for (std::size_t i = 1; i < layers_.size(); ++i)
    require(layers_[i].cols == layers_[i - 1].rows, Errc::dimension_mismatch,
            "ReluNet: layer shapes do not chain");
  for (std::size_t i = 0; i + 1 < layers_.size(); ++i)
    hidden_units_ += layers_[i].rows;
}

ReluNet ReluNet::random(std::size_t input_dim,
                        const std::vector<std::size_t>& hidden,
                        std::size_t output_dim, CounterRng& rng) {
  require(input_dim >= 1 && output_dim >= 1, Errc::invalid_argument,
          "ReluNet::random: empty shape");
  std::vector<AffineMap> layers;
  std::size_t prev = input_dim;
  auto fill = [&](std::size_t rows) {
    AffineMap m(rows, prev);
    for (double& w : m.weights) w = rng.uniform(-1.0, 1.0);
    for (double& b : m.bias) b = rng.uniform(-0.5, 0.5);
    prev = rows;
    return m;
  };
  for (std::size_t h : hidden) {
    require(h >= 1, Errc::invalid_argument, "ReluNet::random: empty layer");
    layers.push_back(fill(h));
  }
  layers.push_back(fill(output_dim));
  return ReluNet(std::move(layers));
}

std::vector<std::int32_t> ReluNet::pattern(std::span<const double> x) const {
  require(x.size() == input_dim(), Errc::dimension_mismatch,
          "ReluNet: input dimension mismatch");
  std::vector<std::int32_t> bits;
  bits.reserve(hidden_units_);
  std::vector<double> a(x.begin(), x.end());
  for (std::size_t l = 0; l + 1 < layers_.size(); ++l) {
    std::vector<double> z = layers_[l].apply(a);
    for (double& v : z) {
      bits.push_back(v > 0.0 ? 1 : 0);
      v = std::max(v, 0.0);
    }
    a = std::move(z);
  }
  return bits;
}

std::vector<double> ReluNet::evaluate(std::span<const double> x) const {
  require(x.size() == input_dim(), Errc::dimension_mismatch,
          "ReluNet: input dimension mismatch");
  std::vector<double> a(x.begin(), x.end());
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    a = layers_[l].apply(a);
    if (l + 1 < layers_.size())
      for (double& v : a) v = std::max(v, 0.0);
  }
  return a;
}

std::vector<Rational> ReluNet::evaluate_exact(
    std::span<const Rational> x) const {
  require(x.size() == input_dim(), Errc::dimension_mismatch,
          "ReluNet: input dimension mismatch");
  std::vector<Rational> a(x.begin(), x.end());
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    a = layers_[l].apply_exact(a);
    if (l + 1 < layers_.size())
      for (Rational& v : a)
        if (v < 0) v = 0;
  }
  return a;
}

std::pair<AffineMap, RegionId> ReluNet::local_affine(
    std::span<const double> x) const {
  require(x.size() == input_dim(), Errc::dimension_mismatch,
          "ReluNet: input dimension mismatch");
  std::vector<std::int32_t> bits;
  bits.reserve(hidden_units_);
  std::vector<double> a(x.begin(), x.end());
  AffineMap eff = layers_[0];
  for (std::size_t l = 0; l + 1 < layers_.size(); ++l) {
    std::vector<double> z = layers_[l].apply(a);
    for (std::size_t j = 0; j < z.size(); ++j) {
      const bool on = z[j] > 0.0;
      bits.push_back(on ? 1 : 0);
      if (!on) {
        for (std::size_t c = 0; c < eff.cols; ++c) eff.at(j, c) = 0.0;
        eff.bias[j] = 0.0;
        z[j] = 0.0;
      }
    }
    eff = composed(layers_[l + 1], eff);
    a = std::move(z);
  }
  return {std::move(eff), RegionId{std::move(bits)}};
}

StabilityRadius ReluNet::stability_radius(std::span<const double> x) const {
  require(x.size() == input_dim(), Errc::dimension_mismatch,
          "ReluNet: input dimension mismatch");
  if (hidden_units_ == 0) return {kInf, false};

  // Forward pass with the effective pre-activation jacobian per layer; each
  // unit's flip is at l-inf distance >= |z_j| / ||row_j||_1 while masks hold.
  double min_margin = kInf;
  std::vector<double> a(x.begin(), x.end());
  AffineMap eff = AffineMap::identity(input_dim());
  for (std::size_t l = 0; l + 1 < layers_.size(); ++l) {
    AffineMap pre = composed(layers_[l], eff);
    std::vector<double> z = layers_[l].apply(a);
    for (std::size_t j = 0; j < z.size(); ++j) {
      double row_norm = 0.0;
      for (std::size_t c = 0; c < pre.cols; ++c)
        row_norm += std::fabs(pre.at(j, c));
      if (row_norm == 0.0) continue;  // constant unit, never flips
      if (z[j] == 0.0) return {0.0, true};
      min_margin = std::min(min_margin, std::fabs(z[j]) / row_norm);
    }
    // Mask the jacobian rows of inactive units before chaining deeper.
    for (std::size_t j = 0; j < z.size(); ++j) {
      if (z[j] <= 0.0) {
        for (std::size_t c = 0; c < pre.cols; ++c) pre.at(j, c) = 0.0;
        pre.bias[j] = 0.0;
        z[j] = 0.0;
      }
    }
    eff = std::move(pre);
    a = std::move(z);
  }
  if (min_margin == kInf) return {kInf, false};

  double r = min_margin * (1.0 - 1e-9);
  const auto base = pattern(x);
  std::vector<double> probe(x.begin(), x.end());
  for (int rounds = 0; rounds < 60; ++rounds) {
    bool ok = true;
    for (std::size_t t = 0; t < probe.size() && ok; ++t) {
      for (double sgn : {1.0, -1.0}) {
        probe[t] = x[t] + sgn * r;
        if (pattern(probe) != base) {
          ok = false;
          break;
        }
      }
      probe[t] = x[t];
    }
    if (ok) return {r, false};
    r /= 2.0;
  }
  return {0.0, true};
}

double ReluNet::region_clearance_l1(std::span<const double> x) const {
  require(x.size() == input_dim(), Errc::dimension_mismatch,
          "ReluNet: input dimension mismatch");
  if (hidden_units_ == 0) return kInf;
  // Same margins in the l1 geometry: flip distance >= |z_j| / ||row_j||_inf.
  double min_margin = kInf;
  std::vector<double> a(x.begin(), x.end());
  AffineMap eff = AffineMap::identity(input_dim());
  for (std::size_t l = 0; l + 1 < layers_.size(); ++l) {
    AffineMap pre = composed(layers_[l], eff);
    std::vector<double> z = layers_[l].apply(a);
    for (std::size_t j = 0; j < z.size(); ++j) {
      double row_norm = 0.0;
      for (std::size_t c = 0; c < pre.cols; ++c)
        row_norm = std::max(row_norm, std::fabs(pre.at(j, c)));
      if (row_norm == 0.0) continue;
      if (z[j] == 0.0) return 0.0;
      min_margin = std::min(min_margin, std::fabs(z[j]) / row_norm);
    }
    for (std::size_t j = 0; j < z.size(); ++j) {
      if (z[j] <= 0.0) {
        for (std::size_t c = 0; c < pre.cols; ++c) pre.at(j, c) = 0.0;
        pre.bias[j] = 0.0;
        z[j] = 0.0;
      }
    }
    eff = std::move(pre);
    a = std::move(z);
  }
  return min_margin == kInf ? kInf : min_margin / 2.0;
}

RegionCover ReluNet::region_cover(std::span<const double> x) const {
  require(x.size() == input_dim(), Errc::dimension_mismatch,
          "ReluNet: input dimension mismatch");
  const double tol = 1e-12 * (1.0 + linf_norm(x));
  RegionCover cover;
  cover.slots.reserve(hidden_units_);
  std::vector<double> a(x.begin(), x.end());
  for (std::size_t l = 0; l + 1 < layers_.size(); ++l) {
    std::vector<double> z = layers_[l].apply(a);
    for (double& v : z) {
      if (v > tol)
        cover.slots.push_back({1});
      else if (v < -tol)
        cover.slots.push_back({0});
      else
        cover.slots.push_back({0, 1});
      v = std::max(v, 0.0);
    }
    a = std::move(z);
  }
  return cover;
}

// ---------------------------------------------------------------------------
// AffinePrecompose

AffinePrecompose::AffinePrecompose(std::shared_ptr<const CpwlFunction> base,
                                   AffineMap pre)
    : base_(std::move(base)), pre_(std::move(pre)) {
  require(base_ != nullptr, Errc::invalid_argument,
          "AffinePrecompose: null base");
  pre_.validate();
  require(pre_.rows == base_->input_dim(), Errc::dimension_mismatch,
          "AffinePrecompose: map output != base input");
  for (std::size_t r = 0; r < pre_.rows; ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < pre_.cols; ++c) s += std::fabs(pre_.at(r, c));
    row_linf_norm_ = std::max(row_linf_norm_, s);
  }
  for (std::size_t c = 0; c < pre_.cols; ++c) {
    double s = 0.0;
    for (std::size_t r = 0; r < pre_.rows; ++r) s += std::fabs(pre_.at(r, c));
    col_l1_norm_ = std::max(col_l1_norm_, s);
  }
}

std::vector<double> AffinePrecompose::evaluate(std::span<const double> x) const {
  return base_->evaluate(pre_.apply(x));
}

std::vector<Rational> AffinePrecompose::evaluate_exact(
    std::span<const Rational> x) const {
  return base_->evaluate_exact(pre_.apply_exact(x));
}

std::pair<AffineMap, RegionId> AffinePrecompose::local_affine(
    std::span<const double> x) const {
  auto [law, id] = base_->local_affine(pre_.apply(x));
  return {composed(law, pre_), std::move(id)};
}

StabilityRadius AffinePrecompose::stability_radius(
    std::span<const double> x) const {
  const StabilityRadius inner = base_->stability_radius(pre_.apply(x));
  if (row_linf_norm_ == 0.0) return {kInf, false};  // constant pullback
  if (inner.on_boundary) return {0.0, true};
  return {inner.value / row_linf_norm_, false};
}

double AffinePrecompose::region_clearance_l1(std::span<const double> x) const {
  const double inner = base_->region_clearance_l1(pre_.apply(x));
  if (col_l1_norm_ == 0.0) return kInf;
  return inner / col_l1_norm_;
}

RegionCover AffinePrecompose::region_cover(std::span<const double> x) const {
  return base_->region_cover(pre_.apply(x));
}

// ---------------------------------------------------------------------------
// Random grid partition

ExplicitPartition random_grid_partition(std::size_t dim,
                                        std::size_t resolution,
                                        std::size_t output_dim,
                                        CounterRng& rng) {
  require(dim >= 1 && resolution >= 1 && output_dim >= 1,
          Errc::invalid_argument, "random_grid_partition: sizes must be >= 1");
  const std::size_t res = resolution;
  std::size_t total = 1;
  for (std::size_t j = 0; j < dim; ++j) {
    require(total <= std::size_t{2'000'000} / res, Errc::domain_violation,
            "random_grid_partition: too many cells");
    total *= res;
  }

  // out(x) = c + G x + sum_{j,t} w |x_j - knot_t|; per cell the hinges
  // resolve to fixed signs, so facets agree by construction.
  std::vector<double> knots(res - 1);
  for (std::size_t t = 0; t + 1 < res; ++t)
    knots[t] = static_cast<double>(t + 1) / static_cast<double>(res);

  std::vector<double> cst(output_dim), lin(output_dim * dim);
  std::vector<double> hinge(output_dim * dim * (res - 1));
  for (auto& v : cst) v = rng.uniform(-1.0, 1.0);
  for (auto& v : lin) v = rng.uniform(-1.0, 1.0);
  for (auto& v : hinge) {
    v = rng.uniform(-1.0, 1.0);
    if (std::abs(v) < 0.05) v = (v < 0.0 ? -0.05 : 0.05);  // keep facets real
  }

  std::vector<HPolytope> cells;
  std::vector<AffineMap> maps;
  cells.reserve(total);
  maps.reserve(total);
  std::vector<std::size_t> m(dim, 0);
  for (std::size_t c = 0; c < total; ++c) {
    HPolytope cell;
    for (std::size_t j = 0; j < dim; ++j) {
      std::vector<double> up(dim, 0.0), dn(dim, 0.0);
      up[j] = 1.0;
      dn[j] = -1.0;
      cell.normals.push_back(std::move(up));
      cell.offsets.push_back(-(static_cast<double>(m[j]) /
                               static_cast<double>(res)));
      cell.normals.push_back(std::move(dn));
      cell.offsets.push_back(static_cast<double>(m[j] + 1) /
                             static_cast<double>(res));
    }
    AffineMap law(output_dim, dim);
    for (std::size_t r = 0; r < output_dim; ++r) {
      double b = cst[r];
      for (std::size_t j = 0; j < dim; ++j) {
        double wj = lin[r * dim + j];
        for (std::size_t t = 0; t + 1 < res; ++t) {
          const double h = hinge[(r * dim + j) * (res - 1) + t];
          const double sign = (m[j] >= t + 1) ? 1.0 : -1.0;
          wj += sign * h;
          b -= sign * h * knots[t];
        }
        law.at(r, j) = wj;
      }
      law.bias[r] = b;
    }
    cells.push_back(std::move(cell));
    maps.push_back(std::move(law));
    for (std::size_t j = dim; j-- > 0;) {
      if (++m[j] < res) break;
      m[j] = 0;
    }
  }
  return ExplicitPartition(std::move(cells), std::move(maps),
                           std::vector<double>(dim, 0.0),
                           std::vector<double>(dim, 1.0));
}

// ---------------------------------------------------------------------------
// Continuity audit

ContinuityReport continuity_check(const CpwlFunction& f,
                                  std::span<const double> box_lo,
                                  std::span<const double> box_hi,
                                  std::size_t segments, CounterRng& rng,
                                  double tol) {
  const std::size_t d = f.input_dim();
  require(box_lo.size() == d && box_hi.size() == d, Errc::dimension_mismatch,
          "continuity_check: box dimension mismatch");

  ContinuityReport rep;
  auto lerp = [&](const std::vector<double>& a, const std::vector<double>& b,
                  double t) {
    std::vector<double> p(d);
    for (std::size_t i = 0; i < d; ++i) p[i] = a[i] + t * (b[i] - a[i]);
    return p;
  };

  constexpr std::size_t kSteps = 64;
  for (std::size_t s = 0; s < segments; ++s) {
    std::vector<double> a(d), b(d);
    for (std::size_t i = 0; i < d; ++i) {
      a[i] = rng.uniform(box_lo[i], box_hi[i]);
      b[i] = rng.uniform(box_lo[i], box_hi[i]);
    }
    ++rep.segments_checked;

    RegionId prev = f.region_id(a);
    for (std::size_t step = 1; step <= kSteps; ++step) {
      const double t1 = static_cast<double>(step) / kSteps;
      RegionId cur = f.region_id(lerp(a, b, t1));
      if (cur == prev) continue;

      // Bisect to the crossing between the two ids.
      double lo = static_cast<double>(step - 1) / kSteps, hi = t1;
      RegionId lo_id = prev, hi_id = cur;
      for (int it = 0; it < 60 && hi - lo > 1e-15; ++it) {
        const double mid = 0.5 * (lo + hi);
        RegionId mid_id = f.region_id(lerp(a, b, mid));
        if (mid_id == lo_id)
          lo = mid;
        else {
          hi = mid;
          hi_id = std::move(mid_id);
        }
      }
      const std::vector<double> xstar = lerp(a, b, 0.5 * (lo + hi));
      const auto law_lo = f.local_affine(lerp(a, b, lo)).first;
      const auto law_hi = f.local_affine(lerp(a, b, hi)).first;
      const auto v1 = law_lo.apply(xstar);
      const auto v2 = law_hi.apply(xstar);
      const double jump = linf_diff(v1, v2);
      const double scale = 1.0 + std::max(linf_norm(v1), linf_norm(v2));
      ++rep.crossings_checked;
      rep.worst_jump = std::max(rep.worst_jump, jump);
      if (jump > tol * scale) rep.violations.push_back({xstar, jump});
      prev = std::move(cur);
    }
  }
  return rep;
}

}  // namespace jpool
