#include "jpool/janossy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace jpool {

// ---------------------------------------------------------------------------
// SymmetrizedFunction

SymmetrizedFunction::SymmetrizedFunction(
    std::shared_ptr<const CpwlFunction> base, std::size_t arity)
    : base_(std::move(base)), arity_(arity) {
  require(base_ != nullptr, Errc::invalid_argument, "symmetrize: null base");
  require(arity_ >= 1, Errc::invalid_argument, "symmetrize: arity must be >= 1");
  require(base_->input_dim() % arity_ == 0, Errc::dimension_mismatch,
          "symmetrize: input dim not divisible by arity");
  block_ = base_->input_dim() / arity_;
  std::vector<std::size_t> p(arity_);
  std::iota(p.begin(), p.end(), std::size_t{0});
  do {
    perms_.push_back(p);
  } while (std::next_permutation(p.begin(), p.end()));
}

std::vector<double> SymmetrizedFunction::permuted(
    std::span<const double> x, std::span<const std::size_t> perm) const {
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < arity_; ++i)
    std::copy_n(x.begin() + perm[i] * block_, block_, out.begin() + i * block_);
  return out;
}

std::vector<Rational> SymmetrizedFunction::permuted_exact(
    std::span<const Rational> x, std::span<const std::size_t> perm) const {
  std::vector<Rational> out(x.size());
  for (std::size_t i = 0; i < arity_; ++i)
    std::copy_n(x.begin() + perm[i] * block_, block_, out.begin() + i * block_);
  return out;
}

std::vector<double> SymmetrizedFunction::evaluate(
    std::span<const double> x) const {
  require(x.size() == input_dim(), Errc::dimension_mismatch,
          "symmetrized: input dimension mismatch");
  KahanSum acc(output_dim());
  for (const auto& p : perms_) acc.add(base_->evaluate(permuted(x, p)));
  return acc.value();
}

std::vector<Rational> SymmetrizedFunction::evaluate_exact(
    std::span<const Rational> x) const {
  require(x.size() == input_dim(), Errc::dimension_mismatch,
          "symmetrized: input dimension mismatch");
  std::vector<Rational> acc(output_dim());
  for (const auto& p : perms_) {
    auto v = base_->evaluate_exact(permuted_exact(x, p));
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += v[i];
  }
  return acc;
}

std::pair<AffineMap, RegionId> SymmetrizedFunction::local_affine(
    std::span<const double> x) const {
  require(x.size() == input_dim(), Errc::dimension_mismatch,
          "symmetrized: input dimension mismatch");
  const std::size_t n = input_dim();
  AffineMap sum(output_dim(), n);
  RegionId id;
  for (const auto& p : perms_) {
    // Slot permutation as a matrix: row (i*block+t) picks x[p[i]*block+t].
    AffineMap pmat(n, n);
    for (std::size_t i = 0; i < arity_; ++i)
      for (std::size_t t = 0; t < block_; ++t)
        pmat.at(i * block_ + t, p[i] * block_ + t) = 1.0;
    auto [law, base_id] = base_->local_affine(permuted(x, p));
    AffineMap term = composed(law, pmat);
    for (std::size_t i = 0; i < sum.weights.size(); ++i)
      sum.weights[i] += term.weights[i];
    for (std::size_t i = 0; i < sum.bias.size(); ++i)
      sum.bias[i] += term.bias[i];
    id.key.insert(id.key.end(), base_id.key.begin(), base_id.key.end());
  }
  return {std::move(sum), std::move(id)};
}

StabilityRadius SymmetrizedFunction::stability_radius(
    std::span<const double> x) const {
  StabilityRadius out{std::numeric_limits<double>::infinity(), false};
  for (const auto& p : perms_) {
    StabilityRadius r = base_->stability_radius(permuted(x, p));
    if (r.on_boundary) return {0.0, true};
    out.value = std::min(out.value, r.value);
  }
  return out;
}

double SymmetrizedFunction::region_clearance_l1(
    std::span<const double> x) const {
  double out = std::numeric_limits<double>::infinity();
  for (const auto& p : perms_)
    out = std::min(out, base_->region_clearance_l1(permuted(x, p)));
  return out;
}

RegionCover SymmetrizedFunction::region_cover(std::span<const double> x) const {
  RegionCover cover;
  for (const auto& p : perms_) {
    RegionCover c = base_->region_cover(permuted(x, p));
    cover.slots.insert(cover.slots.end(),
                       std::make_move_iterator(c.slots.begin()),
                       std::make_move_iterator(c.slots.end()));
  }
  return cover;
}

std::shared_ptr<SymmetrizedFunction> symmetrize(
    std::shared_ptr<const CpwlFunction> f, std::size_t arity) {
  return std::make_shared<SymmetrizedFunction>(std::move(f), arity);
}

// ---------------------------------------------------------------------------
// Pooling

void PoolingSpec::validate() const {
  require(f != nullptr, Errc::invalid_argument, "pooling: null function");
  require(arity >= 1, Errc::invalid_argument, "pooling: arity must be >= 1");
  require(count >= arity, Errc::invalid_argument,
          "pooling: need at least arity points");
  require(point_dim >= 1, Errc::invalid_argument,
          "pooling: point dim must be >= 1");
  require(f->input_dim() == arity * point_dim, Errc::dimension_mismatch,
          "pooling: function consumes arity*point_dim coordinates");
}

namespace {

// Canonical internal order: lexicographically descending point blocks. Any
// reordering of the input produces the same buffer, so pooled sums match
// bit for bit.
std::vector<double> sorted_desc(std::span<const double> flat, std::size_t n,
                                std::size_t d) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto block = [&](std::size_t i) {
    return std::span<const double>(flat.data() + i * d, d);
  };
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::lexicographical_compare(block(b).begin(), block(b).end(),
                                        block(a).begin(), block(a).end());
  });
  std::vector<double> out(flat.size());
  for (std::size_t i = 0; i < n; ++i)
    std::copy_n(flat.begin() + order[i] * d, d, out.begin() + i * d);
  return out;
}

void check_flat(const PoolingSpec& spec, std::size_t got) {
  require(got == spec.count * spec.point_dim, Errc::size_mismatch,
          "pooling: flat input length != count * point_dim");
}

}  // namespace

std::vector<double> janossy_pool(const PoolingSpec& spec,
                                 std::span<const double> flat) {
  spec.validate();
  check_flat(spec, flat.size());
  const std::vector<double> pts = sorted_desc(flat, spec.count, spec.point_dim);
  const CpwlFunction& f = *spec.f;
  return pooling::sum_ascending_symmetrized(
      [&](std::span<const double> tuple) { return f.evaluate(tuple); },
      spec.arity, spec.count, spec.point_dim, pts, f.output_dim());
}

std::vector<double> janossy_pool_permutations(const PoolingSpec& spec,
                                              std::span<const double> flat) {
  spec.validate();
  check_flat(spec, flat.size());
  const CpwlFunction& f = *spec.f;
  return pooling::sum_permutations(
      [&](std::span<const double> tuple) { return f.evaluate(tuple); },
      spec.arity, spec.count, spec.point_dim, flat, f.output_dim());
}

std::vector<Rational> janossy_pool_exact(const PoolingSpec& spec,
                                         std::span<const Rational> flat) {
  spec.validate();
  check_flat(spec, flat.size());
  const std::size_t k = spec.arity, n = spec.count, d = spec.point_dim;
  std::vector<Rational> acc(spec.f->output_dim());
  std::vector<std::size_t> perm(k);
  std::vector<Rational> tuple(k * d);
  pooling::for_each_combination(n, k, [&](std::span<const std::size_t> idx) {
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    do {
      for (std::size_t j = 0; j < k; ++j)
        std::copy_n(flat.begin() + idx[perm[j]] * d, d, tuple.begin() + j * d);
      auto v = spec.f->evaluate_exact(tuple);
      for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += v[i];
    } while (std::next_permutation(perm.begin(), perm.end()));
  });
  return acc;
}

InvarianceReport invariance_check(const PoolingSpec& spec,
                                  std::span<const double> flat,
                                  std::size_t trials, std::uint64_t seed) {
  spec.validate();
  check_flat(spec, flat.size());
  const std::vector<double> baseline = janossy_pool(spec, flat);

  CounterRng rng(seed, /*stream=*/7);
  std::vector<std::size_t> order(spec.count);
  InvarianceReport rep;
  rep.trials = trials;
  std::vector<double> shuffled(flat.size());
  for (std::size_t t = 0; t < trials; ++t) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(order);
    for (std::size_t i = 0; i < order.size(); ++i)
      std::copy_n(flat.begin() + order[i] * spec.point_dim, spec.point_dim,
                  shuffled.begin() + i * spec.point_dim);
    const std::vector<double> v = janossy_pool(spec, shuffled);
    rep.max_deviation = std::max(rep.max_deviation, linf_diff(baseline, v));
  }
  return rep;
}

}  // namespace jpool
