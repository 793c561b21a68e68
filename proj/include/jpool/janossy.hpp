#pragma once

#include <cstdint>
#include <memory>
#include <numeric>
#include <span>
#include <vector>

#include "jpool/cpwl.hpp"
#include "jpool/numeric.hpp"
#include "jpool/rng.hpp"

namespace jpool {

// f-hat: sum of base over all orderings of its arity-many point slots.
// Symmetric in the slots by construction, and still CPwL.
class SymmetrizedFunction final : public CpwlFunction {
public:
  SymmetrizedFunction(std::shared_ptr<const CpwlFunction> base,
                      std::size_t arity);

  std::size_t input_dim() const override { return base_->input_dim(); }
  std::size_t output_dim() const override { return base_->output_dim(); }
  std::size_t arity() const { return arity_; }
  std::size_t block() const { return block_; }
  const CpwlFunction& base() const { return *base_; }

  // x with point slot i replaced by slot perm[i].
  std::vector<double> permuted(std::span<const double> x,
                               std::span<const std::size_t> perm) const;
  std::vector<Rational> permuted_exact(std::span<const Rational> x,
                                       std::span<const std::size_t> perm) const;

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
  std::size_t arity_;
  std::size_t block_;
  std::vector<std::vector<std::size_t>> perms_;  // lexicographic order
};

std::shared_ptr<SymmetrizedFunction> symmetrize(
    std::shared_ptr<const CpwlFunction> f, std::size_t arity);

// Pooling job description: pool n points of dimension d through a tuple
// function of arity k (f consumes k*d coordinates).
struct PoolingSpec {
  std::size_t arity = 1;      // k
  std::size_t count = 1;      // n
  std::size_t point_dim = 1;  // d
  std::shared_ptr<const CpwlFunction> f;

  void validate() const;
};

namespace pooling {

inline std::uint64_t factorial(std::size_t n) {
  require(n <= 20, Errc::domain_violation, "factorial: argument too large");
  std::uint64_t r = 1;
  for (std::size_t i = 2; i <= n; ++i) r *= i;
  return r;
}

// Visit every ascending k-subset of {0..n-1}.
template <class Visit>
void for_each_combination(std::size_t n, std::size_t k, Visit&& visit) {
  if (k == 0 || k > n) return;
  std::vector<std::size_t> idx(k);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (;;) {
    visit(std::span<const std::size_t>(idx));
    std::size_t i = k;
    while (i > 0 && idx[i - 1] == n - k + (i - 1)) --i;
    if (i == 0) return;
    ++idx[i - 1];
    for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

// Ascending-tuple pooling of a symmetric tuple function: one call per subset.
template <class F>
std::vector<double> sum_ascending_plain(F&& f, std::size_t k, std::size_t n,
                                        std::size_t d,
                                        std::span<const double> pts,
                                        std::size_t out_dim) {
  KahanSum acc(out_dim);
  std::vector<double> tuple(k * d);
  for_each_combination(n, k, [&](std::span<const std::size_t> idx) {
    for (std::size_t j = 0; j < k; ++j)
      std::copy_n(pts.begin() + idx[j] * d, d, tuple.begin() + j * d);
    acc.add(f(std::span<const double>(tuple)));
  });
  return acc.value();
}

// Same, but with the slot symmetrization of f done inline (k! orderings per
// subset). Equivalent to sum_ascending_plain over the symmetrized f.
template <class F>
std::vector<double> sum_ascending_symmetrized(F&& f, std::size_t k,
                                              std::size_t n, std::size_t d,
                                              std::span<const double> pts,
                                              std::size_t out_dim) {
  KahanSum acc(out_dim);
  std::vector<std::size_t> perm(k);
  std::vector<double> tuple(k * d);
  for_each_combination(n, k, [&](std::span<const std::size_t> idx) {
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    do {
      for (std::size_t j = 0; j < k; ++j)
        std::copy_n(pts.begin() + idx[perm[j]] * d, d, tuple.begin() + j * d);
      acc.add(f(std::span<const double>(tuple)));
    } while (std::next_permutation(perm.begin(), perm.end()));
  });
  return acc.value();
}

// Reference form: sum over every ordering of all n points, f applied to the
// first k slots, then normalized by (n-k)!. Only viable for small n.
template <class F>
std::vector<double> sum_permutations(F&& f, std::size_t k, std::size_t n,
                                     std::size_t d, std::span<const double> pts,
                                     std::size_t out_dim) {
  require(n <= 8, Errc::domain_violation,
          "sum_permutations: n > 8 would enumerate too many orderings");
  KahanSum acc(out_dim);
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::vector<double> tuple(k * d);
  do {
    for (std::size_t j = 0; j < k; ++j)
      std::copy_n(pts.begin() + perm[j] * d, d, tuple.begin() + j * d);
    acc.add(f(std::span<const double>(tuple)));
  } while (std::next_permutation(perm.begin(), perm.end()));

  const double norm = static_cast<double>(factorial(n - k));
  std::vector<double> out = acc.value();
  for (double& v : out) v /= norm;
  return out;
}

}  // namespace pooling

// Pooled value of the spec over n points (flat, n*d coordinates). Points are
// put in a canonical internal order first, so the result is bit-identical
// across input orderings.
std::vector<double> janossy_pool(const PoolingSpec& spec,
                                 std::span<const double> flat);

// Reference evaluation straight from the permutation form (n <= 8).
std::vector<double> janossy_pool_permutations(const PoolingSpec& spec,
                                              std::span<const double> flat);

// Exact pooled value over rational points, ascending form.
std::vector<Rational> janossy_pool_exact(const PoolingSpec& spec,
                                         std::span<const Rational> flat);

struct InvarianceReport {
  std::size_t trials = 0;
  double max_deviation = 0.0;
};

// Re-pools `trials` random reorderings of the input and reports the largest
// l-inf deviation from the baseline (0 when invariance is bit-exact).
InvarianceReport invariance_check(const PoolingSpec& spec,
                                  std::span<const double> flat,
                                  std::size_t trials, std::uint64_t seed);

}  // namespace jpool
