#pragma once

#include <cstdint>
#include <vector>

namespace jpool {

// Counter-based generator: draw i of stream s is splitmix64(base(seed,s) + i).
// No hidden state beyond the counter, so runs are reproducible across
// platforms and independent of call interleaving once streams are split.
class CounterRng {
public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0) noexcept
      : base_(mix(seed + 0x9E3779B97F4A7C15ULL * (stream + 1))), counter_(0) {}

  std::uint64_t next_u64() noexcept { return mix(base_ + ++counter_ * kGamma); }

  // Uniform in [0,1), 53 random bits.
  double next_double() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) noexcept {
    return lo + (hi - lo) * next_double();
  }

  // Uniform in [0, n). Rejection-free modulo is fine here: n is tiny compared
  // with 2^64, the bias is far below anything observable.
  std::uint64_t next_below(std::uint64_t n) noexcept {
    return n == 0 ? 0 : next_u64() % n;
  }

  // Derived stream, independent of this one for all practical purposes.
  CounterRng fork(std::uint64_t stream) const noexcept {
    return CounterRng(base_, stream);
  }

  template <class T>
  void shuffle(std::vector<T>& v) noexcept {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(next_below(i));
      using std::swap;
      swap(v[i - 1], v[j]);
    }
  }

private:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

  static std::uint64_t mix(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
  }

  std::uint64_t base_;
  std::uint64_t counter_;
};

}  // namespace jpool
