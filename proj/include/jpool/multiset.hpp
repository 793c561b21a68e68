#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "jpool/error.hpp"

namespace jpool {

using Point = std::vector<double>;

double linf_dist(const Point& a, const Point& b);

// Finite multiset of points in R^d. Element order is written order; equality
// and the metric go through the canonical (lexicographically sorted) form.
class Multiset {
public:
  // Empty multiset of the given dimension. Only decode paths produce these;
  // the metric/separation operations all require at least one element.
  explicit Multiset(std::size_t dim);
  Multiset(std::size_t dim, std::vector<Point> elements);

  static Multiset from_flat(std::size_t dim, std::span<const double> flat);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return elements_.size(); }
  bool empty() const { return elements_.empty(); }
  const Point& operator[](std::size_t i) const { return elements_[i]; }
  const std::vector<Point>& elements() const { return elements_; }
  std::vector<double> flat() const;

  Multiset canonicalized() const;
  bool is_canonical() const;

  // Equality of the underlying multisets, i.e. canonical forms match exactly.
  friend bool operator==(const Multiset& a, const Multiset& b);
  friend bool operator!=(const Multiset& a, const Multiset& b) {
    return !(a == b);
  }

private:
  std::size_t dim_;
  std::vector<Point> elements_;
};

// Matching distance: min over pairings of the sum of pointwise l-inf
// distances. Requires equal sizes and dimensions.
double wasserstein_distance(const Multiset& a, const Multiset& b);

// Exhaustive reference for the above; refuses n > 8.
double wasserstein_bruteforce(const Multiset& a, const Multiset& b);

// Optimal matching with every matched pair within tol (l-inf). False on any
// size/dimension mismatch rather than throwing: "not even comparable".
bool approx_equal(const Multiset& a, const Multiset& b, double tol = 1e-9);

// Smallest pairwise l-inf distance; needs n >= 2. Zero when elements repeat.
double min_separation(const Multiset& a);

struct SeparationStats {
  double min_separation = 0.0;
  double max_pairwise = 0.0;
  // min_separation / max_pairwise; 0 when all points coincide.
  double normalized = 0.0;
};

struct SeparationReport {
  std::vector<SeparationStats> per_multiset;
  double domain_min_separation = 0.0;  // min of min_separation over the set
  double domain_min_normalized = 0.0;
};

SeparationStats separation_stats(const Multiset& a);
SeparationReport separation_report(const std::vector<Multiset>& data);

// Internal assignment solver, exposed for testing: square cost matrix,
// returns the column matched to each row; total cost is the caller's sum.
std::vector<std::size_t> solve_assignment(
    const std::vector<std::vector<double>>& cost);

}  // namespace jpool
