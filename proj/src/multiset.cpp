#include "jpool/multiset.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "jpool/rational.hpp"

namespace jpool {

double linf_dist(const Point& a, const Point& b) {
  require(a.size() == b.size(), Errc::dimension_mismatch,
          "linf_dist: dimension mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::fabs(a[i] - b[i]));
  return m;
}

Multiset::Multiset(std::size_t dim) : dim_(dim) {
  require(dim >= 1, Errc::invalid_argument, "Multiset: dim must be >= 1");
}

Multiset::Multiset(std::size_t dim, std::vector<Point> elements)
    : dim_(dim), elements_(std::move(elements)) {
  require(dim >= 1, Errc::invalid_argument, "Multiset: dim must be >= 1");
  for (const Point& p : elements_) {
    require(p.size() == dim_, Errc::dimension_mismatch,
            "Multiset: element dimension mismatch");
    for (double x : p)
      require(std::isfinite(x), Errc::invalid_argument,
              "Multiset: non-finite coordinate");
  }
}

Multiset Multiset::from_flat(std::size_t dim, std::span<const double> flat) {
  require(dim >= 1, Errc::invalid_argument, "from_flat: dim must be >= 1");
  require(flat.size() % dim == 0, Errc::size_mismatch,
          "from_flat: length not a multiple of dim");
  std::vector<Point> pts(flat.size() / dim);
  for (std::size_t i = 0; i < pts.size(); ++i)
    pts[i].assign(flat.begin() + i * dim, flat.begin() + (i + 1) * dim);
  return Multiset(dim, std::move(pts));
}

std::vector<double> Multiset::flat() const {
  std::vector<double> out;
  out.reserve(size() * dim_);
  for (const Point& p : elements_) out.insert(out.end(), p.begin(), p.end());
  return out;
}

Multiset Multiset::canonicalized() const {
  Multiset c = *this;
  std::sort(c.elements_.begin(), c.elements_.end());
  return c;
}

bool Multiset::is_canonical() const {
  return std::is_sorted(elements_.begin(), elements_.end());
}

bool operator==(const Multiset& a, const Multiset& b) {
  if (a.dim_ != b.dim_ || a.elements_.size() != b.elements_.size())
    return false;
  return a.canonicalized().elements_ == b.canonicalized().elements_;
}

namespace {

void check_comparable(const Multiset& a, const Multiset& b) {
  require(a.dim() == b.dim(), Errc::dimension_mismatch,
          "distance: dimension mismatch");
  require(a.size() == b.size(), Errc::size_mismatch,
          "distance: size mismatch");
  require(a.size() >= 1, Errc::invalid_argument, "distance: empty multiset");
}

std::vector<std::vector<double>> cost_matrix(const Multiset& a,
                                             const Multiset& b) {
  std::size_t n = a.size();
  std::vector<std::vector<double>> c(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) c[i][j] = linf_dist(a[i], b[j]);
  return c;
}

// Costs are doubles, hence dyadic rationals; summing and comparing them
// exactly and rounding once makes the solver and the factorial oracle agree
// bit for bit even when two matchings tie in the low mantissa bits.
Rational matched_total_exact(const std::vector<std::vector<double>>& c,
                             const std::vector<std::size_t>& match) {
  Rational s = 0;
  for (std::size_t i = 0; i < c.size(); ++i) s += to_rational(c[i][match[i]]);
  return s;
}

}  // namespace

// Augmenting-path assignment with potentials, O(n^3). Rows are assigned one
// at a time; `way` remembers the path used to reach each column. Reduced
// costs are kept as exact rationals so ulp-sized ties never flip a choice.
std::vector<std::size_t> solve_assignment(
    const std::vector<std::vector<double>>& cost) {
  const std::size_t n = cost.size();
  require(n >= 1, Errc::invalid_argument, "assignment: empty cost matrix");
  for (const auto& row : cost) {
    require(row.size() == n, Errc::size_mismatch,
            "assignment: matrix not square");
    for (double x : row)
      require(std::isfinite(x), Errc::invalid_argument,
              "assignment: non-finite cost");
  }

  std::vector<std::vector<Rational>> c(n, std::vector<Rational>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) c[i][j] = to_rational(cost[i][j]);

  // 1-based with a dummy column 0, the classic formulation.
  std::vector<Rational> u(n + 1), v(n + 1);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);

  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<Rational> minv(n + 1);
    std::vector<char> has_min(n + 1, false), used(n + 1, false);
    do {
      used[j0] = true;
      std::size_t i0 = p[j0], j1 = 0;
      Rational delta;
      bool has_delta = false;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        Rational cur = c[i0 - 1][j - 1] - u[i0] - v[j];
        if (!has_min[j] || cur < minv[j]) {
          minv[j] = std::move(cur);
          has_min[j] = true;
          way[j] = j0;
        }
        if (!has_delta || minv[j] < delta) {
          delta = minv[j];
          has_delta = true;
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else if (has_min[j]) {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }

  std::vector<std::size_t> match(n);
  for (std::size_t j = 1; j <= n; ++j) match[p[j] - 1] = j - 1;
  return match;
}

double wasserstein_distance(const Multiset& a, const Multiset& b) {
  check_comparable(a, b);
  if (a.size() == 1) return linf_dist(a[0], b[0]);
  auto c = cost_matrix(a, b);
  return to_double(matched_total_exact(c, solve_assignment(c)));
}

double wasserstein_bruteforce(const Multiset& a, const Multiset& b) {
  check_comparable(a, b);
  require(a.size() <= 8, Errc::domain_violation,
          "bruteforce: n > 8 would enumerate too many matchings");
  auto c = cost_matrix(a, b);
  std::vector<std::size_t> perm(a.size());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rational best;
  bool first = true;
  do {
    Rational s = matched_total_exact(c, perm);
    if (first || s < best) {
      best = std::move(s);
      first = false;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return to_double(best);
}

bool approx_equal(const Multiset& a, const Multiset& b, double tol) {
  require(tol >= 0.0 && std::isfinite(tol), Errc::invalid_argument,
          "approx_equal: tol must be finite and >= 0");
  if (a.dim() != b.dim() || a.size() != b.size()) return false;
  if (a.empty()) return true;
  auto c = cost_matrix(a, b);
  auto match = solve_assignment(c);
  // The min-sum matching is not always the min-max one, so refine: accept iff
  // a perfect matching exists inside the tol-threshold graph.
  double worst = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i)
    worst = std::max(worst, c[i][match[i]]);
  if (worst <= tol) return true;

  // Bipartite matching on edges with cost <= tol (Kuhn's algorithm).
  std::size_t n = a.size();
  std::vector<std::vector<std::size_t>> adj(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (c[i][j] <= tol) adj[i].push_back(j);
  std::vector<int> owner(n, -1);
  std::vector<char> seen;
  auto try_kuhn = [&](auto&& self, std::size_t i) -> bool {
    for (std::size_t j : adj[i]) {
      if (seen[j]) continue;
      seen[j] = true;
      if (owner[j] < 0 || self(self, static_cast<std::size_t>(owner[j]))) {
        owner[j] = static_cast<int>(i);
        return true;
      }
    }
    return false;
  };
  for (std::size_t i = 0; i < n; ++i) {
    seen.assign(n, false);
    if (!try_kuhn(try_kuhn, i)) return false;
  }
  return true;
}

double min_separation(const Multiset& a) {
  require(a.size() >= 2, Errc::invalid_argument,
          "min_separation: need at least two elements");
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = i + 1; j < a.size(); ++j)
      m = std::min(m, linf_dist(a[i], a[j]));
  return m;
}

SeparationStats separation_stats(const Multiset& a) {
  require(a.size() >= 2, Errc::invalid_argument,
          "separation_stats: need at least two elements");
  SeparationStats s;
  s.min_separation = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = i + 1; j < a.size(); ++j) {
      double d = linf_dist(a[i], a[j]);
      s.min_separation = std::min(s.min_separation, d);
      s.max_pairwise = std::max(s.max_pairwise, d);
    }
  s.normalized = s.max_pairwise > 0.0 ? s.min_separation / s.max_pairwise : 0.0;
  return s;
}

SeparationReport separation_report(const std::vector<Multiset>& data) {
  require(!data.empty(), Errc::invalid_argument,
          "separation_report: empty dataset");
  SeparationReport rep;
  rep.domain_min_separation = std::numeric_limits<double>::infinity();
  rep.domain_min_normalized = std::numeric_limits<double>::infinity();
  rep.per_multiset.reserve(data.size());
  for (const Multiset& a : data) {
    SeparationStats s = separation_stats(a);
    rep.domain_min_separation = std::min(rep.domain_min_separation, s.min_separation);
    rep.domain_min_normalized = std::min(rep.domain_min_normalized, s.normalized);
    rep.per_multiset.push_back(s);
  }
  return rep;
}

}  // namespace jpool
