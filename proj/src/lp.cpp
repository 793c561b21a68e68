#include "jpool/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "jpool/error.hpp"

namespace jpool {

namespace {

constexpr double kPivotEps = 1e-11;
constexpr std::size_t kMaxIterations = 50000;

}  // namespace

LpResult solve_lp_leq(const std::vector<std::vector<double>>& A,
                      const std::vector<double>& b,
                      const std::vector<double>& c) {
  const std::size_t m = A.size();
  const std::size_t n = c.size();
  require(b.size() == m, Errc::size_mismatch, "lp: |b| != rows(A)");
  double bmax = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    require(A[i].size() == n, Errc::size_mismatch, "lp: ragged A");
    require(std::isfinite(b[i]), Errc::invalid_argument, "lp: non-finite b");
    bmax = std::max(bmax, std::fabs(b[i]));
    for (double v : A[i])
      require(std::isfinite(v), Errc::invalid_argument, "lp: non-finite A");
  }
  for (double v : c)
    require(std::isfinite(v), Errc::invalid_argument, "lp: non-finite c");

  std::size_t n_art = 0;
  for (double v : b)
    if (v < 0.0) ++n_art;

  const std::size_t ncols = n + m + n_art;  // x, slacks, artificials
  std::vector<std::vector<double>> t(m + 1, std::vector<double>(ncols + 1, 0.0));
  std::vector<std::size_t> basis(m);

  std::size_t next_art = n + m;
  for (std::size_t i = 0; i < m; ++i) {
    const double sgn = b[i] < 0.0 ? -1.0 : 1.0;
    for (std::size_t j = 0; j < n; ++j) t[i][j] = sgn * A[i][j];
    t[i][n + i] = sgn;
    t[i][ncols] = sgn * b[i];
    if (b[i] < 0.0) {
      t[i][next_art] = 1.0;
      basis[i] = next_art++;
    } else {
      basis[i] = n + i;
    }
  }

  auto pivot = [&](std::size_t pr, std::size_t pc) {
    const double piv = t[pr][pc];
    for (double& v : t[pr]) v /= piv;
    t[pr][pc] = 1.0;  // avoid piv/piv round-off
    for (std::size_t i = 0; i <= m; ++i) {
      if (i == pr) continue;
      const double f = t[i][pc];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j <= ncols; ++j) t[i][j] -= f * t[pr][j];
      t[i][pc] = 0.0;
    }
    basis[pr] = pc;
  };

  // Rebuild the cost row for objective `cost` against the current basis.
  auto set_cost = [&](const std::vector<double>& cost) {
    for (std::size_t j = 0; j < ncols; ++j) t[m][j] = cost[j];
    t[m][ncols] = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double cb = cost[basis[i]];
      if (cb == 0.0) continue;
      for (std::size_t j = 0; j <= ncols; ++j) t[m][j] -= cb * t[i][j];
    }
  };

  // Bland's rule end to end: lowest eligible entering column, ties on the
  // ratio test broken by lowest basis variable. Terminates without cycling.
  auto iterate = [&](const std::vector<char>& allowed) -> LpResult::Status {
    for (std::size_t iter = 0; iter < kMaxIterations; ++iter) {
      std::size_t pc = ncols;
      for (std::size_t j = 0; j < ncols; ++j) {
        if (allowed[j] && t[m][j] < -kPivotEps) {
          pc = j;
          break;
        }
      }
      if (pc == ncols) return LpResult::Status::optimal;

      std::size_t pr = m;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < m; ++i) {
        if (t[i][pc] <= kPivotEps) continue;
        const double ratio = std::max(0.0, t[i][ncols]) / t[i][pc];
        if (ratio < best - 1e-12 ||
            (ratio < best + 1e-12 && (pr == m || basis[i] < basis[pr]))) {
          best = std::min(best, ratio);
          pr = i;
        }
      }
      if (pr == m) return LpResult::Status::unbounded;
      pivot(pr, pc);
    }
    raise(Errc::internal, "lp: iteration limit hit");
  };

  std::vector<char> allowed(ncols, 1);

  if (n_art > 0) {
    std::vector<double> phase1(ncols, 0.0);
    for (std::size_t j = n + m; j < ncols; ++j) phase1[j] = 1.0;
    set_cost(phase1);
    if (iterate(allowed) != LpResult::Status::optimal)
      raise(Errc::internal, "lp: phase 1 unbounded");
    const double infeas = -t[m][ncols];
    if (infeas > 1e-9 * (1.0 + bmax)) return {LpResult::Status::infeasible, 0.0, {}};

    // Pivot artificials out where possible; rows that cannot be cleared are
    // redundant and their artificial stays basic at zero.
    for (std::size_t i = 0; i < m; ++i) {
      if (basis[i] < n + m) continue;
      for (std::size_t j = 0; j < n + m; ++j) {
        if (std::fabs(t[i][j]) > kPivotEps) {
          pivot(i, j);
          break;
        }
      }
    }
    for (std::size_t j = n + m; j < ncols; ++j) allowed[j] = 0;
  }

  std::vector<double> cost(ncols, 0.0);
  std::copy(c.begin(), c.end(), cost.begin());
  set_cost(cost);
  if (iterate(allowed) == LpResult::Status::unbounded)
    return {LpResult::Status::unbounded, 0.0, {}};

  LpResult out;
  out.status = LpResult::Status::optimal;
  out.value = -t[m][ncols];
  out.x.assign(n, 0.0);
  for (std::size_t i = 0; i < m; ++i)
    if (basis[i] < n) out.x[basis[i]] = t[i][ncols];
  return out;
}

}  // namespace jpool
