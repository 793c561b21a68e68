#pragma once

#include <vector>

namespace jpool {

struct LpResult {
  enum class Status { optimal, infeasible, unbounded };
  Status status = Status::optimal;
  double value = 0.0;
  std::vector<double> x;
};

// minimize c.x  subject to  A x <= b, x >= 0.
// Dense two-phase simplex with Bland's rule; sized for the small geometric
// subproblems here (tens of variables), not for general LP workloads.
LpResult solve_lp_leq(const std::vector<std::vector<double>>& A,
                      const std::vector<double>& b,
                      const std::vector<double>& c);

}  // namespace jpool
