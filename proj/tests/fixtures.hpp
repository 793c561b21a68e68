#pragma once

#include <cstddef>
#include <vector>

#include "jpool/cpwl.hpp"

namespace fixtures {

// Quadrants of the unit square with the continuous law
//   c0 + c1 x + c2 y + c3 |x - 1/2| + c4 |y - 1/2|
// expanded per cell. Cell order: (lo,lo), (lo,hi), (hi,lo), (hi,hi).
inline jpool::ExplicitPartition four_square(double c0 = 0.375, double c1 = 1.25,
                                            double c2 = -0.75, double c3 = 2.0,
                                            double c4 = 1.5) {
  std::vector<jpool::HPolytope> cells;
  std::vector<jpool::AffineMap> maps;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      jpool::HPolytope cell;
      cell.normals = {{1.0, 0.0}, {-1.0, 0.0}, {0.0, 1.0}, {0.0, -1.0}};
      cell.offsets = {-0.5 * i, 0.5 * (i + 1), -0.5 * j, 0.5 * (j + 1)};
      const double sx = i == 1 ? 1.0 : -1.0;
      const double sy = j == 1 ? 1.0 : -1.0;
      jpool::AffineMap law(1, 2);
      law.at(0, 0) = c1 + sx * c3;
      law.at(0, 1) = c2 + sy * c4;
      law.bias[0] = c0 - 0.5 * (sx * c3 + sy * c4);
      cells.push_back(std::move(cell));
      maps.push_back(std::move(law));
    }
  }
  return jpool::ExplicitPartition(std::move(cells), std::move(maps),
                                  {0.0, 0.0}, {1.0, 1.0});
}

}  // namespace fixtures
