#include "deepmusic/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "deepmusic/error.hpp"

namespace dm {

int AngularGrid::nearest_index(double angle_deg) const {
  const double pos = std::round((angle_deg - start_deg) / resolution_deg());
  return static_cast<int>(std::clamp(pos, 0.0, static_cast<double>(num_points - 1)));
}

AngularGrid make_grid(double start_deg, double final_deg, int num_points) {
  require(num_points >= 1, "grid needs at least one point");
  require(std::isfinite(start_deg) && std::isfinite(final_deg) && start_deg < final_deg,
          "grid start must be below grid final");
  return AngularGrid{start_deg, final_deg, num_points};
}

int Partition::region_of_angle(double angle_deg) const {
  for (int q = 0; q < num_regions; ++q)
    if (angle_deg >= region_bounds[q].first && angle_deg < region_bounds[q].second) return q;
  return -1;
}

Partition partition_grid(const AngularGrid& grid, int num_regions) {
  require(num_regions >= 1, "need at least one region");
  require(grid.num_points % num_regions == 0,
          "region count " + std::to_string(num_regions) + " does not divide grid size " +
              std::to_string(grid.num_points));
  Partition p;
  p.grid = grid;
  p.num_regions = num_regions;
  p.region_len = grid.num_points / num_regions;
  p.region_bounds.reserve(num_regions);
  for (int q = 0; q < num_regions; ++q) {
    const double lo = grid.angle(q * p.region_len);
    const double hi = q + 1 == num_regions ? grid.final_deg : grid.angle((q + 1) * p.region_len);
    p.region_bounds.emplace_back(lo, hi);
  }
  return p;
}

}  // namespace dm
