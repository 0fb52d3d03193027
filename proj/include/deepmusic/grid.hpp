#pragma once

#include <utility>
#include <vector>

namespace dm {

/// Half-open DOA grid: point i is start + i * resolution, i = 0 .. N-1,
/// so the final angle itself is not a grid point.
struct AngularGrid {
  double start_deg = -60.0;
  double final_deg = 60.0;
  int num_points = 4096;

  double resolution_deg() const { return (final_deg - start_deg) / num_points; }
  double angle(int index) const { return start_deg + index * resolution_deg(); }
  /// Nearest grid index, clamped to [0, N-1].
  int nearest_index(double angle_deg) const;
  bool operator==(const AngularGrid&) const = default;
};

AngularGrid make_grid(double start_deg, double final_deg, int num_points);

/// Q contiguous, disjoint subregions of L = N / Q grid points each.
struct Partition {
  AngularGrid grid;
  int num_regions = 1;
  int region_len = 0;
  std::vector<std::pair<double, double>> region_bounds;  // [start, final) in degrees

  int first_index(int region) const { return region * region_len; }
  int region_of_index(int grid_index) const { return grid_index / region_len; }
  /// Region whose half-open bounds contain the angle, or -1.
  int region_of_angle(double angle_deg) const;
  bool operator==(const Partition&) const = default;
};

Partition partition_grid(const AngularGrid& grid, int num_regions);

}  // namespace dm
