#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "robodata/camera.hpp"
#include "robodata/se3.hpp"

// Unified-view grid queries over the robot workspace and occupancy-target
// voxelization of colored point clouds.

namespace robodata {

/// Regular lattice of voxel centers over the unified workspace. Cell
/// (i, j, k) spans the half-open box [min + (i,j,k) .* voxel, ...) with the
/// top faces closed at the workspace max.
struct GridQuery {
  int l = 0, b = 0, p = 0;
  Eigen::Vector3d min = Eigen::Vector3d::Zero();
  Eigen::Vector3d max = Eigen::Vector3d::Ones();

  Eigen::Vector3d voxel_size() const {
    return {(max.x() - min.x()) / l, (max.y() - min.y()) / b, (max.z() - min.z()) / p};
  }

  Eigen::Vector3d center(int i, int j, int k) const {
    const Eigen::Vector3d s = voxel_size();
    return {min.x() + (i + 0.5) * s.x(), min.y() + (j + 0.5) * s.y(),
            min.z() + (k + 0.5) * s.z()};
  }

  std::size_t cell_count() const {
    return static_cast<std::size_t>(l) * static_cast<std::size_t>(b) * static_cast<std::size_t>(p);
  }

  std::size_t index(int i, int j, int k) const {
    return (static_cast<std::size_t>(i) * b + j) * p + k;
  }

  /// All voxel centers, one row per cell, in index order.
  Eigen::Matrix<double, Eigen::Dynamic, 3> positions() const;

  /// The (l*b) x 3p pillar layout: row (i*b + j) packs the p stacked voxel
  /// centers of column (i, j) as (x0, y0, z0, x1, y1, z1, ...).
  Eigen::MatrixXd pillar_positions() const;
};

/// Lattice over the unified workspace [-0.5,-0.5,0] .. [0.5,0.5,1].
GridQuery make_grid(int l, int b, int p);

/// Occupancy supervision target: per-cell hit flag, mean color of member
/// points, and hit count. rgb is meaningful only where occupied.
struct OccupancyGrid {
  int l = 0, b = 0, p = 0;
  std::vector<std::uint8_t> occupied;
  std::vector<Eigen::Vector3d> rgb;
  std::vector<std::int32_t> counts;
  std::size_t dropped = 0;  // points outside the grid bounds

  bool occupied_at(std::size_t idx) const { return occupied[idx] != 0; }
};

/// Bins every in-bounds point by floor((p - min) / voxel); points exactly on
/// a max bound land in the last cell. Colors average per cell; out-of-bounds
/// points are dropped and counted.
OccupancyGrid voxelize(const ColoredCloud& cloud, const GridQuery& grid);

/// Binary block: magic + dims header, packed occupancy bitset, then float32
/// rgb triplets for occupied cells in index order. Counts are not stored;
/// read_occupancy reports 1 for occupied cells.
void write_occupancy(const std::filesystem::path& path, const OccupancyGrid& grid);
OccupancyGrid read_occupancy(const std::filesystem::path& path);

}  // namespace robodata
