#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "robodata/se3.hpp"

// Pinhole geometry for the 3D perception pipeline: projection into image
// space, bilinear feature sampling, and depth unprojection to colored world
// points.

namespace robodata {

/// One view: zero-skew intrinsics plus world_from_camera extrinsics.
struct CameraView {
  std::string name;
  double fx = 0, fy = 0, cx = 0, cy = 0;
  int width = 0, height = 0;
  RigidTransform world_from_camera;
};

struct CameraRig {
  std::vector<CameraView> views;

  const CameraView* find(std::string_view name) const {
    for (const auto& v : views) {
      if (v.name == name) return &v;
    }
    return nullptr;
  }
};

bool camera_valid(const CameraView& view, double tol = kRotationGateTol);

struct Projection {
  double u = 0, v = 0, depth = 0;
  bool valid = false;
};

/// Projects a world point: p_cam = world_from_camera^-1 * p, then
/// (u, v) = (fx x/z + cx, fy y/z + cy). Valid iff z > 1e-6 and (u, v) lies
/// inside [0, W-1] x [0, H-1].
Projection project(const CameraView& view, const Eigen::Vector3d& p_world);

/// Bilinear blend of the four neighbors of (u, v) on each channel plane.
/// Exact at integer coordinates; out-of-range coordinates throw.
Eigen::VectorXd sample_bilinear(const std::vector<Eigen::MatrixXd>& channels, double u, double v);

struct ColoredCloud {
  std::vector<Eigen::Vector3d> points;
  std::vector<Eigen::Vector3d> colors;  // [0, 1]

  std::size_t size() const { return points.size(); }
};

/// Unprojects a metric depth image (meters; zero or non-finite entries are
/// skipped) with per-pixel RGB planes into a world-frame colored cloud.
ColoredCloud unproject_depth(const CameraView& view, const Eigen::MatrixXd& depth_m,
                             const std::array<Eigen::MatrixXd, 3>& rgb);

}  // namespace robodata
