#include "robodata/camera.hpp"

#include <cmath>

namespace robodata {

bool camera_valid(const CameraView& view, double tol) {
  if (!(view.fx > 0) || !(view.fy > 0)) return false;
  if (!(view.cx > 0) || !(view.cx < view.width)) return false;
  if (!(view.cy > 0) || !(view.cy < view.height)) return false;
  return is_rigid(view.world_from_camera, tol);
}

Projection project(const CameraView& view, const Eigen::Vector3d& p_world) {
  Projection out;
  const Eigen::Vector3d p_cam = view.world_from_camera.inverse() * p_world;
  out.depth = p_cam.z();
  if (!(p_cam.z() > 1e-6)) {
    return out;
  }
  out.u = view.fx * p_cam.x() / p_cam.z() + view.cx;
  out.v = view.fy * p_cam.y() / p_cam.z() + view.cy;
  out.valid = out.u >= 0.0 && out.u <= view.width - 1 && out.v >= 0.0 && out.v <= view.height - 1;
  return out;
}

Eigen::VectorXd sample_bilinear(const std::vector<Eigen::MatrixXd>& channels, double u, double v) {
  if (channels.empty()) throw ShapeMismatchError("sample_bilinear: no channels");
  const Eigen::Index h = channels.front().rows();
  const Eigen::Index w = channels.front().cols();
  for (const auto& c : channels) {
    if (c.rows() != h || c.cols() != w) {
      throw ShapeMismatchError("sample_bilinear: channel shapes differ");
    }
  }
  if (!(u >= 0.0) || !(u <= double(w - 1)) || !(v >= 0.0) || !(v <= double(h - 1))) {
    throw OutOfBoundsError("sample_bilinear: coordinates outside the feature map");
  }
  const Eigen::Index u0 = static_cast<Eigen::Index>(std::floor(u));
  const Eigen::Index v0 = static_cast<Eigen::Index>(std::floor(v));
  const Eigen::Index u1 = std::min(u0 + 1, w - 1);
  const Eigen::Index v1 = std::min(v0 + 1, h - 1);
  const double du = u - double(u0);
  const double dv = v - double(v0);

  Eigen::VectorXd out(static_cast<Eigen::Index>(channels.size()));
  for (std::size_t c = 0; c < channels.size(); ++c) {
    const Eigen::MatrixXd& m = channels[c];
    out[static_cast<Eigen::Index>(c)] = (1 - dv) * ((1 - du) * m(v0, u0) + du * m(v0, u1)) +
                                        dv * ((1 - du) * m(v1, u0) + du * m(v1, u1));
  }
  return out;
}

ColoredCloud unproject_depth(const CameraView& view, const Eigen::MatrixXd& depth_m,
                             const std::array<Eigen::MatrixXd, 3>& rgb) {
  for (const auto& plane : rgb) {
    if (plane.rows() != depth_m.rows() || plane.cols() != depth_m.cols()) {
      throw ShapeMismatchError("unproject_depth: depth and rgb sizes differ");
    }
  }
  ColoredCloud cloud;
  cloud.points.reserve(static_cast<std::size_t>(depth_m.size()));
  cloud.colors.reserve(static_cast<std::size_t>(depth_m.size()));
  const double inv_fx = 1.0 / view.fx;
  const double inv_fy = 1.0 / view.fy;
  for (Eigen::Index v = 0; v < depth_m.rows(); ++v) {
    for (Eigen::Index u = 0; u < depth_m.cols(); ++u) {
      const double d = depth_m(v, u);
      if (!(d > 0.0) || !std::isfinite(d)) continue;
      const Eigen::Vector3d p_cam(d * (double(u) - view.cx) * inv_fx,
                                  d * (double(v) - view.cy) * inv_fy, d);
      cloud.points.push_back(view.world_from_camera * p_cam);
      cloud.colors.emplace_back(rgb[0](v, u), rgb[1](v, u), rgb[2](v, u));
    }
  }
  return cloud;
}

}  // namespace robodata
