#pragma once

#include <Eigen/Core>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>

#include "robodata/error.hpp"

// Rotation and rigid-transform algebra. Everything here is a plain value
// type templated on the scalar; free functions keep the call sites
// expression-friendly. Conventions:
//   * quaternions are (w, x, y, z), unit norm, canonical sign w >= 0
//   * Euler angles are extrinsic X-Y-Z: R = Rz(yaw) * Ry(pitch) * Rx(roll)
//   * angles are radians everywhere

namespace robodata {

template <typename Scalar>
using Vec3 = Eigen::Matrix<Scalar, 3, 1>;
template <typename Scalar>
using Mat3 = Eigen::Matrix<Scalar, 3, 3>;
template <typename Scalar>
using Mat4 = Eigen::Matrix<Scalar, 4, 4>;

using RotationMatrix = Mat3<double>;

/// Inputs farther than this from unit norm / orthonormality are rejected.
inline constexpr double kRotationGateTol = 1e-6;

/// Wraps an angle to (-pi, pi].
template <typename Scalar>
Scalar wrap_angle(Scalar a) {
  const Scalar two_pi = Scalar(2) * Scalar(EIGEN_PI);
  Scalar r = std::fmod(a + Scalar(EIGEN_PI), two_pi);
  if (r <= Scalar(0)) r += two_pi;
  return r - Scalar(EIGEN_PI);
}

/// Unit quaternion with the double cover resolved: after construction or
/// normalized() the norm is 1 within 1e-9 and the leading nonzero component
/// of (w, x, y, z) is positive.
template <typename Scalar>
struct QuaternionT {
  Scalar w{1}, x{0}, y{0}, z{0};

  QuaternionT() = default;

  /// Validating constructor: rejects inputs whose norm deviates from 1 by
  /// more than 1e-6, then normalizes exactly and fixes the canonical sign.
  QuaternionT(Scalar w_, Scalar x_, Scalar y_, Scalar z_) : w(w_), x(x_), y(y_), z(z_) {
    const Scalar n = norm();
    if (!(std::abs(n - Scalar(1)) <= Scalar(kRotationGateTol))) {
      throw InvalidQuaternionError("quaternion norm " + std::to_string(double(n)) +
                                   " deviates from 1 by more than 1e-6");
    }
    *this = normalized();
  }

  /// Bypasses validation entirely; used by deserialization and by tests that
  /// inject defects. Callers own the invariant.
  static QuaternionT raw(Scalar w_, Scalar x_, Scalar y_, Scalar z_) noexcept {
    QuaternionT q;
    q.w = w_;
    q.x = x_;
    q.y = y_;
    q.z = z_;
    return q;
  }

  static QuaternionT identity() noexcept { return QuaternionT(); }

  Scalar norm() const { return std::sqrt(w * w + x * x + y * y + z * z); }

  bool is_unit(Scalar tol = Scalar(kRotationGateTol)) const {
    return std::abs(norm() - Scalar(1)) <= tol;
  }

  /// Unit-norm, canonical-sign copy. Throws on (near) zero norm.
  QuaternionT normalized() const {
    const Scalar n = norm();
    if (!(n > Scalar(0)) || !std::isfinite(n)) {
      throw InvalidQuaternionError("cannot normalize quaternion with zero or non-finite norm");
    }
    QuaternionT q = raw(w / n, x / n, y / n, z / n);
    q.canonicalize();
    return q;
  }

  QuaternionT conjugate() const { return raw(w, -x, -y, -z); }

  /// Hamilton product, renormalized and sign-canonicalized.
  QuaternionT operator*(const QuaternionT& r) const {
    return raw(w * r.w - x * r.x - y * r.y - z * r.z,
               w * r.x + x * r.w + y * r.z - z * r.y,
               w * r.y - x * r.z + y * r.w + z * r.x,
               w * r.z + x * r.y - y * r.x + z * r.w)
        .normalized();
  }

  /// Rotates a vector: q * (0, v) * q^-1.
  Vec3<Scalar> rotate(const Vec3<Scalar>& v) const {
    const Vec3<Scalar> im(x, y, z);
    const Vec3<Scalar> t = Scalar(2) * im.cross(v);
    return v + w * t + im.cross(t);
  }

  Scalar dot(const QuaternionT& r) const { return w * r.w + x * r.x + y * r.y + z * r.z; }

 private:
  void canonicalize() {
    Scalar lead = w;
    if (lead == Scalar(0)) lead = x;
    if (lead == Scalar(0)) lead = y;
    if (lead == Scalar(0)) lead = z;
    if (lead < Scalar(0)) {
      w = -w;
      x = -x;
      y = -y;
      z = -z;
    }
  }
};

/// Extrinsic X-Y-Z Euler angles; canonical decomposition keeps every
/// component in (-pi, pi] and pitch in [-pi/2, pi/2].
template <typename Scalar>
struct EulerAnglesT {
  Scalar roll{0}, pitch{0}, yaw{0};
};

/// True when R'R = I within tol and det(R) > 0. Accepts any 3x3 expression.
template <typename Derived>
bool is_rotation(const Eigen::MatrixBase<Derived>& R_in,
                 typename Derived::Scalar tol = typename Derived::Scalar(kRotationGateTol)) {
  using Scalar = typename Derived::Scalar;
  const Mat3<Scalar> R = R_in;
  const Mat3<Scalar> err = R.transpose() * R - Mat3<Scalar>::Identity();
  return err.cwiseAbs().maxCoeff() <= tol && R.determinant() > Scalar(0);
}

template <typename Scalar>
Mat3<Scalar> quat_to_matrix(const QuaternionT<Scalar>& q_in) {
  if (!q_in.is_unit()) {
    throw InvalidQuaternionError("quat_to_matrix: quaternion is not unit norm");
  }
  const QuaternionT<Scalar> q = q_in.normalized();
  const Scalar w = q.w, x = q.x, y = q.y, z = q.z;
  Mat3<Scalar> R;
  R(0, 0) = 1 - 2 * (y * y + z * z);
  R(0, 1) = 2 * (x * y - w * z);
  R(0, 2) = 2 * (x * z + w * y);
  R(1, 0) = 2 * (x * y + w * z);
  R(1, 1) = 1 - 2 * (x * x + z * z);
  R(1, 2) = 2 * (y * z - w * x);
  R(2, 0) = 2 * (x * z - w * y);
  R(2, 1) = 2 * (y * z + w * x);
  R(2, 2) = 1 - 2 * (x * x + y * y);
  return R;
}

/// Shepperd's method; result is unit norm with canonical sign.
template <typename Derived>
QuaternionT<typename Derived::Scalar> matrix_to_quat(const Eigen::MatrixBase<Derived>& R_in) {
  using Scalar = typename Derived::Scalar;
  const Mat3<Scalar> R = R_in;
  if (!is_rotation(R)) {
    throw InvalidRotationError("matrix_to_quat: matrix is not a proper rotation");
  }
  Scalar w, x, y, z;
  const Scalar trace = R.trace();
  if (trace > Scalar(0)) {
    const Scalar s = std::sqrt(trace + Scalar(1)) * Scalar(2);
    w = Scalar(0.25) * s;
    x = (R(2, 1) - R(1, 2)) / s;
    y = (R(0, 2) - R(2, 0)) / s;
    z = (R(1, 0) - R(0, 1)) / s;
  } else if (R(0, 0) > R(1, 1) && R(0, 0) > R(2, 2)) {
    const Scalar s = std::sqrt(Scalar(1) + R(0, 0) - R(1, 1) - R(2, 2)) * Scalar(2);
    w = (R(2, 1) - R(1, 2)) / s;
    x = Scalar(0.25) * s;
    y = (R(0, 1) + R(1, 0)) / s;
    z = (R(0, 2) + R(2, 0)) / s;
  } else if (R(1, 1) > R(2, 2)) {
    const Scalar s = std::sqrt(Scalar(1) + R(1, 1) - R(0, 0) - R(2, 2)) * Scalar(2);
    w = (R(0, 2) - R(2, 0)) / s;
    x = (R(0, 1) + R(1, 0)) / s;
    y = Scalar(0.25) * s;
    z = (R(1, 2) + R(2, 1)) / s;
  } else {
    const Scalar s = std::sqrt(Scalar(1) + R(2, 2) - R(0, 0) - R(1, 1)) * Scalar(2);
    w = (R(1, 0) - R(0, 1)) / s;
    x = (R(0, 2) + R(2, 0)) / s;
    y = (R(1, 2) + R(2, 1)) / s;
    z = Scalar(0.25) * s;
  }
  return QuaternionT<Scalar>::raw(w, x, y, z).normalized();
}

template <typename Scalar>
Mat3<Scalar> euler_to_matrix(const EulerAnglesT<Scalar>& e) {
  const Scalar cr = std::cos(e.roll), sr = std::sin(e.roll);
  const Scalar cp = std::cos(e.pitch), sp = std::sin(e.pitch);
  const Scalar cy = std::cos(e.yaw), sy = std::sin(e.yaw);
  // Rz(yaw) * Ry(pitch) * Rx(roll), expanded.
  Mat3<Scalar> R;
  R(0, 0) = cy * cp;
  R(0, 1) = cy * sp * sr - sy * cr;
  R(0, 2) = cy * sp * cr + sy * sr;
  R(1, 0) = sy * cp;
  R(1, 1) = sy * sp * sr + cy * cr;
  R(1, 2) = sy * sp * cr - cy * sr;
  R(2, 0) = -sp;
  R(2, 1) = cp * sr;
  R(2, 2) = cp * cr;
  return R;
}

/// Canonical decomposition. When |pitch| is within 1e-6 of pi/2 the yaw/roll
/// split is degenerate: yaw is forced to 0, roll absorbs the free angle, and
/// *gimbal_lock (if given) is set.
template <typename Derived>
EulerAnglesT<typename Derived::Scalar> matrix_to_euler(const Eigen::MatrixBase<Derived>& R_in,
                                                       bool* gimbal_lock = nullptr) {
  using Scalar = typename Derived::Scalar;
  const Mat3<Scalar> R = R_in;
  if (!is_rotation(R)) {
    throw InvalidRotationError("matrix_to_euler: matrix is not a proper rotation");
  }
  if (gimbal_lock) *gimbal_lock = false;
  EulerAnglesT<Scalar> e;
  const Scalar sp = std::clamp(-R(2, 0), Scalar(-1), Scalar(1));
  e.pitch = std::asin(sp);
  if (Scalar(EIGEN_PI) / 2 - std::abs(e.pitch) <= Scalar(1e-6)) {
    if (gimbal_lock) *gimbal_lock = true;
    e.yaw = Scalar(0);
    // At sp = +-1 the top row reduces to [0, +-sin(roll -+ yaw), +-cos(roll -+ yaw)].
    e.roll = (e.pitch > Scalar(0)) ? std::atan2(R(0, 1), R(0, 2))
                                   : std::atan2(-R(0, 1), -R(0, 2));
  } else {
    e.roll = std::atan2(R(2, 1), R(2, 2));
    e.yaw = std::atan2(R(1, 0), R(0, 0));
  }
  e.roll = wrap_angle(e.roll);
  e.yaw = wrap_angle(e.yaw);
  return e;
}

/// Rigid transform: p' = R * p + t.
template <typename Scalar>
struct RigidTransformT {
  Mat3<Scalar> rotation = Mat3<Scalar>::Identity();
  Vec3<Scalar> translation = Vec3<Scalar>::Zero();

  RigidTransformT() = default;
  RigidTransformT(const Mat3<Scalar>& R, const Vec3<Scalar>& t) : rotation(R), translation(t) {}

  static RigidTransformT identity() { return RigidTransformT(); }

  Mat4<Scalar> matrix() const {
    Mat4<Scalar> m = Mat4<Scalar>::Identity();
    m.template block<3, 3>(0, 0) = rotation;
    m.template block<3, 1>(0, 3) = translation;
    return m;
  }

  Vec3<Scalar> operator*(const Vec3<Scalar>& p) const { return rotation * p + translation; }

  RigidTransformT operator*(const RigidTransformT& rhs) const {
    return {rotation * rhs.rotation, rotation * rhs.translation + translation};
  }

  RigidTransformT inverse() const {
    const Mat3<Scalar> Rt = rotation.transpose();
    return {Rt, -(Rt * translation)};
  }
};

template <typename Scalar>
bool is_rigid(const RigidTransformT<Scalar>& T, Scalar tol = Scalar(kRotationGateTol)) {
  return is_rotation(T.rotation, tol) && T.translation.allFinite();
}

/// World-frame end-effector state at one timestep.
template <typename Scalar>
struct PoseT {
  Vec3<Scalar> position = Vec3<Scalar>::Zero();
  QuaternionT<Scalar> orientation;
};

template <typename Scalar>
Vec3<Scalar> transform_point(const RigidTransformT<Scalar>& T, const Vec3<Scalar>& p) {
  return T * p;
}

template <typename Scalar>
PoseT<Scalar> transform_pose(const RigidTransformT<Scalar>& T, const PoseT<Scalar>& P) {
  PoseT<Scalar> out;
  out.position = T * P.position;
  out.orientation = matrix_to_quat(T.rotation) * P.orientation;
  return out;
}

template <typename Scalar>
RigidTransformT<Scalar> compose(const RigidTransformT<Scalar>& a, const RigidTransformT<Scalar>& b) {
  return a * b;
}

template <typename Scalar>
RigidTransformT<Scalar> invert(const RigidTransformT<Scalar>& T) {
  return T.inverse();
}

/// Geodesic distance between two rotations, in radians. Uses the quaternion
/// chord, which stays well conditioned for tiny angles.
template <typename Scalar>
Scalar geodesic_angle(const QuaternionT<Scalar>& a, const QuaternionT<Scalar>& b) {
  const Scalar dm = std::sqrt((a.w - b.w) * (a.w - b.w) + (a.x - b.x) * (a.x - b.x) +
                              (a.y - b.y) * (a.y - b.y) + (a.z - b.z) * (a.z - b.z));
  const Scalar dp = std::sqrt((a.w + b.w) * (a.w + b.w) + (a.x + b.x) * (a.x + b.x) +
                              (a.y + b.y) * (a.y + b.y) + (a.z + b.z) * (a.z + b.z));
  const Scalar chord = std::min(dm, dp);
  return Scalar(2) * std::asin(std::min(chord / Scalar(2), Scalar(1)));
}

template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar geodesic_angle(const Eigen::MatrixBase<DerivedA>& a,
                                         const Eigen::MatrixBase<DerivedB>& b) {
  return geodesic_angle(matrix_to_quat(a), matrix_to_quat(b));
}

using Quaternion = QuaternionT<double>;
using EulerAngles = EulerAnglesT<double>;
using RigidTransform = RigidTransformT<double>;
using Pose = PoseT<double>;

}  // namespace robodata
