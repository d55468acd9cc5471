#pragma once

#include <cmath>
#include <variant>

#include "robodata/se3.hpp"

// Delta-action algebra: three ways to derive a relative action from two
// consecutive end-effector poses, their exact inverses, conversion between
// them, network-form scaling, and gripper remapping.
//
//   EADM  drot = per-component Euler difference, wrapped to (-pi, pi]
//   CRMM  drot = R_{t+1} * R_t^T          (world-frame relative rotation)
//   PCM   drot = R_t^T * R_{t+1}, dpos expressed in the t-frame

namespace robodata {

enum class ActionRepr { EADM, CRMM, PCM };

inline const char* to_string(ActionRepr r) {
  switch (r) {
    case ActionRepr::EADM: return "EADM";
    case ActionRepr::CRMM: return "CRMM";
    case ActionRepr::PCM: return "PCM";
  }
  return "?";
}

/// Relative motion plus a 1-DoF gripper command in the canonical
/// {-1 open, +1 closed} convention. The rotation payload depends on the
/// representation: Euler differences for EADM, a rotation matrix for
/// CRMM/PCM.
template <typename Scalar>
struct DeltaActionT {
  Vec3<Scalar> dpos = Vec3<Scalar>::Zero();
  std::variant<EulerAnglesT<Scalar>, Mat3<Scalar>> drot = Mat3<Scalar>::Identity();
  Scalar gripper = Scalar(-1);
  ActionRepr repr = ActionRepr::CRMM;
  bool gimbal_lock = false;

  const EulerAnglesT<Scalar>& euler() const {
    if (repr != ActionRepr::EADM) {
      throw ReprMismatchError("euler payload requested from a non-EADM action");
    }
    return std::get<EulerAnglesT<Scalar>>(drot);
  }

  const Mat3<Scalar>& rotation() const {
    if (repr == ActionRepr::EADM) {
      throw ReprMismatchError("matrix payload requested from an EADM action");
    }
    return std::get<Mat3<Scalar>>(drot);
  }
};

template <typename Scalar>
DeltaActionT<Scalar> eadm(const PoseT<Scalar>& p_t, const PoseT<Scalar>& p_t1,
                          Scalar gripper = Scalar(-1)) {
  bool lock_t = false, lock_t1 = false;
  const EulerAnglesT<Scalar> e_t = matrix_to_euler(quat_to_matrix(p_t.orientation), &lock_t);
  const EulerAnglesT<Scalar> e_t1 = matrix_to_euler(quat_to_matrix(p_t1.orientation), &lock_t1);
  DeltaActionT<Scalar> a;
  a.repr = ActionRepr::EADM;
  a.dpos = p_t1.position - p_t.position;
  EulerAnglesT<Scalar> d;
  d.roll = wrap_angle(e_t1.roll - e_t.roll);
  d.pitch = wrap_angle(e_t1.pitch - e_t.pitch);
  d.yaw = wrap_angle(e_t1.yaw - e_t.yaw);
  a.drot = d;
  a.gripper = gripper;
  a.gimbal_lock = lock_t || lock_t1;
  return a;
}

template <typename Scalar>
DeltaActionT<Scalar> crmm(const PoseT<Scalar>& p_t, const PoseT<Scalar>& p_t1,
                          Scalar gripper = Scalar(-1)) {
  DeltaActionT<Scalar> a;
  a.repr = ActionRepr::CRMM;
  a.dpos = p_t1.position - p_t.position;
  a.drot = Mat3<Scalar>(quat_to_matrix(p_t1.orientation) *
                        quat_to_matrix(p_t.orientation).transpose());
  a.gripper = gripper;
  return a;
}

template <typename Scalar>
DeltaActionT<Scalar> pcm(const PoseT<Scalar>& p_t, const PoseT<Scalar>& p_t1,
                         Scalar gripper = Scalar(-1)) {
  const Mat3<Scalar> r_t = quat_to_matrix(p_t.orientation);
  DeltaActionT<Scalar> a;
  a.repr = ActionRepr::PCM;
  a.dpos = r_t.transpose() * (p_t1.position - p_t.position);
  a.drot = Mat3<Scalar>(r_t.transpose() * quat_to_matrix(p_t1.orientation));
  a.gripper = gripper;
  return a;
}

template <typename Scalar>
PoseT<Scalar> apply_eadm(const PoseT<Scalar>& p_t, const DeltaActionT<Scalar>& a) {
  if (a.repr != ActionRepr::EADM) {
    throw ReprMismatchError("apply_eadm called with a non-EADM action");
  }
  const EulerAnglesT<Scalar> e_t = matrix_to_euler(quat_to_matrix(p_t.orientation));
  const EulerAnglesT<Scalar>& d = a.euler();
  EulerAnglesT<Scalar> e;
  e.roll = wrap_angle(e_t.roll + d.roll);
  e.pitch = wrap_angle(e_t.pitch + d.pitch);
  e.yaw = wrap_angle(e_t.yaw + d.yaw);
  PoseT<Scalar> out;
  out.position = p_t.position + a.dpos;
  out.orientation = matrix_to_quat(euler_to_matrix(e));
  return out;
}

template <typename Scalar>
PoseT<Scalar> apply_crmm(const PoseT<Scalar>& p_t, const DeltaActionT<Scalar>& a) {
  if (a.repr != ActionRepr::CRMM) {
    throw ReprMismatchError("apply_crmm called with a non-CRMM action");
  }
  PoseT<Scalar> out;
  out.position = p_t.position + a.dpos;
  out.orientation = matrix_to_quat(Mat3<Scalar>(a.rotation() * quat_to_matrix(p_t.orientation)));
  return out;
}

template <typename Scalar>
PoseT<Scalar> apply_pcm(const PoseT<Scalar>& p_t, const DeltaActionT<Scalar>& a) {
  if (a.repr != ActionRepr::PCM) {
    throw ReprMismatchError("apply_pcm called with a non-PCM action");
  }
  const Mat3<Scalar> r_t = quat_to_matrix(p_t.orientation);
  PoseT<Scalar> out;
  out.position = p_t.position + r_t * a.dpos;
  out.orientation = matrix_to_quat(Mat3<Scalar>(r_t * a.rotation()));
  return out;
}

/// Dispatches on a.repr.
template <typename Scalar>
PoseT<Scalar> apply_action(const PoseT<Scalar>& p_t, const DeltaActionT<Scalar>& a) {
  switch (a.repr) {
    case ActionRepr::EADM: return apply_eadm(p_t, a);
    case ActionRepr::CRMM: return apply_crmm(p_t, a);
    case ActionRepr::PCM: return apply_pcm(p_t, a);
  }
  throw ReprMismatchError("apply_action: unknown representation");
}

/// Re-derives the action in another representation by reconstructing
/// P_{t+1} and running the target's forward op. One code path, no algebraic
/// shortcuts.
template <typename Scalar>
DeltaActionT<Scalar> convert_repr(const DeltaActionT<Scalar>& a, const PoseT<Scalar>& p_t,
                                  ActionRepr target) {
  const PoseT<Scalar> p_t1 = apply_action(p_t, a);
  DeltaActionT<Scalar> out;
  switch (target) {
    case ActionRepr::EADM: out = eadm(p_t, p_t1, a.gripper); break;
    case ActionRepr::CRMM: out = crmm(p_t, p_t1, a.gripper); break;
    case ActionRepr::PCM: out = pcm(p_t, p_t1, a.gripper); break;
  }
  return out;
}

/// Per-axis scale factors for (x, y, z, roll, pitch, yaw); all strictly
/// positive.
struct ScaleVector {
  Eigen::Matrix<double, 6, 1> factors;

  ScaleVector() { factors.setOnes(); }
  explicit ScaleVector(const Eigen::Matrix<double, 6, 1>& f) : factors(f) {
    if (!(factors.array() > 0.0).all()) {
      throw InvalidScaleError("scale factors must be strictly positive");
    }
  }
  static ScaleVector uniform(double xyz, double rpy) {
    Eigen::Matrix<double, 6, 1> f;
    f << xyz, xyz, xyz, rpy, rpy, rpy;
    return ScaleVector(f);
  }
};

enum class ScaleDirection { Normalize, Denormalize };

/// Network-form scaling of an EADM action: normalize divides each axis by
/// its factor, denormalize multiplies. Exact round trip by construction.
inline DeltaActionT<double> scale_action(const DeltaActionT<double>& a, const ScaleVector& s,
                                         ScaleDirection direction) {
  if (a.repr != ActionRepr::EADM) {
    throw ReprMismatchError("scale_action expects the EADM vector form");
  }
  if (!(s.factors.array() > 0.0).all()) {
    throw InvalidScaleError("scale factors must be strictly positive");
  }
  DeltaActionT<double> out = a;
  EulerAnglesT<double> d = a.euler();
  if (direction == ScaleDirection::Normalize) {
    out.dpos = a.dpos.cwiseQuotient(s.factors.head<3>());
    d.roll /= s.factors[3];
    d.pitch /= s.factors[4];
    d.yaw /= s.factors[5];
  } else {
    out.dpos = a.dpos.cwiseProduct(s.factors.head<3>());
    d.roll *= s.factors[3];
    d.pitch *= s.factors[4];
    d.yaw *= s.factors[5];
  }
  out.drot = d;
  return out;
}

/// Source-dataset gripper encoding. The midpoint threshold tolerates float
/// noise around the nominal open/close values.
struct GripperMap {
  double source_open = -1.0;
  double source_close = 1.0;
  double threshold = 0.0;

  GripperMap() = default;
  GripperMap(double open_value, double close_value)
      : source_open(open_value),
        source_close(close_value),
        threshold((open_value + close_value) / 2.0) {
    if (source_open == source_close) {
      throw InvalidValueError("gripper map open and close values must differ");
    }
  }
};

/// Canonical gripper command: -1 when the value lies on the open side of the
/// threshold, +1 otherwise (ties count as closed).
inline double remap_gripper(double value, const GripperMap& map) {
  if (!std::isfinite(value)) {
    throw InvalidValueError("remap_gripper: non-finite input");
  }
  const bool open_side = (value - map.threshold) * (map.source_open - map.threshold) > 0.0;
  return open_side ? -1.0 : 1.0;
}

/// (dx, dy, dz, droll, dpitch, dyaw) network form of an EADM action.
inline Eigen::Matrix<double, 6, 1> action_vector6(const DeltaActionT<double>& a) {
  const EulerAnglesT<double>& d = a.euler();
  Eigen::Matrix<double, 6, 1> v;
  v << a.dpos.x(), a.dpos.y(), a.dpos.z(), d.roll, d.pitch, d.yaw;
  return v;
}

using DeltaAction = DeltaActionT<double>;

}  // namespace robodata
