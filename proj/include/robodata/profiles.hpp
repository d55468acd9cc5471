#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "robodata/action.hpp"
#include "robodata/se3.hpp"

// Per-dataset conventions and the re-basing pipeline that moves every
// episode into the unified frame: X right, Y forward, Z up, workspace
// [-0.5, -0.5, 0] .. [0.5, 0.5, 1] meters.

namespace robodata {

/// Native action encoding of a source dataset. Absolute means only poses
/// are recorded; None means position-only actions (rotation is zero-padded
/// on ingest).
enum class NativeActionRepr { EADM, CRMM, PCM, Absolute, None };

const char* to_string(NativeActionRepr r);
NativeActionRepr native_action_repr_from_string(const std::string& s);

struct DatasetProfile {
  std::string name;
  RigidTransform world_from_native;
  std::string axis_convention;           // native axis label, e.g. "Forward-Left-Up"
  Eigen::Vector3d workspace_min = Eigen::Vector3d::Zero();  // native frame
  Eigen::Vector3d workspace_max = Eigen::Vector3d::Ones();
  NativeActionRepr action_repr = NativeActionRepr::CRMM;
  GripperMap gripper_map;
  std::optional<ScaleVector> scale;
};

struct UnifiedFrameSpec {
  std::string axes = "Right-Forward-Up";
  Eigen::Vector3d workspace_min{-0.5, -0.5, 0.0};
  Eigen::Vector3d workspace_max{0.5, 0.5, 1.0};
};

const UnifiedFrameSpec& unified_frame();

/// Profiles for the datasets shipped with the toolkit. RoboCasa-style
/// sources can be added through a profile file without code changes.
const std::vector<DatasetProfile>& builtin_profiles();

const DatasetProfile* find_profile(const std::vector<DatasetProfile>& profiles,
                                   const std::string& name);

/// Re-bases a native pose into the unified frame: position through the full
/// transform, orientation through the rotation block only.
Pose align_pose(const DatasetProfile& profile, const Pose& native);

/// CRMM action between the two aligned poses.
DeltaAction align_action(const DatasetProfile& profile, const Pose& native_t,
                         const Pose& native_t1, double gripper = -1.0);

struct ClipViolation {
  std::size_t index = 0;
  int axis = 0;          // 0 = x, 1 = y, 2 = z
  bool max_side = false;
};

struct ClipReport {
  Eigen::Vector3d min_seen = Eigen::Vector3d::Zero();
  Eigen::Vector3d max_seen = Eigen::Vector3d::Zero();
  std::vector<ClipViolation> violations;
  std::size_t out_of_bounds_count = 0;  // distinct offending points
};

/// Checks unified-frame positions against the workspace box with a 1e-6
/// tolerance. Out-of-bounds points are reported, never clamped.
ClipReport clip_report(const std::vector<Eigen::Vector3d>& positions);

bool in_workspace(const Eigen::Vector3d& p, double tol = 1e-6);

nlohmann::json profile_to_json(const DatasetProfile& profile);
DatasetProfile profile_from_json(const nlohmann::json& j);

/// Loads one profile or an array of profiles from a JSON file.
std::vector<DatasetProfile> load_profiles(const std::string& path);

}  // namespace robodata
