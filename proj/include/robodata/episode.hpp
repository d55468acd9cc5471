#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "robodata/action.hpp"
#include "robodata/camera.hpp"
#include "robodata/se3.hpp"

// The canonical on-disk episode unit. On disk an episode is one directory:
//
//   <id>/meta.json       id, origin, instruction, robot, step count, extra
//   <id>/cameras.json    per-view intrinsics and unified-frame extrinsics
//   <id>/steps.bin       little-endian float64 records, 15 per step:
//                        pose (px py pz qw qx qy qz), gripper, action
//                        (dx dy dz qw qx qy qz); the final step's action is
//                        NaN-filled
//   <id>/steps.sha256    hex digest of steps.bin
//   <id>/images/<view>/<step:05>.png          8-bit RGB
//   <id>/depth/<view>/<step:05>.png           16-bit grayscale, millimeters

namespace robodata {

/// CRMM action toward the next step, rotation stored as a canonical unit
/// quaternion so disk round trips are bit exact.
struct StepAction {
  Eigen::Vector3d dpos = Eigen::Vector3d::Zero();
  Quaternion drot;
  double gripper = -1.0;

  DeltaAction to_delta() const {
    DeltaAction a;
    a.repr = ActionRepr::CRMM;
    a.dpos = dpos;
    a.drot = quat_to_matrix(drot);
    a.gripper = gripper;
    return a;
  }

  static StepAction from_delta(const DeltaAction& a) {
    StepAction s;
    s.dpos = a.dpos;
    s.drot = matrix_to_quat(a.rotation());
    s.gripper = a.gripper;
    return s;
  }
};

struct Step {
  Pose pose;              // unified frame
  double gripper = -1.0;  // canonical {-1 open, +1 closed}
  std::optional<StepAction> action;  // absent on the final step
  std::map<std::string, std::string> images;  // view -> path (relative once stored)
  std::map<std::string, std::string> depth;
};

struct Episode {
  std::string id;
  std::string origin_dataset;
  std::string instruction;
  std::string robot;
  std::vector<Step> steps;
  CameraRig cameras;
  nlohmann::json extra = nlohmann::json::object();
  std::filesystem::path root;  // set when read from disk; image paths resolve against root/id
};

struct ManifestEntry {
  std::string id;
  int steps = 0;
  std::string verb;
};

struct Manifest {
  int format = 1;
  int image_height = 256;
  int image_width = 256;
  std::vector<nlohmann::json> profiles;
  std::vector<ManifestEntry> episodes;  // sorted by id
};

/// First whitespace token of the instruction, lowercased.
std::string task_verb(const std::string& instruction);

}  // namespace robodata
