#include "robodata/ingest.hpp"

#include <algorithm>
#include <fstream>

namespace robodata {

namespace {

namespace fs = std::filesystem;

nlohmann::json load_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    nlohmann::json j;
    in >> j;
    return j;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("cannot parse " + path.string() + ": " + e.what());
  }
}

Pose pose_from_step(const nlohmann::json& step) {
  const auto& pos = step.at("position");
  const auto& q = step.at("orientation_wxyz");
  if (pos.size() != 3 || q.size() != 4) {
    throw InvalidValueError("step position/orientation have the wrong arity");
  }
  Pose p;
  p.position = Eigen::Vector3d(pos[0].get<double>(), pos[1].get<double>(), pos[2].get<double>());
  p.orientation = Quaternion(q[0].get<double>(), q[1].get<double>(), q[2].get<double>(),
                             q[3].get<double>());
  return p;
}

std::map<std::string, std::string> frame_refs(const nlohmann::json& step, const char* key,
                                              const fs::path& dir) {
  std::map<std::string, std::string> out;
  if (!step.contains(key)) return out;
  for (const auto& [view, rel] : step.at(key).items()) {
    const fs::path path = dir / rel.get<std::string>();
    if (!fs::exists(path)) {
      throw IoError("missing frame " + path.string());
    }
    out[view] = path.string();  // absolute until write_episode re-homes it
  }
  return out;
}

}  // namespace

std::vector<fs::path> list_native_episodes(const fs::path& root) {
  std::vector<fs::path> dirs;
  if (!fs::exists(root)) return dirs;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (entry.is_directory() && fs::exists(entry.path() / "episode.json")) {
      dirs.push_back(entry.path());
    }
  }
  std::sort(dirs.begin(), dirs.end());
  return dirs;
}

Episode ingest_episode(const fs::path& native_dir, const DatasetProfile& profile) {
  const nlohmann::json j = load_json(native_dir / "episode.json");

  Episode ep;
  ep.id = native_dir.filename().string();
  ep.origin_dataset = profile.name;
  ep.instruction = j.value("instruction", std::string{});
  ep.robot = j.value("robot", std::string{});
  ep.extra = j.value("extra", nlohmann::json::object());

  if (j.contains("cameras")) {
    for (const auto& [name, cj] : j.at("cameras").items()) {
      CameraView v;
      v.name = name;
      v.fx = cj.at("fx").get<double>();
      v.fy = cj.at("fy").get<double>();
      v.cx = cj.at("cx").get<double>();
      v.cy = cj.at("cy").get<double>();
      v.width = cj.at("width").get<int>();
      v.height = cj.at("height").get<int>();
      const auto& t = cj.at("world_from_camera");
      RigidTransform native_extr;
      for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c)
          native_extr.rotation(r, c) = t.at("rotation").at(r).at(c).get<double>();
      const auto& trans = t.at("translation");
      native_extr.translation = Eigen::Vector3d(trans[0].get<double>(), trans[1].get<double>(),
                                                trans[2].get<double>());
      // Camera extrinsics move into the unified frame with the data.
      v.world_from_camera = compose(profile.world_from_native, native_extr);
      ep.cameras.views.push_back(std::move(v));
    }
  }

  const auto& steps = j.at("steps");
  if (!steps.is_array() || steps.size() < 2) {
    throw InvalidValueError("episodes need at least 2 steps");
  }

  std::vector<Pose> aligned;
  aligned.reserve(steps.size());
  for (const auto& sj : steps) {
    aligned.push_back(align_pose(profile, pose_from_step(sj)));
  }

  for (std::size_t s = 0; s < steps.size(); ++s) {
    Step step;
    step.pose = aligned[s];
    step.gripper = remap_gripper(steps[s].at("gripper").get<double>(), profile.gripper_map);
    step.images = frame_refs(steps[s], "images", native_dir);
    step.depth = frame_refs(steps[s], "depth", native_dir);
    ep.steps.push_back(std::move(step));
  }

  for (std::size_t s = 0; s + 1 < ep.steps.size(); ++s) {
    StepAction action;
    if (profile.action_repr == NativeActionRepr::None) {
      // Position-only robots: rotation is zero-padded exactly.
      action.dpos = ep.steps[s + 1].pose.position - ep.steps[s].pose.position;
      action.drot = Quaternion::identity();
    } else {
      action = StepAction::from_delta(crmm(ep.steps[s].pose, ep.steps[s + 1].pose));
    }
    action.gripper = ep.steps[s + 1].gripper;
    ep.steps[s].action = action;
  }
  return ep;
}

IngestResult ingest(const fs::path& root, const DatasetProfile& profile) {
  IngestResult result;
  for (const fs::path& dir : list_native_episodes(root)) {
    try {
      result.episodes.push_back(ingest_episode(dir, profile));
    } catch (const std::exception& e) {
      result.skipped.push_back({dir, e.what()});
    }
  }
  return result;
}

}  // namespace robodata
