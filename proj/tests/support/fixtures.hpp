#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include <json.hpp>

#include "robodata/episode.hpp"
#include "robodata/png_io.hpp"
#include "robodata/profiles.hpp"

#include "support/random_gen.hpp"

// Synthetic canonical episodes and native corpus trees used by the store,
// CLI, and acceptance tests.

namespace fixtures {

namespace fs = std::filesystem;
using namespace robodata;

inline fs::path fresh_dir(const std::string& tag) {
  static std::atomic<unsigned> counter{0};
  const fs::path dir = fs::temp_directory_path() /
                       ("robodata_" + tag + "_" + std::to_string(::getpid()) + "_" +
                        std::to_string(counter++));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

inline ImageRgb8 random_rgb(std::mt19937& gen, int size) {
  ImageRgb8 img;
  img.width = img.height = size;
  img.pixels.resize(static_cast<std::size_t>(size) * size * 3);
  std::uniform_int_distribution<int> u(0, 255);
  for (auto& p : img.pixels) p = static_cast<std::uint8_t>(u(gen));
  return img;
}

inline ImageGray16 random_depth(std::mt19937& gen, int size) {
  ImageGray16 img;
  img.width = img.height = size;
  img.pixels.resize(static_cast<std::size_t>(size) * size);
  std::uniform_int_distribution<int> mm(200, 3000);
  for (auto& p : img.pixels) p = static_cast<std::uint16_t>(mm(gen));
  return img;
}

inline CameraRig fixture_rig(std::mt19937& gen, int img_size, int n_views = 2) {
  CameraRig rig;
  const char* names[] = {"static", "gripper", "aux"};
  for (int v = 0; v < n_views; ++v) {
    CameraView view;
    view.name = names[v % 3];
    view.fx = view.fy = 10.0 + v;
    view.cx = view.cy = img_size / 2.0;
    view.width = view.height = img_size;
    view.world_from_camera = testgen::random_transform(gen);
    rig.views.push_back(std::move(view));
  }
  return rig;
}

/// A valid canonical episode whose frames live under scratch; poses stay
/// well inside the workspace and every action is the CRMM delta toward the
/// next step.
inline Episode make_episode(std::mt19937& gen, const std::string& id, const fs::path& scratch,
                            int steps = 4, int img_size = 8, bool with_depth = true,
                            const std::string& instruction = "pick up the red block") {
  Episode ep;
  ep.id = id;
  ep.origin_dataset = "synthetic";
  ep.instruction = instruction;
  ep.robot = "franka";
  ep.cameras = fixture_rig(gen, img_size);
  ep.extra = {{"fixture", true}};

  const fs::path src = scratch / (id + "_frames");
  fs::create_directories(src);
  std::uniform_real_distribution<double> xy(-0.4, 0.4), z(0.1, 0.9);
  std::bernoulli_distribution grip;

  for (int s = 0; s < steps; ++s) {
    Step step;
    step.pose.position = Eigen::Vector3d(xy(gen), xy(gen), z(gen));
    step.pose.orientation = testgen::random_unit_quat(gen);
    step.gripper = grip(gen) ? 1.0 : -1.0;
    for (const CameraView& view : ep.cameras.views) {
      const fs::path img = src / (view.name + "_" + std::to_string(s) + ".png");
      write_png_rgb8(img, random_rgb(gen, img_size));
      step.images[view.name] = img.string();
      if (with_depth) {
        const fs::path dep = src / (view.name + "_" + std::to_string(s) + "_d.png");
        write_png_gray16(dep, random_depth(gen, img_size));
        step.depth[view.name] = dep.string();
      }
    }
    ep.steps.push_back(std::move(step));
  }
  for (int s = 0; s + 1 < steps; ++s) {
    StepAction a = StepAction::from_delta(crmm(ep.steps[s].pose, ep.steps[s + 1].pose));
    a.gripper = ep.steps[s + 1].gripper;
    ep.steps[s].action = a;
  }
  return ep;
}

inline bool bits_equal(double a, double b) {
  std::uint64_t ua, ub;
  std::memcpy(&ua, &a, 8);
  std::memcpy(&ub, &b, 8);
  return ua == ub;
}

/// Bitwise equality of every numeric field that travels through steps.bin.
inline bool records_identical(const Episode& a, const Episode& b) {
  if (a.steps.size() != b.steps.size()) return false;
  for (std::size_t s = 0; s < a.steps.size(); ++s) {
    const Step& x = a.steps[s];
    const Step& y = b.steps[s];
    for (int i = 0; i < 3; ++i)
      if (!bits_equal(x.pose.position[i], y.pose.position[i])) return false;
    if (!bits_equal(x.pose.orientation.w, y.pose.orientation.w) ||
        !bits_equal(x.pose.orientation.x, y.pose.orientation.x) ||
        !bits_equal(x.pose.orientation.y, y.pose.orientation.y) ||
        !bits_equal(x.pose.orientation.z, y.pose.orientation.z))
      return false;
    if (!bits_equal(x.gripper, y.gripper)) return false;
    if (x.action.has_value() != y.action.has_value()) return false;
    if (x.action) {
      for (int i = 0; i < 3; ++i)
        if (!bits_equal(x.action->dpos[i], y.action->dpos[i])) return false;
      if (!bits_equal(x.action->drot.w, y.action->drot.w) ||
          !bits_equal(x.action->drot.x, y.action->drot.x) ||
          !bits_equal(x.action->drot.y, y.action->drot.y) ||
          !bits_equal(x.action->drot.z, y.action->drot.z))
        return false;
    }
  }
  return true;
}

/// Writes one native episode directory in the adapter's documented schema.
/// Poses are drawn inside the profile's native workspace; orientation is
/// constant when the profile has no rotation DOF (action_repr None).
inline void write_native_episode(const fs::path& dir, std::mt19937& gen,
                                 const DatasetProfile& profile, const std::string& instruction,
                                 int steps = 4, int img_size = 8, bool with_depth = false) {
  fs::create_directories(dir);
  nlohmann::json j;
  j["instruction"] = instruction;
  j["robot"] = "franka";
  j["extra"] = {{"native_tag", dir.filename().string()}};

  nlohmann::json cams = nlohmann::json::object();
  for (int v = 0; v < 2; ++v) {
    const std::string name = v == 0 ? "static" : "gripper";
    const RigidTransform extr = testgen::random_transform(gen);
    nlohmann::json rot = nlohmann::json::array();
    for (int r = 0; r < 3; ++r)
      rot.push_back({extr.rotation(r, 0), extr.rotation(r, 1), extr.rotation(r, 2)});
    cams[name] = {{"fx", 10.0},          {"fy", 10.0},
                  {"cx", img_size / 2.0}, {"cy", img_size / 2.0},
                  {"width", img_size},   {"height", img_size},
                  {"world_from_camera",
                   {{"rotation", rot},
                    {"translation",
                     {extr.translation.x(), extr.translation.y(), extr.translation.z()}}}}};
  }
  j["cameras"] = cams;

  const bool fixed_orientation = profile.action_repr == NativeActionRepr::None;
  const Quaternion constant_q = testgen::random_unit_quat(gen);
  std::uniform_real_distribution<double> u01(0.05, 0.95);
  std::bernoulli_distribution openclose;

  nlohmann::json steps_json = nlohmann::json::array();
  for (int s = 0; s < steps; ++s) {
    Eigen::Vector3d p;
    for (int a = 0; a < 3; ++a) {
      p[a] = profile.workspace_min[a] +
             u01(gen) * (profile.workspace_max[a] - profile.workspace_min[a]);
    }
    const Quaternion q = fixed_orientation ? constant_q : testgen::random_unit_quat(gen);
    nlohmann::json sj;
    sj["position"] = {p.x(), p.y(), p.z()};
    sj["orientation_wxyz"] = {q.w, q.x, q.y, q.z};
    sj["gripper"] = openclose(gen) ? profile.gripper_map.source_open
                                   : profile.gripper_map.source_close;
    // Native action fields are present but ignored by the adapter.
    if (profile.action_repr == NativeActionRepr::None) {
      sj["action"] = {0.01, 0.0, -0.01};
    } else {
      sj["action"] = {0.01, 0.0, -0.01, 0.0, 0.0, 0.02};
    }
    nlohmann::json images = nlohmann::json::object();
    nlohmann::json depth = nlohmann::json::object();
    for (const auto& [name, cj] : cams.items()) {
      const std::string img_rel = name + "_" + std::to_string(s) + ".png";
      write_png_rgb8(dir / img_rel, random_rgb(gen, img_size));
      images[name] = img_rel;
      if (with_depth) {
        const std::string dep_rel = name + "_" + std::to_string(s) + "_d.png";
        write_png_gray16(dir / dep_rel, random_depth(gen, img_size));
        depth[name] = dep_rel;
      }
    }
    sj["images"] = images;
    if (with_depth) sj["depth"] = depth;
    steps_json.push_back(std::move(sj));
  }
  j["steps"] = steps_json;

  std::ofstream out(dir / "episode.json");
  out << j.dump(2) << "\n";
}

/// A small native corpus for one profile: `count` episodes named ep000...
inline void write_native_corpus(const fs::path& root, std::mt19937& gen,
                                const DatasetProfile& profile, int count,
                                const std::vector<std::string>& instructions,
                                bool with_depth = false) {
  for (int i = 0; i < count; ++i) {
    char name[16];
    std::snprintf(name, sizeof(name), "ep%03d", i);
    write_native_episode(root / name, gen, profile,
                         instructions[static_cast<std::size_t>(i) % instructions.size()], 4, 8,
                         with_depth);
  }
}

}  // namespace fixtures
