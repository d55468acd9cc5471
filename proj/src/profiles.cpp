#include "robodata/profiles.hpp"

#include <fstream>

namespace robodata {

const char* to_string(NativeActionRepr r) {
  switch (r) {
    case NativeActionRepr::EADM: return "EADM";
    case NativeActionRepr::CRMM: return "CRMM";
    case NativeActionRepr::PCM: return "PCM";
    case NativeActionRepr::Absolute: return "Absolute";
    case NativeActionRepr::None: return "None";
  }
  return "?";
}

NativeActionRepr native_action_repr_from_string(const std::string& s) {
  if (s == "EADM") return NativeActionRepr::EADM;
  if (s == "CRMM") return NativeActionRepr::CRMM;
  if (s == "PCM") return NativeActionRepr::PCM;
  if (s == "Absolute") return NativeActionRepr::Absolute;
  if (s == "None") return NativeActionRepr::None;
  throw InvalidValueError("unknown action representation '" + s + "'");
}

const UnifiedFrameSpec& unified_frame() {
  static const UnifiedFrameSpec spec;
  return spec;
}

namespace {

RigidTransform make_transform(std::initializer_list<double> row_major9, double tx, double ty,
                              double tz) {
  RigidTransform t;
  auto it = row_major9.begin();
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) t.rotation(r, c) = *it++;
  t.translation = Eigen::Vector3d(tx, ty, tz);
  return t;
}

DatasetProfile make_profile(std::string name, RigidTransform world_from_native,
                            std::string axes, Eigen::Vector3d ws_min, Eigen::Vector3d ws_max,
                            NativeActionRepr repr, GripperMap gripper,
                            std::optional<ScaleVector> scale = std::nullopt) {
  DatasetProfile p;
  p.name = std::move(name);
  p.world_from_native = world_from_native;
  p.axis_convention = std::move(axes);
  p.workspace_min = ws_min;
  p.workspace_max = ws_max;
  p.action_repr = repr;
  p.gripper_map = gripper;
  p.scale = scale;
  return p;
}

std::vector<DatasetProfile> build_profiles() {
  std::vector<DatasetProfile> out;

  // CALVIN's frame already matches the unified convention; only network
  // actions carry per-axis scaling (0.02 m on xyz, 0.05 rad on rpy).
  out.push_back(make_profile("CALVIN", RigidTransform::identity(), "Right-Forward-Up",
                             {-0.43, -0.57, 0.43}, {0.37, -0.00, 0.80}, NativeActionRepr::EADM,
                             GripperMap(-1.0, 1.0), ScaleVector::uniform(0.02, 0.05)));

  out.push_back(make_profile("Meta-World", RigidTransform::identity(), "Right-Forward-Up",
                             {-0.50, -0.10, 0.12}, {0.48, 0.41, 0.60}, NativeActionRepr::None,
                             GripperMap(0.5, -0.5)));

  out.push_back(make_profile("Robomimic",
                             make_transform({0, 1, 0, -1, 0, 0, 0, 0, 1}, 0, 0, 0.4),
                             "Forward-Left-Up", {-0.17, -0.40, 0.90}, {0.33, 0.33, 1.29},
                             NativeActionRepr::CRMM, GripperMap(1.0, -1.0)));

  out.push_back(make_profile("LIBERO",
                             make_transform({0, 1, 0, -1, 0, 0, 0, 0, 1}, 0.3, 0, -0.1),
                             "Forward-Left-Up", {-0.24, -0.43, 0.01}, {0.86, 0.57, 0.90},
                             NativeActionRepr::CRMM, GripperMap(1.0, -1.0)));

  out.push_back(make_profile("ManiSkill2",
                             make_transform({0, 1, 0, 1, 0, 0, 0, 0, -1}, 0.3, 0, 0),
                             "Forward-Right-Down", {-0.26, -0.79, -1.17}, {0.85, 0.76, 0.00},
                             NativeActionRepr::PCM, GripperMap(-1.0, 1.0)));

  out.push_back(make_profile("RLBench",
                             make_transform({0, 1, 0, -1, 0, 0, 0, 0, 1}, 0, 0, 0.7),
                             "Forward-Left-Up", {-0.89, -0.72, 0.80}, {0.56, 0.69, 1.89},
                             NativeActionRepr::Absolute, GripperMap(0.0, 1.0)));

  // Colosseum shares RLBench's conventions and transform.
  out.push_back(make_profile("Colosseum",
                             make_transform({0, 1, 0, -1, 0, 0, 0, 0, 1}, 0, 0, 0.7),
                             "Forward-Left-Up", {-0.68, -0.68, 0.83}, {0.54, 0.70, 1.85},
                             NativeActionRepr::Absolute, GripperMap(0.0, 1.0)));

  out.push_back(make_profile("RoboCAS",
                             make_transform({0, 1, 0, -1, 0, 0, 0, 0, 1}, 0.3, 0, 0.7),
                             "Forward-Left-Up", {-0.70, -0.82, 0.062}, {0.85, 0.67, 0.92},
                             NativeActionRepr::Absolute, GripperMap(0.0, 0.08)));

  return out;
}

}  // namespace

const std::vector<DatasetProfile>& builtin_profiles() {
  static const std::vector<DatasetProfile> profiles = build_profiles();
  return profiles;
}

const DatasetProfile* find_profile(const std::vector<DatasetProfile>& profiles,
                                   const std::string& name) {
  for (const auto& p : profiles) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

Pose align_pose(const DatasetProfile& profile, const Pose& native) {
  return transform_pose(profile.world_from_native, native);
}

DeltaAction align_action(const DatasetProfile& profile, const Pose& native_t,
                         const Pose& native_t1, double gripper) {
  return crmm(align_pose(profile, native_t), align_pose(profile, native_t1), gripper);
}

bool in_workspace(const Eigen::Vector3d& p, double tol) {
  const auto& spec = unified_frame();
  for (int a = 0; a < 3; ++a) {
    if (p[a] < spec.workspace_min[a] - tol || p[a] > spec.workspace_max[a] + tol) return false;
  }
  return true;
}

ClipReport clip_report(const std::vector<Eigen::Vector3d>& positions) {
  ClipReport report;
  if (positions.empty()) return report;
  const auto& spec = unified_frame();
  const double tol = 1e-6;
  report.min_seen = positions.front();
  report.max_seen = positions.front();
  for (std::size_t i = 0; i < positions.size(); ++i) {
    const Eigen::Vector3d& p = positions[i];
    report.min_seen = report.min_seen.cwiseMin(p);
    report.max_seen = report.max_seen.cwiseMax(p);
    bool offending = false;
    for (int a = 0; a < 3; ++a) {
      if (p[a] < spec.workspace_min[a] - tol) {
        report.violations.push_back({i, a, false});
        offending = true;
      } else if (p[a] > spec.workspace_max[a] + tol) {
        report.violations.push_back({i, a, true});
        offending = true;
      }
    }
    if (offending) ++report.out_of_bounds_count;
  }
  return report;
}

namespace {

nlohmann::json vec3_to_json(const Eigen::Vector3d& v) { return {v.x(), v.y(), v.z()}; }

Eigen::Vector3d vec3_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 3) throw InvalidValueError("expected a 3-vector");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

}  // namespace

nlohmann::json profile_to_json(const DatasetProfile& p) {
  nlohmann::json rot = nlohmann::json::array();
  for (int r = 0; r < 3; ++r) {
    rot.push_back({p.world_from_native.rotation(r, 0), p.world_from_native.rotation(r, 1),
                   p.world_from_native.rotation(r, 2)});
  }
  nlohmann::json j{
      {"name", p.name},
      {"axis_convention", p.axis_convention},
      {"world_from_native",
       {{"rotation", rot}, {"translation", vec3_to_json(p.world_from_native.translation)}}},
      {"workspace_min", vec3_to_json(p.workspace_min)},
      {"workspace_max", vec3_to_json(p.workspace_max)},
      {"action_repr", to_string(p.action_repr)},
      {"gripper", {{"open", p.gripper_map.source_open}, {"close", p.gripper_map.source_close}}},
  };
  if (p.scale) {
    j["scale"] = std::vector<double>(p.scale->factors.data(), p.scale->factors.data() + 6);
  }
  return j;
}

DatasetProfile profile_from_json(const nlohmann::json& j) {
  DatasetProfile p;
  p.name = j.at("name").get<std::string>();
  p.axis_convention = j.value("axis_convention", std::string{});
  const auto& t = j.at("world_from_native");
  const auto& rot = t.at("rotation");
  if (!rot.is_array() || rot.size() != 3) throw InvalidValueError("expected a 3x3 rotation");
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) p.world_from_native.rotation(r, c) = rot[r][c].get<double>();
  p.world_from_native.translation = vec3_from_json(t.at("translation"));
  if (!is_rigid(p.world_from_native)) {
    throw InvalidRotationError("profile '" + p.name + "': world_from_native is not rigid");
  }
  p.workspace_min = vec3_from_json(j.at("workspace_min"));
  p.workspace_max = vec3_from_json(j.at("workspace_max"));
  if (!(p.workspace_min.array() < p.workspace_max.array()).all()) {
    throw InvalidValueError("profile '" + p.name + "': workspace_min must be below workspace_max");
  }
  p.action_repr = native_action_repr_from_string(j.at("action_repr").get<std::string>());
  const auto& g = j.at("gripper");
  p.gripper_map = GripperMap(g.at("open").get<double>(), g.at("close").get<double>());
  if (j.contains("scale")) {
    const auto s = j.at("scale").get<std::vector<double>>();
    if (s.size() != 6) throw InvalidScaleError("scale must have 6 entries");
    Eigen::Matrix<double, 6, 1> f;
    for (int i = 0; i < 6; ++i) f[i] = s[i];
    p.scale = ScaleVector(f);
  }
  return p;
}

std::vector<DatasetProfile> load_profiles(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open profile file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw IoError("cannot parse profile file " + path + ": " + e.what());
  }
  std::vector<DatasetProfile> out;
  if (j.is_array()) {
    for (const auto& item : j) out.push_back(profile_from_json(item));
  } else {
    out.push_back(profile_from_json(j));
  }
  return out;
}

}  // namespace robodata
