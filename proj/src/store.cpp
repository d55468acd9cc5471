#include "robodata/store.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>

#include "robodata/digest.hpp"
#include "robodata/png_io.hpp"
#include "robodata/profiles.hpp"

namespace robodata {

static_assert(std::endian::native == std::endian::little,
              "steps.bin is little-endian; big-endian hosts are not supported");

namespace {

namespace fs = std::filesystem;

constexpr int kDoublesPerStep = 15;  // pose 7 + gripper 1 + action 7
constexpr int kMetaFormat = 1;

nlohmann::json vec3_json(const Eigen::Vector3d& v) { return {v.x(), v.y(), v.z()}; }

Eigen::Vector3d vec3_from(const nlohmann::json& j) {
  return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()};
}

nlohmann::json rig_to_json(const CameraRig& rig) {
  nlohmann::json views = nlohmann::json::array();
  for (const CameraView& v : rig.views) {
    nlohmann::json rot = nlohmann::json::array();
    for (int r = 0; r < 3; ++r) {
      rot.push_back({v.world_from_camera.rotation(r, 0), v.world_from_camera.rotation(r, 1),
                     v.world_from_camera.rotation(r, 2)});
    }
    views.push_back({{"name", v.name},
                     {"fx", v.fx},
                     {"fy", v.fy},
                     {"cx", v.cx},
                     {"cy", v.cy},
                     {"width", v.width},
                     {"height", v.height},
                     {"world_from_camera",
                      {{"rotation", rot}, {"translation", vec3_json(v.world_from_camera.translation)}}}});
  }
  return {{"views", views}};
}

CameraRig rig_from_json(const nlohmann::json& j) {
  CameraRig rig;
  for (const auto& vj : j.at("views")) {
    CameraView v;
    v.name = vj.at("name").get<std::string>();
    v.fx = vj.at("fx").get<double>();
    v.fy = vj.at("fy").get<double>();
    v.cx = vj.at("cx").get<double>();
    v.cy = vj.at("cy").get<double>();
    v.width = vj.at("width").get<int>();
    v.height = vj.at("height").get<int>();
    const auto& t = vj.at("world_from_camera");
    const auto& rot = t.at("rotation");
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) v.world_from_camera.rotation(r, c) = rot.at(r).at(c).get<double>();
    v.world_from_camera.translation = vec3_from(t.at("translation"));
    rig.views.push_back(std::move(v));
  }
  return rig;
}

std::string step_file_name(std::size_t step) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%05zu.png", step);
  return buf;
}

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

void dump_json(const nlohmann::json& j, const fs::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << j.dump(2) << "\n";
  if (!out) throw IoError("failed writing " + path.string());
}

fs::path resolve_ref(const Episode& episode, const std::string& ref) {
  const fs::path p(ref);
  if (p.is_absolute() || episode.root.empty()) return p;
  return episode.root / episode.id / p;
}

}  // namespace

std::string task_verb(const std::string& instruction) {
  std::size_t begin = 0;
  while (begin < instruction.size() && std::isspace(static_cast<unsigned char>(instruction[begin])))
    ++begin;
  std::size_t end = begin;
  while (end < instruction.size() && !std::isspace(static_cast<unsigned char>(instruction[end])))
    ++end;
  std::string verb = instruction.substr(begin, end - begin);
  std::transform(verb.begin(), verb.end(), verb.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return verb;
}

void write_episode(const Episode& episode, const fs::path& root) {
  if (episode.id.empty()) throw InvalidValueError("write_episode: episode id is empty");
  const fs::path dir = root / episode.id;
  fs::create_directories(dir);

  nlohmann::json meta{{"format", kMetaFormat},
                      {"id", episode.id},
                      {"origin", episode.origin_dataset},
                      {"instruction", episode.instruction},
                      {"robot", episode.robot},
                      {"steps", episode.steps.size()},
                      {"extra", episode.extra}};
  dump_json(meta, dir / "meta.json");
  dump_json(rig_to_json(episode.cameras), dir / "cameras.json");

  // Fixed-record numeric block plus its checksum.
  std::vector<double> records;
  records.reserve(episode.steps.size() * kDoublesPerStep);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const Step& s : episode.steps) {
    records.insert(records.end(),
                   {s.pose.position.x(), s.pose.position.y(), s.pose.position.z(),
                    s.pose.orientation.w, s.pose.orientation.x, s.pose.orientation.y,
                    s.pose.orientation.z, s.gripper});
    if (s.action) {
      records.insert(records.end(),
                     {s.action->dpos.x(), s.action->dpos.y(), s.action->dpos.z(),
                      s.action->drot.w, s.action->drot.x, s.action->drot.y, s.action->drot.z});
    } else {
      records.insert(records.end(), 7, nan);
    }
  }
  std::string bytes(reinterpret_cast<const char*>(records.data()),
                    records.size() * sizeof(double));
  {
    std::ofstream bin(dir / "steps.bin", std::ios::binary | std::ios::trunc);
    if (!bin) throw IoError("cannot write " + (dir / "steps.bin").string());
    bin.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!bin) throw IoError("failed writing " + (dir / "steps.bin").string());
  }
  {
    std::ofstream sha(dir / "steps.sha256", std::ios::trunc);
    sha << sha256_hex(bytes) << "\n";
  }

  // Materialize referenced frames into the canonical layout.
  auto copy_refs = [&](const std::map<std::string, std::string>& refs, const char* kind,
                       std::size_t step) {
    for (const auto& [view, ref] : refs) {
      const fs::path src = resolve_ref(episode, ref);
      const fs::path dst = dir / kind / view / step_file_name(step);
      fs::create_directories(dst.parent_path());
      if (fs::exists(dst) && fs::equivalent(src, dst)) continue;
      fs::copy_file(src, dst, fs::copy_options::overwrite_existing);
    }
  };
  for (std::size_t i = 0; i < episode.steps.size(); ++i) {
    copy_refs(episode.steps[i].images, "images", i);
    copy_refs(episode.steps[i].depth, "depth", i);
  }
}

Episode read_episode(const fs::path& root, const std::string& id) {
  const fs::path dir = root / id;
  if (!fs::exists(dir / "meta.json")) throw IoError("no episode at " + dir.string());

  // Verify the checksum before constructing anything.
  std::string bytes;
  {
    std::ifstream bin(dir / "steps.bin", std::ios::binary);
    if (!bin) throw IoError("cannot open " + (dir / "steps.bin").string());
    std::ostringstream buf;
    buf << bin.rdbuf();
    bytes = buf.str();
  }
  std::string want;
  {
    std::ifstream sha(dir / "steps.sha256");
    if (!sha) throw IoError("cannot open " + (dir / "steps.sha256").string());
    sha >> want;
  }
  if (sha256_hex(bytes) != want) {
    throw ChecksumError("steps.bin checksum mismatch in " + dir.string());
  }

  const nlohmann::json meta = load_json(dir / "meta.json");
  if (meta.value("format", -1) != kMetaFormat) {
    throw SchemaVersionError("unsupported episode format in " + dir.string());
  }

  Episode ep;
  ep.id = meta.at("id").get<std::string>();
  ep.origin_dataset = meta.value("origin", std::string{});
  ep.instruction = meta.value("instruction", std::string{});
  ep.robot = meta.value("robot", std::string{});
  ep.extra = meta.value("extra", nlohmann::json::object());
  ep.cameras = rig_from_json(load_json(dir / "cameras.json"));
  ep.root = root;

  const std::size_t step_count = meta.at("steps").get<std::size_t>();
  if (bytes.size() != step_count * kDoublesPerStep * sizeof(double)) {
    throw IoError("steps.bin length does not match the step count in " + dir.string());
  }
  std::vector<double> records(step_count * kDoublesPerStep);
  std::memcpy(records.data(), bytes.data(), bytes.size());

  for (std::size_t s = 0; s < step_count; ++s) {
    const double* r = records.data() + s * kDoublesPerStep;
    Step step;
    step.pose.position = Eigen::Vector3d(r[0], r[1], r[2]);
    step.pose.orientation = Quaternion::raw(r[3], r[4], r[5], r[6]);
    step.gripper = r[7];
    bool all_nan = true;
    for (int i = 8; i < 15; ++i) all_nan = all_nan && std::isnan(r[i]);
    if (!all_nan) {
      StepAction a;
      a.dpos = Eigen::Vector3d(r[8], r[9], r[10]);
      a.drot = Quaternion::raw(r[11], r[12], r[13], r[14]);
      a.gripper = step.gripper;
      step.action = a;
    }
    for (const CameraView& v : ep.cameras.views) {
      const std::string img = "images/" + v.name + "/" + step_file_name(s);
      if (fs::exists(dir / img)) step.images[v.name] = img;
      const std::string dep = "depth/" + v.name + "/" + step_file_name(s);
      if (fs::exists(dir / dep)) step.depth[v.name] = dep;
    }
    ep.steps.push_back(std::move(step));
  }

  // Action gripper commands ride in the successor's record.
  for (std::size_t s = 0; s + 1 < ep.steps.size(); ++s) {
    if (ep.steps[s].action) ep.steps[s].action->gripper = ep.steps[s + 1].gripper;
  }
  return ep;
}

std::vector<Violation> validate(const Episode& episode) {
  std::vector<Violation> out;
  auto flag = [&](std::string code, int step, std::string detail, std::string view = {}) {
    out.push_back({std::move(code), step, std::move(view), std::move(detail)});
  };

  if (episode.steps.size() < 2) {
    flag("too-few-steps", -1, "episodes need at least 2 steps");
  }
  if (episode.instruction.empty()) {
    flag("instruction-empty", -1, "language-conditioned episodes need an instruction");
  }
  for (const CameraView& v : episode.cameras.views) {
    if (!camera_valid(v)) {
      flag("camera-invalid", -1, "intrinsics or extrinsics out of range", v.name);
    }
  }

  const std::size_t n = episode.steps.size();
  for (std::size_t s = 0; s < n; ++s) {
    const Step& step = episode.steps[s];
    const int si = static_cast<int>(s);

    if (!step.pose.orientation.is_unit()) {
      flag("quaternion-not-unit", si,
           "pose quaternion norm " + std::to_string(step.pose.orientation.norm()));
    }
    if (!step.pose.position.allFinite() || !in_workspace(step.pose.position)) {
      flag("out-of-workspace", si, "position outside the unified workspace");
    }
    if (step.gripper != -1.0 && step.gripper != 1.0) {
      flag("gripper-not-canonical", si, "gripper " + std::to_string(step.gripper));
    }

    const bool has_successor = s + 1 < n;
    if (has_successor && !step.action) {
      flag("action-missing", si, "non-final step lacks an action");
    }
    if (!has_successor && step.action) {
      flag("action-on-final-step", si, "final step must not carry an action");
    }
    if (step.action && has_successor) {
      if (!step.action->drot.is_unit()) {
        flag("action-not-unit", si, "action rotation quaternion is not unit norm");
      } else if (step.pose.orientation.is_unit() &&
                 episode.steps[s + 1].pose.orientation.is_unit()) {
        const Pose rec = apply_crmm(step.pose, step.action->to_delta());
        const Pose& next = episode.steps[s + 1].pose;
        const double pos_err = (rec.position - next.position).norm();
        const double rot_err = geodesic_angle(rec.orientation, next.orientation);
        if (pos_err > 1e-6 || rot_err > 1e-6) {
          flag("action-pose-mismatch", si,
               "reconstruction error pos " + std::to_string(pos_err) + " rot " +
                   std::to_string(rot_err));
        }
      }
    }

    auto check_files = [&](const std::map<std::string, std::string>& refs, bool depth_kind) {
      for (const auto& [view, ref] : refs) {
        const fs::path path = resolve_ref(episode, ref);
        if (!fs::exists(path)) {
          flag(depth_kind ? "depth-missing" : "image-missing", si, ref, view);
          continue;
        }
        const CameraView* cam = episode.cameras.find(view);
        if (!cam) {
          flag("unknown-view", si, "no camera for view", view);
          continue;
        }
        const auto [w, h] = png_dimensions(path);
        if (w != cam->width || h != cam->height) {
          flag(depth_kind ? "depth-size-mismatch" : "image-size-mismatch", si,
               std::to_string(w) + "x" + std::to_string(h) + " vs rig " +
                   std::to_string(cam->width) + "x" + std::to_string(cam->height),
               view);
        }
      }
    };
    check_files(step.images, false);
    check_files(step.depth, true);
  }
  return out;
}

void write_manifest(const Manifest& manifest, const fs::path& root) {
  nlohmann::json episodes = nlohmann::json::array();
  for (const ManifestEntry& e : manifest.episodes) {
    episodes.push_back({{"id", e.id}, {"steps", e.steps}, {"verb", e.verb}});
  }
  dump_json(nlohmann::json{{"format", manifest.format},
                           {"image_size",
                            {{"height", manifest.image_height}, {"width", manifest.image_width}}},
                           {"profiles", manifest.profiles},
                           {"episodes", episodes}},
            root / "manifest.json");
}

Manifest read_manifest(const fs::path& root) {
  const nlohmann::json j = load_json(root / "manifest.json");
  Manifest m;
  m.format = j.value("format", -1);
  if (m.format != 1) throw SchemaVersionError("unsupported manifest format in " + root.string());
  m.image_height = j.at("image_size").at("height").get<int>();
  m.image_width = j.at("image_size").at("width").get<int>();
  if (j.contains("profiles")) {
    for (const auto& p : j.at("profiles")) m.profiles.push_back(p);
  }
  for (const auto& e : j.at("episodes")) {
    m.episodes.push_back({e.at("id").get<std::string>(), e.at("steps").get<int>(),
                          e.at("verb").get<std::string>()});
  }
  return m;
}

std::vector<std::string> list_episode_ids(const fs::path& root) {
  std::vector<std::string> ids;
  if (!fs::exists(root)) return ids;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (entry.is_directory() && fs::exists(entry.path() / "meta.json")) {
      ids.push_back(entry.path().filename().string());
    }
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

std::vector<TaskCount> stats(const Manifest& manifest) {
  std::map<std::string, long> counts;
  for (const ManifestEntry& e : manifest.episodes) counts[e.verb] += 1;
  std::vector<TaskCount> out;
  out.reserve(counts.size());
  for (const auto& [verb, count] : counts) out.push_back({verb, count});
  std::sort(out.begin(), out.end(), [](const TaskCount& a, const TaskCount& b) {
    if (a.count != b.count) return a.count > b.count;
    return a.verb < b.verb;
  });
  return out;
}

}  // namespace robodata
