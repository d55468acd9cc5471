// Operator-facing batch tool: convert native trees into the canonical
// store, then validate, summarize, and derive training targets from it.
// Machine-readable JSON goes to stdout, human diagnostics to stderr.
// Exit codes: 0 success, 1 fatal configuration or store error, 2 when
// individual episodes failed or violations were found.

#include <CLI11.hpp>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "robodata/bundle.hpp"
#include "robodata/ingest.hpp"
#include "robodata/loss.hpp"
#include "robodata/occupancy.hpp"
#include "robodata/png_io.hpp"
#include "robodata/profiles.hpp"
#include "robodata/store.hpp"
#include "robodata/tokens.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace robodata;

namespace {

// Builtins, then ROBODATA_PROFILE_PATH entries (colon separated), then the
// explicit --profile-file; later definitions override earlier ones by name.
std::vector<DatasetProfile> gather_profiles(const std::string& profile_file) {
  std::vector<DatasetProfile> out = builtin_profiles();
  auto merge = [&out](std::vector<DatasetProfile> extra) {
    for (auto& p : extra) {
      bool replaced = false;
      for (auto& existing : out) {
        if (existing.name == p.name) {
          existing = p;
          replaced = true;
          break;
        }
      }
      if (!replaced) out.push_back(std::move(p));
    }
  };
  if (const char* env = std::getenv("ROBODATA_PROFILE_PATH")) {
    std::stringstream ss(env);
    std::string path;
    while (std::getline(ss, path, ':')) {
      if (!path.empty()) merge(load_profiles(path));
    }
  }
  if (!profile_file.empty()) merge(load_profiles(profile_file));
  return out;
}

std::string profile_names(const std::vector<DatasetProfile>& profiles) {
  std::string out;
  for (const auto& p : profiles) {
    if (!out.empty()) out += ", ";
    out += p.name;
  }
  return out;
}

struct ConvertOutcome {
  bool written = false;
  std::string id;
  int steps = 0;
  std::string verb;
  std::size_t workspace_warnings = 0;
  std::string error;
};

int cmd_convert(const std::string& dataset, const fs::path& in, const fs::path& out,
                int jobs, const std::string& profile_file) {
  const auto profiles = gather_profiles(profile_file);
  const DatasetProfile* profile = find_profile(profiles, dataset);
  if (!profile) {
    std::cerr << "unknown profile '" << dataset << "'; valid profiles: "
              << profile_names(profiles) << "\n";
    return 1;
  }

  const std::vector<fs::path> dirs = list_native_episodes(in);
  fs::create_directories(out);
  std::vector<ConvertOutcome> outcomes(dirs.size());
  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;

  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= dirs.size()) return;
      ConvertOutcome& o = outcomes[i];
      try {
        Episode ep = ingest_episode(dirs[i], *profile);
        std::vector<Eigen::Vector3d> positions;
        for (const Step& s : ep.steps) positions.push_back(s.pose.position);
        o.workspace_warnings = clip_report(positions).out_of_bounds_count;

        // Workspace excursions are warnings; everything else blocks the
        // episode.
        std::string blocking;
        for (const Violation& v : validate(ep)) {
          if (v.code != "out-of-workspace") {
            blocking = v.code + ": " + v.detail;
            break;
          }
        }
        if (!blocking.empty()) throw InvalidValueError(blocking);

        write_episode(ep, out);
        o.written = true;
        o.id = ep.id;
        o.steps = static_cast<int>(ep.steps.size());
        o.verb = task_verb(ep.instruction);
      } catch (const std::exception& e) {
        o.error = e.what();
        std::lock_guard<std::mutex> lock(log_mutex);
        std::cerr << "episode " << dirs[i].filename().string() << " failed: " << e.what() << "\n";
      }
    }
  };

  const int n_jobs = std::max(1, jobs);
  std::vector<std::thread> pool;
  for (int t = 1; t < n_jobs; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  Manifest manifest;
  manifest.profiles.push_back(profile_to_json(*profile));
  std::size_t written = 0, skipped = 0, warnings = 0;
  for (const ConvertOutcome& o : outcomes) {
    if (o.written) {
      manifest.episodes.push_back({o.id, o.steps, o.verb});
      warnings += o.workspace_warnings;
      ++written;
    } else {
      ++skipped;
    }
  }
  std::sort(manifest.episodes.begin(), manifest.episodes.end(),
            [](const ManifestEntry& a, const ManifestEntry& b) { return a.id < b.id; });
  if (!manifest.episodes.empty()) {
    const Episode first = read_episode(out, manifest.episodes.front().id);
    if (!first.cameras.views.empty()) {
      manifest.image_width = first.cameras.views.front().width;
      manifest.image_height = first.cameras.views.front().height;
    }
  }
  write_manifest(manifest, out);

  std::cout << json{{"command", "convert"},
                    {"dataset", dataset},
                    {"episodes", written},
                    {"skipped", skipped},
                    {"workspace_warnings", warnings}}
                   .dump()
            << "\n";
  return skipped > 0 ? 2 : 0;
}

int cmd_validate(const fs::path& in) {
  const Manifest manifest = read_manifest(in);
  json violations = json::array();
  std::size_t count = 0;
  for (const ManifestEntry& entry : manifest.episodes) {
    const Episode ep = read_episode(in, entry.id);
    for (const Violation& v : validate(ep)) {
      ++count;
      violations.push_back({{"episode", entry.id},
                            {"code", v.code},
                            {"step", v.step},
                            {"view", v.view},
                            {"detail", v.detail}});
      std::cerr << entry.id << " step " << v.step << ": " << v.code << " (" << v.detail << ")\n";
    }
  }
  if (count == 0) std::cerr << "0 violations\n";
  std::cout << json{{"command", "validate"},
                    {"episodes", manifest.episodes.size()},
                    {"violation_count", count},
                    {"violations", violations}}
                   .dump()
            << "\n";
  return count > 0 ? 2 : 0;
}

int cmd_stats(const fs::path& in) {
  const Manifest manifest = read_manifest(in);
  json verbs = json::array();
  for (const TaskCount& t : stats(manifest)) {
    verbs.push_back({{"verb", t.verb}, {"count", t.count}});
    std::cerr << t.verb << "\t" << t.count << "\n";
  }
  std::cout << json{{"command", "stats"},
                    {"episodes", manifest.episodes.size()},
                    {"verbs", verbs}}
                   .dump()
            << "\n";
  return 0;
}

int cmd_occupancy(const fs::path& in, const std::string& grid_spec) {
  int l = 0, b = 0, p = 0;
  if (std::sscanf(grid_spec.c_str(), "%dx%dx%d", &l, &b, &p) != 3) {
    std::cerr << "--grid expects LxBxP, e.g. 80x80x40\n";
    return 1;
  }
  const GridQuery grid = make_grid(l, b, p);
  const Manifest manifest = read_manifest(in);
  std::size_t grids_written = 0, steps_without_depth = 0, points_dropped = 0;
  for (const ManifestEntry& entry : manifest.episodes) {
    const Episode ep = read_episode(in, entry.id);
    const fs::path occ_dir = in / entry.id / "occupancy";
    for (std::size_t s = 0; s < ep.steps.size(); ++s) {
      const Step& step = ep.steps[s];
      if (step.depth.empty()) {
        ++steps_without_depth;
        continue;
      }
      ColoredCloud fused;
      for (const auto& [view, depth_ref] : step.depth) {
        const CameraView* cam = ep.cameras.find(view);
        const auto img_ref = step.images.find(view);
        if (!cam || img_ref == step.images.end()) continue;
        const ImageGray16 depth_png = read_png_gray16(in / entry.id / depth_ref);
        const ImageRgb8 rgb_png = read_png_rgb8(in / entry.id / img_ref->second);
        const ColoredCloud cloud =
            unproject_depth(*cam, depth_to_meters(depth_png), rgb_planes(rgb_png));
        fused.points.insert(fused.points.end(), cloud.points.begin(), cloud.points.end());
        fused.colors.insert(fused.colors.end(), cloud.colors.begin(), cloud.colors.end());
      }
      const OccupancyGrid target = voxelize(fused, grid);
      points_dropped += target.dropped;
      fs::create_directories(occ_dir);
      char name[32];
      std::snprintf(name, sizeof(name), "%05zu.occ", s);
      write_occupancy(occ_dir / name, target);
      ++grids_written;
    }
  }
  std::cout << json{{"command", "occupancy"},
                    {"episodes", manifest.episodes.size()},
                    {"grid", grid_spec},
                    {"grids", grids_written},
                    {"steps_without_depth", steps_without_depth},
                    {"points_dropped", points_dropped}}
                   .dump()
            << "\n";
  return 0;
}

int cmd_mask(int timesteps, const std::string& lens_spec, const std::string& disable_spec) {
  std::vector<int> lens;
  std::stringstream ss(lens_spec);
  std::string item;
  while (std::getline(ss, item, ',')) lens.push_back(std::stoi(item));

  bool simg = true, gimg = true, occ = true;
  if (!disable_spec.empty()) {
    std::stringstream ds(disable_spec);
    while (std::getline(ds, item, ',')) {
      if (item == "simg") simg = false;
      else if (item == "gimg") gimg = false;
      else if (item == "occ") occ = false;
      else {
        std::cerr << "unknown modality '" << item << "'; expected simg, gimg, occ\n";
        return 1;
      }
    }
  }
  const TokenLayout layout = build_layout(timesteps, lens);
  if (simg && gimg && occ) {
    write_mask_dump(std::cout, layout, build_mask(layout));
  } else {
    const auto [sub, mask] =
        subset_layout(layout, ModalitySubset::uniform(timesteps, simg, gimg, occ));
    write_mask_dump(std::cout, sub, mask);
  }
  return 0;
}

int cmd_loss(const fs::path& bundle_path, const LossWeights& weights) {
  const PredictionBundle bundle = read_bundle(bundle_path);
  const LossBreakdown breakdown = total_loss(bundle, weights);
  json out{{"command", "loss"},
           {"total", breakdown.total},
           {"action", breakdown.action},
           {"lambdas",
            {{"image", weights.image},
             {"occ", weights.occ},
             {"gripper", weights.gripper},
             {"rgb", weights.rgb}}}};
  out["simg"] = breakdown.simg ? json(*breakdown.simg) : json(nullptr);
  out["gimg"] = breakdown.gimg ? json(*breakdown.gimg) : json(nullptr);
  out["occ"] = breakdown.occ ? json(*breakdown.occ) : json(nullptr);
  std::cout << out.dump() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"robodata: unify robot-manipulation episodes into one canonical store"};
  app.require_subcommand(1);

  std::string dataset, profile_file, grid_spec = "80x80x40", lens_spec, disable_spec;
  fs::path in_dir, out_dir, bundle_path;
  int jobs = 1, timesteps = 1;
  LossWeights weights;

  CLI::App* convert = app.add_subcommand("convert", "convert a native dataset tree");
  convert->add_option("--dataset", dataset, "profile name")->required();
  convert->add_option("--in", in_dir, "native input root")->required();
  convert->add_option("--out", out_dir, "canonical output root")->required();
  convert->add_option("--jobs", jobs, "parallel episode workers");
  convert->add_option("--profile-file", profile_file, "extra profile JSON file");

  CLI::App* validate_cmd = app.add_subcommand("validate", "check a canonical store");
  validate_cmd->add_option("--in", in_dir, "canonical store root")->required();

  CLI::App* stats_cmd = app.add_subcommand("stats", "task-frequency table");
  stats_cmd->add_option("--in", in_dir, "canonical store root")->required();

  CLI::App* occupancy_cmd = app.add_subcommand("occupancy", "write occupancy targets");
  occupancy_cmd->add_option("--in", in_dir, "canonical store root")->required();
  occupancy_cmd->add_option("--grid", grid_spec, "grid dims LxBxP");

  CLI::App* mask_cmd = app.add_subcommand("mask", "dump a token layout and MIM mask");
  mask_cmd->add_option("--timesteps", timesteps, "number of timesteps")->required();
  mask_cmd->add_option("--text-lens", lens_spec, "comma-separated text lengths")->required();
  mask_cmd->add_option("--disable", disable_spec, "read-out groups to drop (simg,gimg,occ)");

  CLI::App* loss_cmd = app.add_subcommand("loss", "loss breakdown for a prediction bundle");
  loss_cmd->add_option("--bundle", bundle_path, "bundle file")->required();
  loss_cmd->add_option("--lambda-image", weights.image, "image loss weight");
  loss_cmd->add_option("--lambda-occ", weights.occ, "occupancy loss weight");
  loss_cmd->add_option("--lambda-g", weights.gripper, "gripper BCE weight");
  loss_cmd->add_option("--lambda-rgb", weights.rgb, "occupancy rgb weight");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (convert->parsed()) return cmd_convert(dataset, in_dir, out_dir, jobs, profile_file);
    if (validate_cmd->parsed()) return cmd_validate(in_dir);
    if (stats_cmd->parsed()) return cmd_stats(in_dir);
    if (occupancy_cmd->parsed()) return cmd_occupancy(in_dir, grid_spec);
    if (mask_cmd->parsed()) return cmd_mask(timesteps, lens_spec, disable_spec);
    if (loss_cmd->parsed()) return cmd_loss(bundle_path, weights);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
