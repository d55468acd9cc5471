#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "robodata/episode.hpp"
#include "robodata/profiles.hpp"

// Adapter for pre-exported native episode trees. Expected input layout:
//
//   <native_root>/<episode_id>/episode.json
//   <native_root>/<episode_id>/<frames referenced by episode.json>
//
// episode.json, everything in the dataset's native frame and conventions:
//
//   {
//     "instruction": "...",
//     "robot": "...",                                  (optional)
//     "cameras": { "<view>": { "fx", "fy", "cx", "cy", "width", "height",
//                              "world_from_camera": { "rotation": [[...]],
//                                                     "translation": [...] } } },
//     "steps": [ { "position": [x, y, z],
//                  "orientation_wxyz": [w, x, y, z],
//                  "gripper": <native value>,
//                  "images": { "<view>": "relative/path.png" },
//                  "depth":  { "<view>": "relative/path.png" },   (optional)
//                  "action": [...] }, ... ],            (optional; ignored)
//     "extra": { ... }                                  (optional, preserved)
//   }
//
// Ingestion re-bases poses and camera extrinsics into the unified frame,
// remaps grippers to {-1, +1}, and regenerates every action as the CRMM
// delta between consecutive aligned poses; native action fields are never
// trusted. Profiles whose action representation is None (position-only
// robots) get an exact identity rotation payload. The action at step t
// carries the canonical gripper state of step t+1 as its command.

namespace robodata {

/// Directories under root containing an episode.json, sorted by name.
std::vector<std::filesystem::path> list_native_episodes(const std::filesystem::path& root);

/// Converts one native episode; throws on unreadable or invalid input.
Episode ingest_episode(const std::filesystem::path& native_dir, const DatasetProfile& profile);

struct IngestDiagnostic {
  std::filesystem::path dir;
  std::string message;
};

struct IngestResult {
  std::vector<Episode> episodes;
  std::vector<IngestDiagnostic> skipped;
};

/// Converts every episode under root, skipping unreadable ones with a
/// diagnostic.
IngestResult ingest(const std::filesystem::path& root, const DatasetProfile& profile);

}  // namespace robodata
