#pragma once

#include <filesystem>
#include <vector>

#include "robodata/episode.hpp"

namespace robodata {

/// Writes one episode directory under root, copying any referenced image
/// and depth files into the canonical layout. Numeric content round-trips
/// bit exactly through read_episode.
void write_episode(const Episode& episode, const std::filesystem::path& root);

/// Reads root/<id>. Verifies the steps checksum before constructing
/// anything; throws ChecksumError / SchemaVersionError / IoError.
Episode read_episode(const std::filesystem::path& root, const std::string& id);

/// One validation finding. Violations are data, not errors.
struct Violation {
  std::string code;
  int step = -1;
  std::string view;
  std::string detail;
};

/// Checks episode invariants: quaternion norms, workspace membership,
/// canonical gripper values, camera validity, CRMM action consistency with
/// the successor pose (1e-6), and stored image sizes against the rig.
std::vector<Violation> validate(const Episode& episode);

void write_manifest(const Manifest& manifest, const std::filesystem::path& root);
Manifest read_manifest(const std::filesystem::path& root);

/// Episode ids found under a canonical store root (sorted).
std::vector<std::string> list_episode_ids(const std::filesystem::path& root);

struct TaskCount {
  std::string verb;
  long count = 0;
};

/// Episodes per leading instruction verb, sorted by descending count (ties
/// alphabetical).
std::vector<TaskCount> stats(const Manifest& manifest);

}  // namespace robodata
