#pragma once

#include <filesystem>

#include "robodata/loss.hpp"

// Binary fixture container for the loss CLI, following the store's
// little-endian float64 conventions:
//
//   magic    "RDLB", uint32 version = 1
//   uint32   H (timesteps)
//   uint32   flags: bit0 simg, bit1 gimg, bit2 occ
//   f64      pred_pose[H x 6], pred_gripper[H],
//            target_pose[H x 6], target_gripper[H]
//   if simg: uint32 rows, cols; f64 pred frames [H x rows x cols],
//            then target frames (row-major)
//   if gimg: same layout
//   if occ:  uint32 points; per timestep f64 pred_pos[N x 3],
//            pred_rgb[N x 3], target_pos[N x 3], target_rgb[N x 3]

namespace robodata {

void write_bundle(const std::filesystem::path& path, const PredictionBundle& bundle);
PredictionBundle read_bundle(const std::filesystem::path& path);

}  // namespace robodata
