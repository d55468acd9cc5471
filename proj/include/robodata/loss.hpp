#pragma once

#include <optional>
#include <vector>

#include <Eigen/Core>

#include "robodata/error.hpp"
#include "robodata/occupancy.hpp"

// Reference training losses on plain numeric arrays, with analytic
// gradients w.r.t. the predictions. Summation order is fixed (sequential
// over timesteps, row-major within a tensor) so results are bit
// reproducible.

namespace robodata {

/// Balancing weights; defaults follow the training recipe.
struct LossWeights {
  double image = 0.1;
  double occ = 0.1;
  double gripper = 0.01;
  double rgb = 0.5;
};

inline constexpr double kProbClamp = 1e-7;

/// Binary cross-entropy with the probability clamped to
/// [kProbClamp, 1 - kProbClamp]; y must be 0 or 1.
double bce(double p, double y);

struct ActionLossResult {
  double value = 0;
  Eigen::MatrixXd grad_pose;     // H x 6
  Eigen::VectorXd grad_gripper;  // H
  bool clamped = false;          // a probability needed clamping
};

/// Per timestep: mean squared error over the 6 pose dims plus
/// lambda_g * BCE on the gripper probability; summed over timesteps.
/// Gripper targets are {0, 1} (canonical -1/+1 maps to 0/1 here).
ActionLossResult action_loss(const Eigen::MatrixXd& pred_pose,
                             const Eigen::VectorXd& pred_gripper,
                             const Eigen::MatrixXd& target_pose,
                             const Eigen::VectorXd& target_gripper, double lambda_g);

struct ImageLossResult {
  double value = 0;
  std::vector<Eigen::ArrayXXd> grad;  // one per timestep
};

/// Sum over timesteps of the summed squared pixel difference. Frames are
/// arbitrary 2-D arrays (stack channels side by side); NaN pixels are an
/// error, not a silent result.
ImageLossResult image_loss(const std::vector<Eigen::ArrayXXd>& pred,
                           const std::vector<Eigen::ArrayXXd>& target);

using PointMatrix = Eigen::Matrix<double, Eigen::Dynamic, 3>;

struct OccupancyLossResult {
  double value = 0;
  std::vector<PointMatrix> grad_pos;
  std::vector<PointMatrix> grad_rgb;
};

/// Sum over timesteps and matched points of |dpos|^2 + lambda_rgb |drgb|^2.
/// Point sets are matched by row; a per-timestep cardinality mismatch is an
/// error.
OccupancyLossResult occupancy_loss(const std::vector<PointMatrix>& pred_pos,
                                   const std::vector<PointMatrix>& pred_rgb,
                                   const std::vector<PointMatrix>& target_pos,
                                   const std::vector<PointMatrix>& target_rgb, double lambda_rgb);

/// How two occupancy grids are paired into point lists for the loss.
enum class OccMatchMode { UnionOfOccupied, TargetOnly };

struct MatchedPoints {
  PointMatrix pred_pos, pred_rgb, target_pos, target_rgb;
};

/// Dense grid-index pairing of two grids over the same lattice: positions
/// are the voxel centers, rgb is zero where a side is unoccupied.
MatchedPoints match_grids(const OccupancyGrid& pred, const OccupancyGrid& target,
                          const GridQuery& grid, OccMatchMode mode = OccMatchMode::UnionOfOccupied);

struct OccPointSets {
  std::vector<PointMatrix> pred_pos, pred_rgb, target_pos, target_rgb;
};

/// Everything total_loss needs. Image and occupancy parts are optional and
/// contribute zero when absent.
struct PredictionBundle {
  Eigen::MatrixXd pred_pose, target_pose;      // H x 6
  Eigen::VectorXd pred_gripper, target_gripper;  // H; targets in {0, 1}
  std::optional<std::vector<Eigen::ArrayXXd>> pred_simg, target_simg;
  std::optional<std::vector<Eigen::ArrayXXd>> pred_gimg, target_gimg;
  std::optional<OccPointSets> occ;
};

struct LossBreakdown {
  double total = 0;
  double action = 0;
  std::optional<double> simg, gimg, occ;
};

/// l = l_a + lambda_image (l_simg + l_gimg) + lambda_occ l_o over
/// precomputed components.
LossBreakdown combine_losses(double action, std::optional<double> simg, std::optional<double> gimg,
                             std::optional<double> occ, const LossWeights& weights);

LossBreakdown total_loss(const PredictionBundle& bundle, const LossWeights& weights);

}  // namespace robodata
