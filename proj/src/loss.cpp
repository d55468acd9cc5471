#include "robodata/loss.hpp"

#include <algorithm>
#include <cmath>

namespace robodata {

namespace {

double clamp_prob(double p, bool* clamped) {
  if (!std::isfinite(p)) throw InvalidValueError("gripper probability is not finite");
  if (p < kProbClamp) {
    if (clamped) *clamped = true;
    return kProbClamp;
  }
  if (p > 1.0 - kProbClamp) {
    if (clamped) *clamped = true;
    return 1.0 - kProbClamp;
  }
  return p;
}

}  // namespace

double bce(double p, double y) {
  if (y != 0.0 && y != 1.0) {
    throw InvalidValueError("bce: gripper target must be 0 or 1");
  }
  const double q = clamp_prob(p, nullptr);
  return -(y * std::log(q) + (1.0 - y) * std::log(1.0 - q));
}

ActionLossResult action_loss(const Eigen::MatrixXd& pred_pose,
                             const Eigen::VectorXd& pred_gripper,
                             const Eigen::MatrixXd& target_pose,
                             const Eigen::VectorXd& target_gripper, double lambda_g) {
  const Eigen::Index h = pred_pose.rows();
  if (pred_pose.cols() != 6 || target_pose.rows() != h || target_pose.cols() != 6 ||
      pred_gripper.size() != h || target_gripper.size() != h) {
    throw ShapeMismatchError("action_loss: prediction and target shapes do not match");
  }
  ActionLossResult out;
  out.grad_pose = Eigen::MatrixXd::Zero(h, 6);
  out.grad_gripper = Eigen::VectorXd::Zero(h);
  for (Eigen::Index t = 0; t < h; ++t) {
    const Eigen::Matrix<double, 1, 6> diff = pred_pose.row(t) - target_pose.row(t);
    out.value += diff.squaredNorm() / 6.0;
    out.grad_pose.row(t) = diff * (2.0 / 6.0);

    const double y = target_gripper[t];
    if (y != 0.0 && y != 1.0) {
      throw InvalidValueError("action_loss: gripper target must be 0 or 1");
    }
    const double p = clamp_prob(pred_gripper[t], &out.clamped);
    out.value += lambda_g * (-(y * std::log(p) + (1.0 - y) * std::log(1.0 - p)));
    out.grad_gripper[t] = lambda_g * (-(y / p) + (1.0 - y) / (1.0 - p));
  }
  return out;
}

ImageLossResult image_loss(const std::vector<Eigen::ArrayXXd>& pred,
                           const std::vector<Eigen::ArrayXXd>& target) {
  if (pred.size() != target.size()) {
    throw ShapeMismatchError("image_loss: timestep counts differ");
  }
  ImageLossResult out;
  out.grad.reserve(pred.size());
  for (std::size_t t = 0; t < pred.size(); ++t) {
    if (pred[t].rows() != target[t].rows() || pred[t].cols() != target[t].cols()) {
      throw ShapeMismatchError("image_loss: frame shapes differ at timestep " + std::to_string(t));
    }
    if (!pred[t].allFinite() || !target[t].allFinite()) {
      throw InvalidValueError("image_loss: non-finite pixel at timestep " + std::to_string(t));
    }
    const Eigen::ArrayXXd diff = pred[t] - target[t];
    out.value += (diff * diff).sum();
    out.grad.push_back(2.0 * diff);
  }
  return out;
}

OccupancyLossResult occupancy_loss(const std::vector<PointMatrix>& pred_pos,
                                   const std::vector<PointMatrix>& pred_rgb,
                                   const std::vector<PointMatrix>& target_pos,
                                   const std::vector<PointMatrix>& target_rgb,
                                   double lambda_rgb) {
  const std::size_t h = pred_pos.size();
  if (pred_rgb.size() != h || target_pos.size() != h || target_rgb.size() != h) {
    throw ShapeMismatchError("occupancy_loss: timestep counts differ");
  }
  OccupancyLossResult out;
  for (std::size_t t = 0; t < h; ++t) {
    const Eigen::Index n = pred_pos[t].rows();
    if (pred_rgb[t].rows() != n || target_pos[t].rows() != n || target_rgb[t].rows() != n) {
      throw ShapeMismatchError("occupancy_loss: point cardinality mismatch at timestep " +
                               std::to_string(t));
    }
    const PointMatrix dpos = pred_pos[t] - target_pos[t];
    const PointMatrix drgb = pred_rgb[t] - target_rgb[t];
    out.value += dpos.squaredNorm() + lambda_rgb * drgb.squaredNorm();
    out.grad_pos.push_back(2.0 * dpos);
    out.grad_rgb.push_back(2.0 * lambda_rgb * drgb);
  }
  return out;
}

MatchedPoints match_grids(const OccupancyGrid& pred, const OccupancyGrid& target,
                          const GridQuery& grid, OccMatchMode mode) {
  if (pred.l != grid.l || pred.b != grid.b || pred.p != grid.p || target.l != grid.l ||
      target.b != grid.b || target.p != grid.p) {
    throw ShapeMismatchError("match_grids: grids do not share the query lattice");
  }
  std::vector<std::size_t> cells;
  for (int i = 0; i < grid.l; ++i) {
    for (int j = 0; j < grid.b; ++j) {
      for (int k = 0; k < grid.p; ++k) {
        const std::size_t idx = grid.index(i, j, k);
        const bool pick = mode == OccMatchMode::UnionOfOccupied
                              ? (pred.occupied_at(idx) || target.occupied_at(idx))
                              : target.occupied_at(idx);
        if (pick) cells.push_back(idx);
      }
    }
  }
  MatchedPoints out;
  const Eigen::Index n = static_cast<Eigen::Index>(cells.size());
  out.pred_pos.resize(n, 3);
  out.pred_rgb.resize(n, 3);
  out.target_pos.resize(n, 3);
  out.target_rgb.resize(n, 3);
  const auto positions = grid.positions();
  for (Eigen::Index r = 0; r < n; ++r) {
    const std::size_t idx = cells[static_cast<std::size_t>(r)];
    out.pred_pos.row(r) = positions.row(static_cast<Eigen::Index>(idx));
    out.target_pos.row(r) = positions.row(static_cast<Eigen::Index>(idx));
    out.pred_rgb.row(r) = pred.occupied_at(idx) ? Eigen::RowVector3d(pred.rgb[idx].transpose())
                                                : Eigen::RowVector3d::Zero().eval();
    out.target_rgb.row(r) = target.occupied_at(idx)
                                ? Eigen::RowVector3d(target.rgb[idx].transpose())
                                : Eigen::RowVector3d::Zero().eval();
  }
  return out;
}

LossBreakdown combine_losses(double action, std::optional<double> simg, std::optional<double> gimg,
                             std::optional<double> occ, const LossWeights& weights) {
  LossBreakdown out;
  out.action = action;
  out.simg = simg;
  out.gimg = gimg;
  out.occ = occ;
  out.total = action + weights.image * (simg.value_or(0.0) + gimg.value_or(0.0)) +
              weights.occ * occ.value_or(0.0);
  return out;
}

LossBreakdown total_loss(const PredictionBundle& bundle, const LossWeights& weights) {
  const ActionLossResult a = action_loss(bundle.pred_pose, bundle.pred_gripper,
                                         bundle.target_pose, bundle.target_gripper,
                                         weights.gripper);
  std::optional<double> simg, gimg, occ;
  if (bundle.pred_simg && bundle.target_simg) {
    simg = image_loss(*bundle.pred_simg, *bundle.target_simg).value;
  }
  if (bundle.pred_gimg && bundle.target_gimg) {
    gimg = image_loss(*bundle.pred_gimg, *bundle.target_gimg).value;
  }
  if (bundle.occ) {
    occ = occupancy_loss(bundle.occ->pred_pos, bundle.occ->pred_rgb, bundle.occ->target_pos,
                         bundle.occ->target_rgb, weights.rgb)
              .value;
  }
  return combine_losses(a.value, simg, gimg, occ, weights);
}

}  // namespace robodata
