#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "robodata/loss.hpp"

using namespace robodata;

namespace {

std::mt19937 gen(61);

Eigen::MatrixXd random_matrix(int rows, int cols, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = u(gen);
  return m;
}

// Relative agreement between an analytic derivative and a central
// difference.
void check_grad(double analytic, double numeric, double rel_tol = 1e-5) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
  CHECK(std::abs(analytic - numeric) / scale < rel_tol);
}

}  // namespace

TEST_CASE("bce fixtures") {
  CHECK(std::abs(bce(0.5, 1.0) - std::log(2.0)) < 1e-12);
  CHECK(bce(1.0 - kProbClamp, 1.0) == doctest::Approx(kProbClamp).epsilon(1e-3));
  CHECK(bce(0.5, 0.0) == doctest::Approx(std::log(2.0)));
  CHECK_THROWS_AS(bce(0.5, 0.3), InvalidValueError);
}

TEST_CASE("action_loss fixtures") {
  // Perfect pose, p = 1 - eps against y = 1: loss ~ lambda_g * eps ~ 0.
  Eigen::MatrixXd pose = Eigen::MatrixXd::Zero(1, 6);
  Eigen::VectorXd p(1), y(1);
  p << 1.0 - kProbClamp;
  y << 1.0;
  const auto perfect = action_loss(pose, p, pose, y, 0.01);
  CHECK(perfect.value < 1e-8);
  CHECK_FALSE(perfect.clamped);

  // Pose error [0.1,0,0,0,0,0] with a perfect gripper: 0.01 / 6.
  Eigen::MatrixXd pred = pose;
  pred(0, 0) = 0.1;
  const auto mse = action_loss(pred, p, pose, y, 0.01);
  CHECK(mse.value == doctest::Approx(0.01 / 6.0).epsilon(1e-6));

  // p = 0.5, y = 1: BCE = ln 2, contribution 0.01 * ln 2 ~ 0.00693.
  Eigen::VectorXd half(1);
  half << 0.5;
  const auto b = action_loss(pose, half, pose, y, 0.01);
  CHECK(b.value == doctest::Approx(0.01 * std::log(2.0)).epsilon(1e-12));

  // Out-of-range probability is clamped and flagged.
  Eigen::VectorXd over(1);
  over << 1.5;
  const auto clamped = action_loss(pose, over, pose, y, 0.01);
  CHECK(clamped.clamped);
  CHECK(std::isfinite(clamped.value));

  Eigen::VectorXd bad_y(1);
  bad_y << 0.5;
  CHECK_THROWS_AS(action_loss(pose, p, pose, bad_y, 0.01), InvalidValueError);
  CHECK_THROWS_AS(action_loss(pose, p, Eigen::MatrixXd::Zero(2, 6),
                              Eigen::VectorXd::Zero(2), 0.01),
                  ShapeMismatchError);
}

TEST_CASE("image_loss fixtures") {
  std::vector<Eigen::ArrayXXd> a{Eigen::ArrayXXd::Zero(2, 2)};
  std::vector<Eigen::ArrayXXd> b{Eigen::ArrayXXd::Constant(2, 2, 0.5)};
  CHECK(image_loss(a, a).value == 0.0);
  CHECK(image_loss(b, a).value == doctest::Approx(1.0));  // 4 pixels * 0.25

  std::vector<Eigen::ArrayXXd> nan_img{Eigen::ArrayXXd::Constant(2, 2, std::nan(""))};
  CHECK_THROWS_AS(image_loss(nan_img, a), InvalidValueError);

  std::vector<Eigen::ArrayXXd> other{Eigen::ArrayXXd::Zero(3, 2)};
  CHECK_THROWS_AS(image_loss(a, other), ShapeMismatchError);
}

TEST_CASE("occupancy_loss fixtures") {
  std::vector<PointMatrix> zero_pos{PointMatrix::Zero(1, 3)};
  std::vector<PointMatrix> zero_rgb{PointMatrix::Zero(1, 3)};
  CHECK(occupancy_loss(zero_pos, zero_rgb, zero_pos, zero_rgb, 0.5).value == 0.0);

  // One voxel: dpos = (0.1,0,0), drgb = (0.2,0,0) -> 0.01 + 0.5 * 0.04 = 0.03.
  std::vector<PointMatrix> pos{PointMatrix::Zero(1, 3)};
  pos[0](0, 0) = 0.1;
  std::vector<PointMatrix> rgb{PointMatrix::Zero(1, 3)};
  rgb[0](0, 0) = 0.2;
  CHECK(occupancy_loss(pos, rgb, zero_pos, zero_rgb, 0.5).value == doctest::Approx(0.03));
  CHECK(occupancy_loss(pos, rgb, zero_pos, zero_rgb, 0.0).value == doctest::Approx(0.01));

  std::vector<PointMatrix> two{PointMatrix::Zero(2, 3)};
  CHECK_THROWS_AS(occupancy_loss(pos, rgb, two, zero_rgb, 0.5), ShapeMismatchError);
}

TEST_CASE("total_loss combination") {
  const LossWeights w;
  const LossBreakdown fixture = combine_losses(1.0, 2.0, 3.0, 4.0, w);
  CHECK(fixture.total == 1.9);  // 1 + 0.1*(2+3) + 0.1*4, exact in double

  CHECK(combine_losses(0.7, std::nullopt, std::nullopt, std::nullopt, w).total == 0.7);
  CHECK(combine_losses(0.0, 0.0, 0.0, 0.0, w).total == 0.0);

  // Excluding a modality equals running with its lambda at zero.
  LossWeights zero_occ = w;
  zero_occ.occ = 0.0;
  CHECK(combine_losses(1.0, 2.0, 3.0, std::nullopt, w).total ==
        combine_losses(1.0, 2.0, 3.0, 4.0, zero_occ).total);

  // Linearity in each component at fixed others.
  const double base = combine_losses(1.0, 2.0, 3.0, 4.0, w).total;
  const double bumped = combine_losses(1.0, 2.0, 3.0, 5.0, w).total;
  CHECK(bumped - base == doctest::Approx(w.occ));
}

TEST_CASE("total_loss over a bundle") {
  PredictionBundle bundle;
  bundle.pred_pose = Eigen::MatrixXd::Zero(2, 6);
  bundle.target_pose = Eigen::MatrixXd::Zero(2, 6);
  bundle.pred_gripper = Eigen::VectorXd::Constant(2, 1.0 - kProbClamp);
  bundle.target_gripper = Eigen::VectorXd::Ones(2);
  const LossBreakdown only_action = total_loss(bundle, LossWeights{});
  CHECK_FALSE(only_action.simg.has_value());
  CHECK(only_action.total == only_action.action);

  bundle.pred_simg = std::vector<Eigen::ArrayXXd>{Eigen::ArrayXXd::Constant(2, 2, 0.5),
                                                  Eigen::ArrayXXd::Zero(2, 2)};
  bundle.target_simg = std::vector<Eigen::ArrayXXd>{Eigen::ArrayXXd::Zero(2, 2),
                                                    Eigen::ArrayXXd::Zero(2, 2)};
  const LossBreakdown with_img = total_loss(bundle, LossWeights{});
  REQUIRE(with_img.simg.has_value());
  CHECK(*with_img.simg == doctest::Approx(1.0));
  CHECK(with_img.total == doctest::Approx(with_img.action + 0.1 * 1.0));
}

TEST_CASE("match_grids pairs cells by grid index") {
  const GridQuery g = make_grid(2, 2, 2);
  ColoredCloud pred_cloud, target_cloud;
  pred_cloud.points.push_back(g.center(0, 0, 0));
  pred_cloud.colors.push_back({1.0, 0.0, 0.0});
  pred_cloud.points.push_back(g.center(1, 1, 1));
  pred_cloud.colors.push_back({0.0, 1.0, 0.0});
  target_cloud.points.push_back(g.center(0, 0, 0));
  target_cloud.colors.push_back({1.0, 0.0, 0.0});

  const OccupancyGrid pred = voxelize(pred_cloud, g);
  const OccupancyGrid target = voxelize(target_cloud, g);

  const MatchedPoints uni = match_grids(pred, target, g, OccMatchMode::UnionOfOccupied);
  CHECK(uni.pred_pos.rows() == 2);
  // Shared cell contributes zero; the pred-only cell contributes rgb error
  // against zero.
  const double loss = occupancy_loss({uni.pred_pos}, {uni.pred_rgb}, {uni.target_pos},
                                     {uni.target_rgb}, 0.5)
                          .value;
  CHECK(loss == doctest::Approx(0.5 * 1.0));

  const MatchedPoints tgt = match_grids(pred, target, g, OccMatchMode::TargetOnly);
  CHECK(tgt.pred_pos.rows() == 1);

  const GridQuery other = make_grid(3, 2, 2);
  CHECK_THROWS_AS(match_grids(pred, target, other, OccMatchMode::UnionOfOccupied),
                  ShapeMismatchError);
}

TEST_CASE("analytic gradients match central finite differences") {
  const double h = 1e-6;

  SUBCASE("action") {
    Eigen::MatrixXd pred = random_matrix(3, 6);
    Eigen::MatrixXd target = random_matrix(3, 6);
    Eigen::VectorXd pg(3), tg(3);
    std::uniform_real_distribution<double> prob(0.1, 0.9);
    std::bernoulli_distribution label;
    for (int i = 0; i < 3; ++i) {
      pg[i] = prob(gen);
      tg[i] = label(gen) ? 1.0 : 0.0;
    }
    const auto base = action_loss(pred, pg, target, tg, 0.01);
    for (int t = 0; t < 3; ++t) {
      for (int c = 0; c < 6; ++c) {
        Eigen::MatrixXd up = pred, down = pred;
        up(t, c) += h;
        down(t, c) -= h;
        const double numeric = (action_loss(up, pg, target, tg, 0.01).value -
                                action_loss(down, pg, target, tg, 0.01).value) /
                               (2 * h);
        check_grad(base.grad_pose(t, c), numeric);
      }
      Eigen::VectorXd up = pg, down = pg;
      up[t] += h;
      down[t] -= h;
      const double numeric = (action_loss(pred, up, target, tg, 0.01).value -
                              action_loss(pred, down, target, tg, 0.01).value) /
                             (2 * h);
      check_grad(base.grad_gripper[t], numeric);
    }
  }

  SUBCASE("image") {
    std::vector<Eigen::ArrayXXd> pred{random_matrix(3, 4).array()};
    std::vector<Eigen::ArrayXXd> target{random_matrix(3, 4).array()};
    const auto base = image_loss(pred, target);
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 4; ++c) {
        auto up = pred, down = pred;
        up[0](r, c) += h;
        down[0](r, c) -= h;
        const double numeric = (image_loss(up, target).value - image_loss(down, target).value) /
                               (2 * h);
        check_grad(base.grad[0](r, c), numeric);
      }
    }
  }

  SUBCASE("occupancy") {
    std::vector<PointMatrix> ppos{random_matrix(4, 3)};
    std::vector<PointMatrix> prgb{random_matrix(4, 3, 0.0, 1.0)};
    std::vector<PointMatrix> tpos{random_matrix(4, 3)};
    std::vector<PointMatrix> trgb{random_matrix(4, 3, 0.0, 1.0)};
    const auto base = occupancy_loss(ppos, prgb, tpos, trgb, 0.5);
    for (int r = 0; r < 4; ++r) {
      for (int c = 0; c < 3; ++c) {
        auto up = ppos, down = ppos;
        up[0](r, c) += h;
        down[0](r, c) -= h;
        double numeric = (occupancy_loss(up, prgb, tpos, trgb, 0.5).value -
                          occupancy_loss(down, prgb, tpos, trgb, 0.5).value) /
                         (2 * h);
        check_grad(base.grad_pos[0](r, c), numeric);

        auto rup = prgb, rdown = prgb;
        rup[0](r, c) += h;
        rdown[0](r, c) -= h;
        numeric = (occupancy_loss(ppos, rup, tpos, trgb, 0.5).value -
                   occupancy_loss(ppos, rdown, tpos, trgb, 0.5).value) /
                  (2 * h);
        check_grad(base.grad_rgb[0](r, c), numeric);
      }
    }
  }
}

TEST_CASE("losses are nonnegative and zero only at the target") {
  for (int trial = 0; trial < 200; ++trial) {
    Eigen::MatrixXd pred = random_matrix(2, 6);
    Eigen::MatrixXd target = random_matrix(2, 6);
    Eigen::VectorXd pg(2), tg(2);
    std::uniform_real_distribution<double> prob(0.05, 0.95);
    for (int i = 0; i < 2; ++i) {
      pg[i] = prob(gen);
      tg[i] = 1.0;
    }
    const double v = action_loss(pred, pg, target, tg, 0.01).value;
    CHECK(v >= 0.0);
    if ((pred - target).cwiseAbs().maxCoeff() > 1e-6) CHECK(v > 0.0);
  }
}
