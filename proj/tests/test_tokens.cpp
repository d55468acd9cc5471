#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>
#include <random>
#include <sstream>

#include "robodata/tokens.hpp"

#include "support/oracles.hpp"

using namespace robodata;

namespace {

Eigen::MatrixXd random_matrix(std::mt19937& gen, int rows, int cols) {
  std::normal_distribution<double> g(0.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = g(gen);
  return m;
}

std::vector<int> positions_of(const TokenLayout& layout, TokenKind kind) {
  std::vector<int> out;
  for (const auto& t : layout.tokens) {
    if (t.kind == kind) out.push_back(t.pos);
  }
  return out;
}

}  // namespace

TEST_CASE("layout lengths follow sum(1 + L_h + 24 + 1)") {
  CHECK(build_layout(1, {3}).size() == 29);
  CHECK(build_layout(2, {3, 5}).size() == 60);
  CHECK(build_layout(1, {0}).size() == 26);  // text may be empty on later frames

  CHECK_THROWS_AS(build_layout(1, {}), InvalidDimsError);
  CHECK_THROWS_AS(build_layout(2, {3}), InvalidDimsError);
  CHECK_THROWS_AS(build_layout(0, {}), InvalidDimsError);

  // Spans are disjoint, ordered, and position ids are the token indices.
  const TokenLayout l = build_layout(2, {3, 5});
  for (int i = 0; i < l.size(); ++i) CHECK(l.tokens[i].pos == i);
  const char* expect =
      "itttssssssssggggggggooooooooa"
      "itttttssssssssggggggggooooooooa";
  for (int i = 0; i < l.size(); ++i) CHECK(token_kind_char(l.tokens[i].kind) == expect[i]);
}

TEST_CASE("mask fixture: H=1, L=3") {
  const TokenLayout layout = build_layout(1, {3});
  const MimMask mask = build_mask(layout);
  REQUIRE(mask.rows() == 29);

  // The act token (row 28) may read text/img {0..3} and itself only.
  for (int j = 0; j < 29; ++j) {
    const bool want = j <= 3 || j == 28;
    CHECK(mask(28, j) == want);
  }
  CHECK_FALSE(mask(28, 20));  // occ column stays dark

  // Text rows never look into any read-out span.
  for (int i = 0; i <= 3; ++i) {
    for (int j = 4; j < 28; ++j) CHECK_FALSE(mask(i, j));
    CHECK_FALSE(mask(i, 28));
  }

  // Causality among context tokens.
  CHECK(mask(2, 1));
  CHECK_FALSE(mask(1, 2));

  // Diagonal is always true.
  for (int i = 0; i < 29; ++i) CHECK(mask(i, i));
}

TEST_CASE("single-token text sequence") {
  // Degenerate single-step layout with no text still has a valid mask.
  const TokenLayout layout = build_layout(1, {0});
  const MimMask mask = build_mask(layout);
  CHECK(mask.rows() == 26);
  CHECK(mask(0, 0));
}

TEST_CASE("read-out groups are causal within-group and isolated across groups") {
  const TokenLayout layout = build_layout(2, {3, 5});
  const MimMask mask = build_mask(layout);

  const auto simg = positions_of(layout, TokenKind::SImg);  // 8 at step 0, 8 at step 1
  const auto gimg = positions_of(layout, TokenKind::GImg);
  REQUIRE(simg.size() == 16);

  // simg at step 2 attends simg at step 1, never gimg at step 1.
  CHECK(mask(simg[8], simg[0]));
  CHECK_FALSE(mask(simg[8], gimg[0]));
  // ...and not future same-group tokens.
  CHECK_FALSE(mask(simg[0], simg[8]));
  // Within one step the group is position-causal.
  CHECK(mask(simg[1], simg[0]));
  CHECK_FALSE(mask(simg[0], simg[1]));

  // Read-outs see all context of steps <= h.
  const auto act = positions_of(layout, TokenKind::Act);
  CHECK(mask(act[1], 0));             // step-0 img
  CHECK(mask(act[1], act[0]));        // previous act
  CHECK_FALSE(mask(act[0], act[1]));  // causal
}

TEST_CASE("subset_layout") {
  const TokenLayout layout = build_layout(1, {3});

  // All enabled: identity.
  const auto [same, same_mask] = subset_layout(layout, ModalitySubset::uniform(1, true, true, true));
  CHECK(same.size() == layout.size());
  CHECK((same_mask == build_mask(layout)).all());

  // Disable occ: 29 - 8 = 21 tokens; act keeps its allowed set (minus
  // deleted columns) and its canonical position id 28.
  const auto [no_occ, no_occ_mask] =
      subset_layout(layout, ModalitySubset::uniform(1, true, true, false));
  CHECK(no_occ.size() == 21);
  CHECK(no_occ.tokens.back().pos == 28);
  for (int j = 0; j < no_occ.size(); ++j) {
    const bool want = no_occ.tokens[j].pos <= 3 || no_occ.tokens[j].pos == 28;
    CHECK(no_occ_mask(no_occ.size() - 1, j) == want);
  }

  // Disable everything optional: 5 tokens per step survive (img + 3 text + act).
  const auto [lean, lean_mask] =
      subset_layout(layout, ModalitySubset::uniform(1, false, false, false));
  CHECK(lean.size() == 5);
  CHECK(lean_mask.rows() == 5);

  CHECK_THROWS_AS(subset_layout(layout, ModalitySubset::uniform(2, true, true, true)),
                  ShapeMismatchError);
}

TEST_CASE("masked_attention basics") {
  std::mt19937 gen(51);

  // Single token: output equals its value row.
  Eigen::MatrixXd q1 = random_matrix(gen, 1, 4), k1 = random_matrix(gen, 1, 4),
                  v1 = random_matrix(gen, 1, 3);
  MimMask m1(1, 1);
  m1.setConstant(true);
  CHECK((masked_attention(q1, k1, v1, m1) - v1).cwiseAbs().maxCoeff() == 0.0);

  // Two allowed keys with equal scores average their value rows.
  Eigen::MatrixXd q2 = Eigen::MatrixXd::Zero(2, 4);
  Eigen::MatrixXd k2 = random_matrix(gen, 2, 4);
  Eigen::MatrixXd v2 = random_matrix(gen, 2, 3);
  MimMask m2(2, 2);
  m2.setConstant(true);
  const Eigen::MatrixXd out = masked_attention(q2, k2, v2, m2);
  CHECK((out.row(0) - 0.5 * (v2.row(0) + v2.row(1))).cwiseAbs().maxCoeff() < 1e-15);

  // A masked key is ignored exactly: compare against the 1-key result.
  MimMask m3(2, 2);
  m3.setConstant(false);
  m3(0, 0) = true;
  m3(1, 1) = true;
  const Eigen::MatrixXd gated = masked_attention(q2, k2, v2, m3);
  CHECK((gated.row(0) - v2.row(0)).cwiseAbs().maxCoeff() == 0.0);

  Eigen::MatrixXd bad = random_matrix(gen, 3, 4);
  CHECK_THROWS_AS(masked_attention(q2, bad, v2, m2), ShapeMismatchError);
}

TEST_CASE("masked_attention equals the dense -1e30 oracle") {
  std::mt19937 gen(52);
  const TokenLayout layout = build_layout(2, {3, 5});
  const MimMask mask = build_mask(layout);
  for (int trial = 0; trial < 20; ++trial) {
    const int dim = 8;
    const Eigen::MatrixXd Q = random_matrix(gen, layout.size(), dim);
    const Eigen::MatrixXd K = random_matrix(gen, layout.size(), dim);
    const Eigen::MatrixXd V = random_matrix(gen, layout.size(), dim);
    const Eigen::MatrixXd got = masked_attention(Q, K, V, mask);
    const Eigen::MatrixXd want = oracles::dense_masked_attention(Q, K, V, mask);
    CHECK((got - want).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("isolation: removing disabled groups is bit-exact for the rest") {
  std::mt19937 gen(53);
  const TokenLayout layout = build_layout(2, {3, 5});
  const MimMask full_mask = build_mask(layout);
  const int dim = 16;

  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::MatrixXd Q = random_matrix(gen, layout.size(), dim);
    const Eigen::MatrixXd K = random_matrix(gen, layout.size(), dim);
    const Eigen::MatrixXd V = random_matrix(gen, layout.size(), dim);
    const Eigen::MatrixXd full_out = masked_attention(Q, K, V, full_mask);

    for (int combo = 0; combo < 8; ++combo) {
      const bool simg = combo & 1, gimg = combo & 2, occ = combo & 4;
      const auto [sub, sub_mask] =
          subset_layout(layout, ModalitySubset::uniform(2, simg, gimg, occ));
      Eigen::MatrixXd q(sub.size(), dim), k(sub.size(), dim), v(sub.size(), dim);
      for (int i = 0; i < sub.size(); ++i) {
        q.row(i) = Q.row(sub.tokens[i].pos);
        k.row(i) = K.row(sub.tokens[i].pos);
        v.row(i) = V.row(sub.tokens[i].pos);
      }
      const Eigen::MatrixXd sub_out = masked_attention(q, k, v, sub_mask);
      for (int i = 0; i < sub.size(); ++i) {
        const Eigen::RowVectorXd a = sub_out.row(i);
        const Eigen::RowVectorXd b = full_out.row(sub.tokens[i].pos);
        CHECK(std::memcmp(a.data(), b.data(), sizeof(double) * dim) == 0);
      }
    }
  }
}

TEST_CASE("mask dump format") {
  const TokenLayout layout = build_layout(1, {1});
  std::ostringstream os;
  write_mask_dump(os, layout, build_mask(layout));
  const std::string dump = os.str();
  CHECK(dump.rfind("robodata-mim 1\ntimesteps 1\ntext-lens 1\ntokens 27\n", 0) == 0);
  CHECK(dump.find("kinds itssssssssggggggggooooooooa\n") != std::string::npos);
  CHECK(dump.find("mask 27 27\n") != std::string::npos);
  // First row: the img token sees only itself.
  const auto pos = dump.find("mask 27 27\n");
  const std::string first_row = dump.substr(pos + 11, 27);
  CHECK(first_row == "100000000000000000000000000");
}
