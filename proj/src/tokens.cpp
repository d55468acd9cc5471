#include "robodata/tokens.hpp"

#include <cmath>
#include <limits>
#include <ostream>

namespace robodata {

char token_kind_char(TokenKind k) {
  switch (k) {
    case TokenKind::Img: return 'i';
    case TokenKind::Text: return 't';
    case TokenKind::SImg: return 's';
    case TokenKind::GImg: return 'g';
    case TokenKind::Occ: return 'o';
    case TokenKind::Act: return 'a';
  }
  return '?';
}

namespace {

bool is_context(TokenKind k) { return k == TokenKind::Img || k == TokenKind::Text; }

}  // namespace

TokenLayout build_layout(int timesteps, const std::vector<int>& text_lens) {
  if (timesteps < 1) throw InvalidDimsError("build_layout: need at least one timestep");
  if (text_lens.empty() || static_cast<int>(text_lens.size()) != timesteps) {
    throw InvalidDimsError("build_layout: text_lens must have one entry per timestep");
  }
  TokenLayout layout;
  layout.timesteps = timesteps;
  layout.text_lens = text_lens;
  int pos = 0;
  for (int h = 0; h < timesteps; ++h) {
    if (text_lens[h] < 0) throw InvalidDimsError("build_layout: negative text length");
    layout.tokens.push_back({TokenKind::Img, h, pos++});
    for (int i = 0; i < text_lens[h]; ++i) layout.tokens.push_back({TokenKind::Text, h, pos++});
    for (int i = 0; i < kReadoutSpan; ++i) layout.tokens.push_back({TokenKind::SImg, h, pos++});
    for (int i = 0; i < kReadoutSpan; ++i) layout.tokens.push_back({TokenKind::GImg, h, pos++});
    for (int i = 0; i < kReadoutSpan; ++i) layout.tokens.push_back({TokenKind::Occ, h, pos++});
    layout.tokens.push_back({TokenKind::Act, h, pos++});
  }
  return layout;
}

MimMask build_mask(const TokenLayout& layout) {
  const int n = layout.size();
  MimMask mask(n, n);
  mask.setConstant(false);
  for (int i = 0; i < n; ++i) {
    const TokenInfo& q = layout.tokens[static_cast<std::size_t>(i)];
    for (int j = 0; j < n; ++j) {
      const TokenInfo& k = layout.tokens[static_cast<std::size_t>(j)];
      bool allowed;
      if (is_context(q.kind)) {
        allowed = is_context(k.kind) && k.pos <= q.pos;
      } else {
        allowed = (is_context(k.kind) && k.step <= q.step) ||
                  (k.kind == q.kind && k.pos <= q.pos);
      }
      mask(i, j) = allowed;
    }
  }
  return mask;
}

std::pair<TokenLayout, MimMask> subset_layout(const TokenLayout& layout,
                                              const ModalitySubset& subset) {
  if (static_cast<int>(subset.steps.size()) != layout.timesteps) {
    throw ShapeMismatchError("subset_layout: subset must cover every timestep");
  }
  std::vector<int> keep;
  TokenLayout out;
  out.timesteps = layout.timesteps;
  out.text_lens = layout.text_lens;
  for (int i = 0; i < layout.size(); ++i) {
    const TokenInfo& t = layout.tokens[static_cast<std::size_t>(i)];
    const StepModalities& m = subset.steps[static_cast<std::size_t>(t.step)];
    const bool enabled = (t.kind == TokenKind::SImg && m.simg) ||
                         (t.kind == TokenKind::GImg && m.gimg) ||
                         (t.kind == TokenKind::Occ && m.occ) || is_context(t.kind) ||
                         t.kind == TokenKind::Act;
    if (enabled) {
      keep.push_back(i);
      out.tokens.push_back(t);  // canonical position id preserved
    }
  }
  const MimMask full = build_mask(layout);
  const int n = static_cast<int>(keep.size());
  MimMask mask(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      mask(i, j) = full(keep[static_cast<std::size_t>(i)], keep[static_cast<std::size_t>(j)]);
    }
  }
  return {std::move(out), std::move(mask)};
}

Eigen::MatrixXd masked_attention(const Eigen::MatrixXd& Q, const Eigen::MatrixXd& K,
                                 const Eigen::MatrixXd& V, const MimMask& mask) {
  const Eigen::Index n = Q.rows();
  if (K.rows() != n || V.rows() != n || mask.rows() != n || mask.cols() != n ||
      Q.cols() != K.cols()) {
    throw ShapeMismatchError("masked_attention: shapes do not conform");
  }
  const double scale = 1.0 / std::sqrt(static_cast<double>(Q.cols()));
  Eigen::MatrixXd out(n, V.cols());
  std::vector<Eigen::Index> allowed;
  std::vector<double> score;
  for (Eigen::Index i = 0; i < n; ++i) {
    allowed.clear();
    score.clear();
    double max_score = -std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < n; ++j) {
      if (!mask(i, j)) continue;
      const double s = Q.row(i).dot(K.row(j)) * scale;
      allowed.push_back(j);
      score.push_back(s);
      max_score = std::max(max_score, s);
    }
    if (allowed.empty()) {
      throw InvalidValueError("masked_attention: a query row has no allowed keys");
    }
    double denom = 0.0;
    Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(V.cols());
    for (std::size_t a = 0; a < allowed.size(); ++a) {
      const double w = std::exp(score[a] - max_score);
      denom += w;
      acc += w * V.row(allowed[a]);
    }
    out.row(i) = acc / denom;
  }
  return out;
}

void write_mask_dump(std::ostream& os, const TokenLayout& layout, const MimMask& mask) {
  os << "robodata-mim 1\n";
  os << "timesteps " << layout.timesteps << "\n";
  os << "text-lens";
  for (int len : layout.text_lens) os << ' ' << len;
  os << "\n";
  os << "tokens " << layout.size() << "\n";
  os << "kinds ";
  for (const TokenInfo& t : layout.tokens) os << token_kind_char(t.kind);
  os << "\n";
  os << "steps";
  for (const TokenInfo& t : layout.tokens) os << ' ' << t.step;
  os << "\n";
  os << "positions";
  for (const TokenInfo& t : layout.tokens) os << ' ' << t.pos;
  os << "\n";
  os << "mask " << mask.rows() << ' ' << mask.cols() << "\n";
  for (Eigen::Index i = 0; i < mask.rows(); ++i) {
    for (Eigen::Index j = 0; j < mask.cols(); ++j) os << (mask(i, j) ? '1' : '0');
    os << "\n";
  }
}

}  // namespace robodata
