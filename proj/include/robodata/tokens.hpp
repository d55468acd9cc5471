#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include <Eigen/Core>

#include "robodata/error.hpp"

// Canonical multimodal token sequence and the Modality-Isolation-Mask.
// Per timestep the layout is
//
//   [img(1)] [text(L^h)] [simg(8)] [gimg(8)] [occ(8)] [act(1)]
//
// so the total length is sum_h (1 + L^h + 24 + 1). Mask rule:
//   (a) img/text tokens attend causally to img/text tokens;
//   (b) a read-out token of modality m at step h attends to every img/text
//       token of steps <= h and, causally, to modality-m read-out tokens;
//   (c) nothing ever attends to a read-out token of another modality.
// Rule (c) is what lets whole read-out groups be deleted at inference
// without disturbing any remaining output.

namespace robodata {

enum class TokenKind : std::uint8_t { Img, Text, SImg, GImg, Occ, Act };

inline constexpr int kReadoutSpan = 8;  // tokens per simg/gimg/occ group

char token_kind_char(TokenKind k);

struct TokenInfo {
  TokenKind kind;
  int step;  // timestep h, 0-based
  int pos;   // absolute position id in the full canonical layout
};

struct TokenLayout {
  int timesteps = 0;
  std::vector<int> text_lens;
  std::vector<TokenInfo> tokens;

  int size() const { return static_cast<int>(tokens.size()); }
};

using MimMask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

TokenLayout build_layout(int timesteps, const std::vector<int>& text_lens);

MimMask build_mask(const TokenLayout& layout);

/// Enabled read-out groups per timestep; act is always enabled.
struct StepModalities {
  bool simg = true, gimg = true, occ = true;
};

struct ModalitySubset {
  std::vector<StepModalities> steps;

  static ModalitySubset uniform(int timesteps, bool simg, bool gimg, bool occ) {
    ModalitySubset s;
    s.steps.assign(static_cast<std::size_t>(timesteps), StepModalities{simg, gimg, occ});
    return s;
  }
};

/// Removes the rows/columns of disabled read-out groups. Surviving tokens
/// keep their canonical position ids.
std::pair<TokenLayout, MimMask> subset_layout(const TokenLayout& layout,
                                              const ModalitySubset& subset);

/// Single-head reference kernel: row i is softmax over the allowed keys of
/// Q_i . K_j / sqrt(dim), applied to V. Disallowed keys contribute exactly
/// zero weight.
Eigen::MatrixXd masked_attention(const Eigen::MatrixXd& Q, const Eigen::MatrixXd& K,
                                 const Eigen::MatrixXd& V, const MimMask& mask);

/// Portable text dump (layout header + 0/1 rows) for inspection and
/// cross-implementation diffing.
void write_mask_dump(std::ostream& os, const TokenLayout& layout, const MimMask& mask);

}  // namespace robodata
