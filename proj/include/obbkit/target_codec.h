#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "obbkit/geometry.h"
#include "obbkit/weapon_class.h"

namespace obb {

// Region-proposal labeling threshold: IoU >= 0.7 is a positive proposal.
inline constexpr double kProposalPositiveIou = 0.7;
inline constexpr std::size_t kDefaultTopProposals = 300;

// Center shifts (tx, ty) in anchor widths/heights and log-scale factors
// (tw, th).
struct BoxOffsets {
  double tx = 0.0;
  double ty = 0.0;
  double tw = 0.0;
  double th = 0.0;

  friend bool operator==(const BoxOffsets&, const BoxOffsets&) = default;
};

struct LabeledProposal {
  HorizontalBox box;
  WeaponClass label = WeaponClass::kBackground;
  // Set for Gun/Pistol labels only.
  std::optional<std::size_t> matched_gt_index;
  // Best IoU against any ground truth, even for background proposals.
  double overlap = 0.0;
};

struct GroundTruthBox {
  WeaponClass label;
  HorizontalBox box;
};

// Labels a proposal with the class of its best-overlapping ground truth when
// that IoU is at least 0.7; everything else is Background (there is no ignore
// band). Equal IoUs resolve to the lower ground-truth index.
// Throws std::invalid_argument if a ground truth is labeled Background.
LabeledProposal rpn_label(const HorizontalBox& proposal,
                          std::span<const GroundTruthBox> gts);

// Keeps proposals whose overlap is strictly greater than 0.7, sorted by
// overlap descending (stable), truncated to k. Throws std::invalid_argument
// when k == 0.
std::vector<LabeledProposal> select_top_proposals(
    std::span<const LabeledProposal> labeled,
    std::size_t k = kDefaultTopProposals);

BoxOffsets encode_box_offsets(const HorizontalBox& anchor,
                              const HorizontalBox& gt);

// Inverse of encode_box_offsets. Throws std::invalid_argument for non-finite
// offsets or when the decoded box has no positive extent.
HorizontalBox decode_box_offsets(const HorizontalBox& anchor,
                                 const BoxOffsets& t);

// 0.5 y^2 for |y| < 1, |y| - 0.5 otherwise.
double smooth_l1(double y);

// Sum of smooth_l1 over the x, y, w, h offset differences.
double box_regression_loss(const BoxOffsets& t, const BoxOffsets& v);

// Max-subtracted softmax. Throws std::invalid_argument on empty input.
std::vector<double> softmax(std::span<const double> logits);

double relu(double x);

}  // namespace obb
