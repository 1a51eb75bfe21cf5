#include "obbkit/target_codec.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace obb {

LabeledProposal rpn_label(const HorizontalBox& proposal,
                          std::span<const GroundTruthBox> gts) {
  LabeledProposal out{proposal, WeaponClass::kBackground, std::nullopt, 0.0};
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < gts.size(); ++i) {
    if (gts[i].label == WeaponClass::kBackground) {
      throw std::invalid_argument("rpn_label: ground truth labeled Background");
    }
    const double iou = horizontal_iou(proposal, gts[i].box);
    if (!best || iou > out.overlap) {
      best = i;
      out.overlap = iou;
    }
  }
  if (best && out.overlap >= kProposalPositiveIou) {
    out.label = gts[*best].label;
    out.matched_gt_index = best;
  }
  return out;
}

std::vector<LabeledProposal> select_top_proposals(
    std::span<const LabeledProposal> labeled, std::size_t k) {
  if (k == 0) throw std::invalid_argument("select_top_proposals: k must be > 0");
  std::vector<LabeledProposal> kept;
  for (const auto& p : labeled) {
    if (p.overlap > kProposalPositiveIou) kept.push_back(p);
  }
  std::stable_sort(kept.begin(), kept.end(),
                   [](const LabeledProposal& a, const LabeledProposal& b) {
                     return a.overlap > b.overlap;
                   });
  if (kept.size() > k) kept.erase(kept.begin() + static_cast<std::ptrdiff_t>(k), kept.end());
  return kept;
}

BoxOffsets encode_box_offsets(const HorizontalBox& anchor,
                              const HorizontalBox& gt) {
  const Point2D a = anchor.center();
  const Point2D g = gt.center();
  return {(g.x - a.x) / anchor.width(), (g.y - a.y) / anchor.height(),
          std::log(gt.width() / anchor.width()),
          std::log(gt.height() / anchor.height())};
}

HorizontalBox decode_box_offsets(const HorizontalBox& anchor,
                                 const BoxOffsets& t) {
  if (!std::isfinite(t.tx) || !std::isfinite(t.ty) || !std::isfinite(t.tw) ||
      !std::isfinite(t.th)) {
    throw std::invalid_argument("decode_box_offsets: non-finite offsets");
  }
  const Point2D a = anchor.center();
  const double cx = a.x + t.tx * anchor.width();
  const double cy = a.y + t.ty * anchor.height();
  const double w = anchor.width() * std::exp(t.tw);
  const double h = anchor.height() * std::exp(t.th);
  if (!(w > 0.0) || !(h > 0.0) || !std::isfinite(w) || !std::isfinite(h)) {
    throw std::invalid_argument("decode_box_offsets: decoded box is degenerate");
  }
  return HorizontalBox::from_center(cx, cy, w, h);
}

double smooth_l1(double y) {
  const double ay = std::abs(y);
  return ay < 1.0 ? 0.5 * y * y : ay - 0.5;
}

double box_regression_loss(const BoxOffsets& t, const BoxOffsets& v) {
  return smooth_l1(t.tx - v.tx) + smooth_l1(t.ty - v.ty) +
         smooth_l1(t.tw - v.tw) + smooth_l1(t.th - v.th);
}

std::vector<double> softmax(std::span<const double> logits) {
  if (logits.empty()) throw std::invalid_argument("softmax: empty input");
  const double max = *std::max_element(logits.begin(), logits.end());
  std::vector<double> out(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - max);
    sum += out[i];
  }
  for (double& v : out) v /= sum;
  return out;
}

double relu(double x) { return x > 0.0 ? x : 0.0; }

}  // namespace obb
