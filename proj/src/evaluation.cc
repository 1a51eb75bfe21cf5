#include "obbkit/evaluation.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <utility>

#include <nlohmann/json.hpp>

#include "internal/text.h"
#include "obbkit/errors.h"

namespace obb {
namespace {

void check_threshold(double t, const char* what) {
  if (!(t > 0.0 && t <= 1.0)) {
    throw std::invalid_argument(std::string(what) + " must be in (0, 1]");
  }
}

// Stable order by score descending.
std::vector<std::size_t> score_order(std::span<const Detection> dets,
                                     std::span<const std::size_t> subset) {
  std::vector<std::size_t> order(subset.begin(), subset.end());
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return dets[a].score() > dets[b].score();
  });
  return order;
}

// IoU of every detection in `order` against every ground truth; -1 marks a
// class mismatch. Row r belongs to order[r].
std::vector<std::vector<double>> iou_table(std::span<const Detection> dets,
                                           std::span<const std::size_t> order,
                                           const Annotation& gts, IouMode mode) {
  const auto& objects = gts.objects();
  std::vector<std::vector<double>> table(order.size(),
                                         std::vector<double>(objects.size(), -1.0));
  for (std::size_t r = 0; r < order.size(); ++r) {
    const Detection& d = dets[order[r]];
    for (std::size_t g = 0; g < objects.size(); ++g) {
      if (objects[g].label == d.label()) {
        table[r][g] = box_iou(d.box(), objects[g].box, mode);
      }
    }
  }
  return table;
}

struct GreedyOutcome {
  std::vector<MatchFlag> flags;                  // by row
  std::vector<std::optional<std::size_t>> gt;    // by row
  std::vector<bool> gt_matched;
};

GreedyOutcome greedy_match(const std::vector<std::vector<double>>& table,
                           std::size_t num_gt, double threshold) {
  GreedyOutcome out;
  out.flags.assign(table.size(), MatchFlag::kFalsePositive);
  out.gt.assign(table.size(), std::nullopt);
  out.gt_matched.assign(num_gt, false);
  for (std::size_t r = 0; r < table.size(); ++r) {
    std::optional<std::size_t> best;
    double best_iou = -1.0;
    for (std::size_t g = 0; g < num_gt; ++g) {
      if (out.gt_matched[g] || table[r][g] < 0.0) continue;
      if (!best || table[r][g] > best_iou) {
        best = g;
        best_iou = table[r][g];
      }
    }
    if (best && best_iou >= threshold) {
      out.flags[r] = MatchFlag::kTruePositive;
      out.gt[r] = best;
      out.gt_matched[*best] = true;
    }
  }
  return out;
}

std::string threshold_label(double t) {
  return "map@" + internal::format_shortest(t);
}

}  // namespace

Detection::Detection(std::string image_name, WeaponClass label, double score,
                     OrientedBox box)
    : image_name_(std::move(image_name)), label_(label), score_(score), box_(box) {
  if (image_name_.empty()) throw std::invalid_argument("detection without image name");
  if (label_ == WeaponClass::kBackground) {
    throw std::invalid_argument("detection class cannot be Background");
  }
  if (!(score_ >= 0.0 && score_ <= 1.0)) {
    throw std::invalid_argument("detection score must be in [0, 1]");
  }
}

std::string_view to_string(IouMode mode) {
  return mode == IouMode::kRotated ? "rotated" : "horizontal";
}

std::optional<IouMode> parse_iou_mode(std::string_view name) {
  if (name == "rotated") return IouMode::kRotated;
  if (name == "horizontal") return IouMode::kHorizontal;
  return std::nullopt;
}

double box_iou(const OrientedBox& a, const OrientedBox& b, IouMode mode) {
  return mode == IouMode::kRotated ? rotated_iou(a, b)
                                   : horizontal_iou(envelope(a), envelope(b));
}

std::vector<MatchFlag> MatchResult::flags_in_order() const {
  std::vector<MatchFlag> out;
  out.reserve(order.size());
  for (std::size_t i : order) out.push_back(flags[i]);
  return out;
}

MatchResult match_detections(std::span<const Detection> dets,
                             const Annotation& gts, double iou_threshold,
                             IouMode mode) {
  check_threshold(iou_threshold, "IoU threshold");
  for (const auto& d : dets) {
    if (d.image_name() != gts.image_name()) {
      throw InputError("detection for image '" + d.image_name() +
                       "' matched against '" + gts.image_name() + "'");
    }
  }
  std::vector<std::size_t> all(dets.size());
  std::iota(all.begin(), all.end(), std::size_t{0});

  MatchResult result;
  result.order = score_order(dets, all);
  const auto table = iou_table(dets, result.order, gts, mode);
  GreedyOutcome g = greedy_match(table, gts.objects().size(), iou_threshold);

  result.flags.assign(dets.size(), MatchFlag::kFalsePositive);
  result.matched_gt.assign(dets.size(), std::nullopt);
  for (std::size_t r = 0; r < result.order.size(); ++r) {
    result.flags[result.order[r]] = g.flags[r];
    result.matched_gt[result.order[r]] = g.gt[r];
  }
  result.gt_matched = std::move(g.gt_matched);
  result.false_negatives = static_cast<std::size_t>(
      std::count(result.gt_matched.begin(), result.gt_matched.end(), false));
  return result;
}

std::vector<PrPoint> precision_recall(std::span<const MatchFlag> flags_in_order,
                                      std::size_t num_gt) {
  std::vector<PrPoint> curve;
  curve.reserve(flags_in_order.size());
  std::size_t tp = 0;
  for (std::size_t i = 0; i < flags_in_order.size(); ++i) {
    if (flags_in_order[i] == MatchFlag::kTruePositive) ++tp;
    const double recall =
        num_gt == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(num_gt);
    const double precision = static_cast<double>(tp) / static_cast<double>(i + 1);
    curve.push_back({recall, precision});
  }
  return curve;
}

double average_precision(std::span<const PrPoint> curve) {
  if (curve.empty()) return 0.0;
  std::vector<double> envelope(curve.size());
  double running = 0.0;
  for (std::size_t i = curve.size(); i-- > 0;) {
    running = std::max(running, curve[i].precision);
    envelope[i] = running;
  }
  double ap = 0.0;
  double prev_recall = 0.0;
  for (std::size_t i = 0; i < curve.size(); ++i) {
    if (curve[i].recall > prev_recall) {
      ap += (curve[i].recall - prev_recall) * envelope[i];
      prev_recall = curve[i].recall;
    }
  }
  return std::clamp(ap, 0.0, 1.0);
}

std::vector<EvalReport> evaluate(std::span<const Detection> dets,
                                 const AnnotationSet& gts,
                                 std::span<const double> thresholds,
                                 const EvalOptions& options) {
  if (thresholds.empty()) throw std::invalid_argument("no IoU thresholds given");
  for (double t : thresholds) check_threshold(t, "IoU threshold");

  const auto& images = gts.annotations();
  std::unordered_map<std::string_view, std::size_t> image_index;
  for (std::size_t i = 0; i < images.size(); ++i) {
    image_index.emplace(images[i].image_name(), i);
  }
  std::vector<std::vector<std::size_t>> per_image(images.size());
  for (std::size_t d = 0; d < dets.size(); ++d) {
    const auto it = image_index.find(dets[d].image_name());
    if (it == image_index.end()) {
      throw InputError("detection " + std::to_string(d) + " references unknown image '" +
                       dets[d].image_name() + "'");
    }
    per_image[it->second].push_back(d);
  }

  // flags[t][d] for threshold t and global detection index d.
  std::vector<std::vector<MatchFlag>> flags(
      thresholds.size(), std::vector<MatchFlag>(dets.size(), MatchFlag::kFalsePositive));
  internal::parallel_for(images.size(), options.threads, [&](std::size_t i) {
    const auto order = score_order(dets, per_image[i]);
    const auto table = iou_table(dets, order, images[i], options.mode);
    for (std::size_t t = 0; t < thresholds.size(); ++t) {
      const GreedyOutcome g =
          greedy_match(table, images[i].objects().size(), thresholds[t]);
      for (std::size_t r = 0; r < order.size(); ++r) flags[t][order[r]] = g.flags[r];
    }
  });

  std::map<WeaponClass, std::size_t> num_gt;
  for (const auto& a : images) {
    for (const auto& obj : a.objects()) ++num_gt[obj.label];
  }
  std::map<WeaponClass, std::vector<std::size_t>> class_order;
  for (WeaponClass c : kObjectClasses) {
    std::vector<std::size_t> members;
    for (std::size_t d = 0; d < dets.size(); ++d) {
      if (dets[d].label() == c) members.push_back(d);
    }
    class_order[c] = score_order(dets, members);
  }

  std::vector<EvalReport> reports;
  for (std::size_t t = 0; t < thresholds.size(); ++t) {
    EvalReport report;
    report.iou_threshold = thresholds[t];
    report.mode = options.mode;
    double ap_sum = 0.0;
    std::size_t ap_count = 0;
    for (WeaponClass c : kObjectClasses) {
      std::vector<MatchFlag> ordered;
      ordered.reserve(class_order[c].size());
      for (std::size_t d : class_order[c]) ordered.push_back(flags[t][d]);

      ClassCounts counts;
      counts.ground_truths = num_gt[c];
      counts.detections = ordered.size();
      counts.true_positives = static_cast<std::size_t>(
          std::count(ordered.begin(), ordered.end(), MatchFlag::kTruePositive));
      counts.false_positives = counts.detections - counts.true_positives;
      counts.false_negatives = counts.ground_truths - counts.true_positives;
      report.counts[c] = counts;

      if (counts.ground_truths > 0) {
        const double ap =
            average_precision(precision_recall(ordered, counts.ground_truths));
        report.per_class_ap[c] = ap;
        ap_sum += ap;
        ++ap_count;
      }
    }
    report.map = ap_count == 0 ? 0.0 : ap_sum / static_cast<double>(ap_count);
    reports.push_back(std::move(report));
  }
  return reports;
}

std::vector<std::size_t> rotated_nms_indices(std::span<const Detection> dets,
                                             double nms_threshold) {
  check_threshold(nms_threshold, "NMS threshold");
  std::map<std::pair<std::string_view, WeaponClass>, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < dets.size(); ++i) {
    groups[{dets[i].image_name(), dets[i].label()}].push_back(i);
  }
  std::vector<std::size_t> kept;
  for (const auto& [key, members] : groups) {
    const auto order = score_order(dets, members);
    std::vector<bool> suppressed(order.size(), false);
    for (std::size_t a = 0; a < order.size(); ++a) {
      if (suppressed[a]) continue;
      kept.push_back(order[a]);
      for (std::size_t b = a + 1; b < order.size(); ++b) {
        if (!suppressed[b] &&
            rotated_iou(dets[order[a]].box(), dets[order[b]].box()) >= nms_threshold) {
          suppressed[b] = true;
        }
      }
    }
  }
  std::sort(kept.begin(), kept.end());
  return score_order(dets, kept);
}

std::vector<Detection> rotated_nms(std::span<const Detection> dets,
                                   double nms_threshold) {
  std::vector<Detection> out;
  for (std::size_t i : rotated_nms_indices(dets, nms_threshold)) out.push_back(dets[i]);
  return out;
}

std::string reports_to_json(std::span<const EvalReport> reports) {
  using nlohmann::ordered_json;
  ordered_json doc;
  doc["reports"] = ordered_json::array();
  for (const auto& r : reports) {
    ordered_json rep;
    rep["iou_threshold"] = r.iou_threshold;
    rep["iou_mode"] = std::string(to_string(r.mode));
    rep["map"] = r.map;
    ordered_json classes = ordered_json::array();
    ordered_json excluded = ordered_json::array();
    for (const auto& [c, counts] : r.counts) {
      ordered_json entry;
      entry["class"] = std::string(to_string(c));
      const auto ap = r.per_class_ap.find(c);
      if (ap != r.per_class_ap.end()) {
        entry["ap"] = ap->second;
      } else {
        entry["ap"] = nullptr;
        excluded.push_back(std::string(to_string(c)));
      }
      entry["ground_truths"] = counts.ground_truths;
      entry["detections"] = counts.detections;
      entry["true_positives"] = counts.true_positives;
      entry["false_positives"] = counts.false_positives;
      entry["false_negatives"] = counts.false_negatives;
      classes.push_back(std::move(entry));
    }
    rep["per_class"] = std::move(classes);
    // Classes without ground truth do not enter the mAP mean.
    rep["excluded_classes"] = std::move(excluded);
    doc["reports"].push_back(std::move(rep));
  }
  return doc.dump(2) + "\n";
}

std::string format_report_table(std::span<const EvalReport> reports) {
  std::ostringstream out;
  if (reports.empty()) return {};
  constexpr int kFirst = 10;
  constexpr int kCol = 11;
  const auto pad_left = [](const std::string& s, int width) {
    return s.size() >= static_cast<std::size_t>(width)
               ? s
               : std::string(static_cast<std::size_t>(width) - s.size(), ' ') + s;
  };
  const auto pad_right = [](const std::string& s, int width) {
    return s.size() >= static_cast<std::size_t>(width)
               ? s
               : s + std::string(static_cast<std::size_t>(width) - s.size(), ' ');
  };
  out << "IoU mode: " << to_string(reports.front().mode) << '\n';
  out << pad_right("Class", kFirst);
  for (const auto& r : reports) out << pad_left(threshold_label(r.iou_threshold), kCol);
  out << '\n';
  for (WeaponClass c : kObjectClasses) {
    out << pad_right(std::string(to_string(c)), kFirst);
    for (const auto& r : reports) {
      const auto it = r.per_class_ap.find(c);
      out << pad_left(it == r.per_class_ap.end()
                          ? std::string("-")
                          : internal::format_fixed(100.0 * it->second, 1),
                      kCol);
    }
    out << '\n';
  }
  out << pad_right("mAP", kFirst);
  for (const auto& r : reports) out << pad_left(internal::format_fixed(100.0 * r.map, 1), kCol);
  out << '\n';
  return out.str();
}

}  // namespace obb
