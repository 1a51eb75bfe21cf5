#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "obbkit/annotation.h"
#include "obbkit/geometry.h"
#include "obbkit/weapon_class.h"

namespace obb {

inline constexpr double kDefaultNmsIou = 0.5;
inline constexpr std::array<double, 3> kDefaultEvalThresholds = {0.25, 0.5, 0.75};

// Scored model output for one object.
class Detection {
 public:
  // Throws std::invalid_argument for an empty image name, a Background
  // class, or a score outside [0, 1].
  Detection(std::string image_name, WeaponClass label, double score,
            OrientedBox box);

  const std::string& image_name() const noexcept { return image_name_; }
  WeaponClass label() const noexcept { return label_; }
  double score() const noexcept { return score_; }
  const OrientedBox& box() const noexcept { return box_; }

  friend bool operator==(const Detection&, const Detection&) = default;

 private:
  std::string image_name_;
  WeaponClass label_;
  double score_;
  OrientedBox box_;
};

enum class IouMode {
  kRotated,     // rotated_iou on the oriented boxes
  kHorizontal,  // horizontal_iou on the envelopes
};

std::string_view to_string(IouMode mode);
std::optional<IouMode> parse_iou_mode(std::string_view name);

double box_iou(const OrientedBox& a, const OrientedBox& b, IouMode mode);

enum class MatchFlag { kTruePositive, kFalsePositive };

struct MatchResult {
  // Detection indices in processing order: score descending, ties by input
  // order.
  std::vector<std::size_t> order;
  // Indexed like the input detections.
  std::vector<MatchFlag> flags;
  std::vector<std::optional<std::size_t>> matched_gt;
  // Indexed like gts.objects().
  std::vector<bool> gt_matched;
  std::size_t false_negatives = 0;

  // flags permuted into processing order.
  std::vector<MatchFlag> flags_in_order() const;
};

// Greedy one-to-one matching for a single image. Each detection, in
// processing order, is compared with the still-unmatched ground truths of its
// class; the best one (lowest index on ties) is claimed when IoU >= threshold.
// Throws InputError if a detection names another image and
// std::invalid_argument unless 0 < iou_threshold <= 1.
MatchResult match_detections(std::span<const Detection> dets,
                             const Annotation& gts, double iou_threshold,
                             IouMode mode = IouMode::kRotated);

struct PrPoint {
  double recall = 0.0;
  double precision = 0.0;

  friend bool operator==(const PrPoint&, const PrPoint&) = default;
};

// Cumulative precision/recall after each flag. Recall is 0 when num_gt is 0.
std::vector<PrPoint> precision_recall(std::span<const MatchFlag> flags_in_order,
                                      std::size_t num_gt);

// All-points interpolated AP: area under the running maximum of precision
// taken from the right.
double average_precision(std::span<const PrPoint> curve);

struct ClassCounts {
  std::size_t ground_truths = 0;
  std::size_t detections = 0;
  std::size_t true_positives = 0;
  std::size_t false_positives = 0;
  std::size_t false_negatives = 0;

  friend bool operator==(const ClassCounts&, const ClassCounts&) = default;
};

struct EvalReport {
  double iou_threshold = 0.5;
  IouMode mode = IouMode::kRotated;
  // Only classes with at least one ground truth.
  std::map<WeaponClass, double> per_class_ap;
  // Mean of per_class_ap; 0 when no class has ground truths.
  double map = 0.0;
  std::map<WeaponClass, ClassCounts> counts;

  friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

struct EvalOptions {
  IouMode mode = IouMode::kRotated;
  // Per-image matching runs on up to this many threads. The result does not
  // depend on the thread count.
  unsigned threads = 1;
};

// One report per threshold. Throws InputError when a detection references an
// image absent from `gts`, std::invalid_argument for an empty threshold list
// or a threshold outside (0, 1].
std::vector<EvalReport> evaluate(std::span<const Detection> dets,
                                 const AnnotationSet& gts,
                                 std::span<const double> thresholds,
                                 const EvalOptions& options = {});

// Greedy per (image, class) suppression: the highest-scoring remaining
// detection is kept and every other one with IoU >= nms_threshold against it
// is dropped. Output is sorted by score descending, ties by input order.
// Throws std::invalid_argument unless 0 < nms_threshold <= 1.
std::vector<Detection> rotated_nms(std::span<const Detection> dets,
                                   double nms_threshold = kDefaultNmsIou);
std::vector<std::size_t> rotated_nms_indices(std::span<const Detection> dets,
                                             double nms_threshold = kDefaultNmsIou);

// Reports as a JSON document.
std::string reports_to_json(std::span<const EvalReport> reports);
// Plain-text table, one row per class plus an mAP row, one column per
// threshold, values in percent.
std::string format_report_table(std::span<const EvalReport> reports);

// Line-delimited JSON, one detection per line with the fields image_name,
// class, score, cx, cy, w, h, theta_deg. Blank lines are skipped. Malformed
// lines raise ParseError with the line number.
std::vector<Detection> read_detections_jsonl(std::istream& in);
std::vector<Detection> read_detections_jsonl_file(const std::string& path);
void write_detections_jsonl(std::ostream& out, std::span<const Detection> dets);

}  // namespace obb
