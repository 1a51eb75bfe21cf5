#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <sstream>
#include <stdexcept>
#include <vector>

#include <nlohmann/json.hpp>

#include "obbkit/errors.h"
#include "obbkit/evaluation.h"
#include "testing/oracles.h"

namespace obb {
namespace {

using testing::brute_force_evaluate;

constexpr WeaponClass kGun = WeaponClass::kGun;
constexpr WeaponClass kPistol = WeaponClass::kPistol;

double rotated(const OrientedBox& a, const OrientedBox& b) { return rotated_iou(a, b); }
double horizontal(const OrientedBox& a, const OrientedBox& b) {
  return horizontal_iou(envelope(a), envelope(b));
}

std::vector<MatchFlag> flags(std::initializer_list<int> tp) {
  std::vector<MatchFlag> out;
  for (int v : tp) out.push_back(v ? MatchFlag::kTruePositive : MatchFlag::kFalsePositive);
  return out;
}

// Six detections against four ground truths, hand-checked below.
struct SixVsFour {
  Annotation gts{"six.jpg", 200, 200,
                 {{kGun, OrientedBox(20, 20, 10, 10, 0)},
                  {kGun, OrientedBox(60, 20, 10, 10, 0)},
                  {kGun, OrientedBox(100, 20, 10, 10, 0)},
                  {kPistol, OrientedBox(20, 80, 10, 10, 0)}}};
  std::vector<Detection> dets{
      {"six.jpg", kGun, 0.95, OrientedBox(21, 20, 10, 10, 0)},     // g0, IoU 9/11
      {"six.jpg", kGun, 0.90, OrientedBox(20, 20, 10, 10, 0)},     // g0 again: taken
      {"six.jpg", kGun, 0.85, OrientedBox(65, 20, 10, 10, 0)},     // g1, IoU 1/3
      {"six.jpg", kGun, 0.80, OrientedBox(150, 150, 10, 10, 0)},   // nothing
      {"six.jpg", kPistol, 0.70, OrientedBox(20, 80, 10, 10, 0)},  // p0 exact
      {"six.jpg", kGun, 0.60, OrientedBox(100, 22, 10, 10, 0)},    // g2, IoU 4/6
  };
};

TEST(Detection, Validates) {
  EXPECT_THROW(Detection("", kGun, 0.5, OrientedBox(0, 0, 1, 1, 0)), std::invalid_argument);
  EXPECT_THROW(Detection("a", WeaponClass::kBackground, 0.5, OrientedBox(0, 0, 1, 1, 0)),
               std::invalid_argument);
  EXPECT_THROW(Detection("a", kGun, 1.5, OrientedBox(0, 0, 1, 1, 0)), std::invalid_argument);
  EXPECT_THROW(Detection("a", kGun, NAN, OrientedBox(0, 0, 1, 1, 0)), std::invalid_argument);
}

TEST(Match, SingleExactDetectionIsTp) {
  const Annotation gts("a", 100, 100, {{kGun, OrientedBox(50, 50, 10, 10, 30)}});
  const std::vector<Detection> dets = {{"a", kGun, 0.9, OrientedBox(50, 50, 10, 10, 30)}};
  const auto r = match_detections(dets, gts, 0.5);
  EXPECT_EQ(r.flags, flags({1}));
  EXPECT_EQ(r.false_negatives, 0u);
}

TEST(Match, DuplicateDetectionsOneTp) {
  const Annotation gts("a", 100, 100, {{kGun, OrientedBox(50, 50, 10, 10, 30)}});
  const std::vector<Detection> dets = {{"a", kGun, 0.8, OrientedBox(50, 50, 10, 10, 30)},
                                       {"a", kGun, 0.9, OrientedBox(50, 50, 10, 10, 30)}};
  const auto r = match_detections(dets, gts, 0.5);
  EXPECT_EQ(r.flags, flags({0, 1}));
  EXPECT_EQ(r.order, (std::vector<std::size_t>{1, 0}));
  EXPECT_EQ(r.flags_in_order(), flags({1, 0}));
}

TEST(Match, SixVsFourHandTrace) {
  const SixVsFour f;
  const auto r = match_detections(f.dets, f.gts, 0.5);
  EXPECT_EQ(r.flags, flags({1, 0, 0, 0, 1, 1}));
  EXPECT_EQ(r.matched_gt[0], 0u);
  EXPECT_EQ(r.matched_gt[5], 2u);
  EXPECT_EQ(r.gt_matched, (std::vector<bool>{true, false, true, true}));
  EXPECT_EQ(r.false_negatives, 1u);
  const auto low = match_detections(f.dets, f.gts, 0.25);
  EXPECT_EQ(low.flags, flags({1, 0, 1, 0, 1, 1}));
}

TEST(Match, ThresholdIsInclusive) {
  const Annotation gts("a", 100, 100, {{kGun, OrientedBox(10, 10, 4, 4, 0)}});
  // IoU 8/24 = 1/3 exactly representable as the computed ratio.
  const std::vector<Detection> dets = {{"a", kGun, 0.9, OrientedBox(11, 10, 4, 4, 0)}};
  const double iou = rotated_iou(dets[0].box(), gts.objects()[0].box);
  EXPECT_EQ(match_detections(dets, gts, iou).flags, flags({1}));
  EXPECT_EQ(match_detections(dets, gts, std::nextafter(iou, 1.0)).flags, flags({0}));
}

TEST(Match, ErrorsOnWrongImageAndThreshold) {
  const Annotation gts("a", 100, 100, {});
  const std::vector<Detection> dets = {{"b", kGun, 0.9, OrientedBox(11, 10, 4, 4, 0)}};
  EXPECT_THROW(match_detections(dets, gts, 0.5), InputError);
  EXPECT_THROW(match_detections({}, gts, 0.0), std::invalid_argument);
  EXPECT_THROW(match_detections({}, gts, 1.01), std::invalid_argument);
}

TEST(PrecisionRecall, Examples) {
  EXPECT_EQ(precision_recall(flags({1}), 1), (std::vector<PrPoint>{{1.0, 1.0}}));
  EXPECT_EQ(precision_recall(flags({0}), 1), (std::vector<PrPoint>{{0.0, 0.0}}));
  const auto c = precision_recall(flags({1, 0, 1}), 2);
  ASSERT_EQ(c.size(), 3u);
  EXPECT_EQ(c[0], (PrPoint{0.5, 1.0}));
  EXPECT_EQ(c[1], (PrPoint{0.5, 0.5}));
  EXPECT_EQ(c[2], (PrPoint{1.0, 2.0 / 3.0}));
  EXPECT_EQ(precision_recall(flags({1}), 0)[0].recall, 0.0);
}

TEST(AveragePrecision, Examples) {
  EXPECT_EQ(average_precision(precision_recall(flags({1, 1}), 2)), 1.0);
  EXPECT_EQ(average_precision(precision_recall(flags({0, 0}), 2)), 0.0);
  EXPECT_EQ(average_precision({}), 0.0);
  // [TP, FP, TP] / 2: 0.5 * 1 + 0.5 * 2/3.
  EXPECT_DOUBLE_EQ(average_precision(precision_recall(flags({1, 0, 1}), 2)), 0.5 + 1.0 / 3.0);
}

TEST(AveragePrecision, SixVsFourMatchesEnvelopeOracle) {
  const SixVsFour f;
  const auto r = match_detections(f.dets, f.gts, 0.5);
  // Gun detections only, in score order.
  std::vector<MatchFlag> gun;
  std::vector<bool> gun_bool;
  for (std::size_t i : r.order) {
    if (f.dets[i].label() == kGun) {
      gun.push_back(r.flags[i]);
      gun_bool.push_back(r.flags[i] == MatchFlag::kTruePositive);
    }
  }
  const double ap = average_precision(precision_recall(gun, 3));
  EXPECT_EQ(ap, testing::envelope_area_ap(gun_bool, 3));
  // TP FP FP FP TP: 1/3 * 1 + 1/3 * 2/5.
  EXPECT_NEAR(ap, 1.0 / 3.0 + 2.0 / 15.0, 1e-15);
}

TEST(AveragePrecision, MatchesEnvelopeOracleOnRandomSequences) {
  std::mt19937_64 rng(3);
  std::bernoulli_distribution coin(0.5);
  for (int i = 0; i < 2000; ++i) {
    const std::size_t n = 1 + i % 12;
    std::vector<MatchFlag> f;
    std::vector<bool> b;
    for (std::size_t k = 0; k < n; ++k) {
      const bool tp = coin(rng);
      f.push_back(tp ? MatchFlag::kTruePositive : MatchFlag::kFalsePositive);
      b.push_back(tp);
    }
    const std::size_t num_gt = static_cast<std::size_t>(std::count(b.begin(), b.end(), true)) +
                               static_cast<std::size_t>(i % 3);
    if (num_gt == 0) continue;
    ASSERT_NEAR(average_precision(precision_recall(f, num_gt)),
                testing::envelope_area_ap(b, num_gt), 1e-15);
  }
}

TEST(Evaluate, PerfectDetector) {
  std::mt19937_64 rng(5);
  AnnotationSet gts;
  std::vector<Detection> dets;
  for (int i = 0; i < 5; ++i) {
    const auto a = testing::random_annotation(rng, "p" + std::to_string(i), 5);
    for (const auto& o : a.objects()) dets.emplace_back(a.image_name(), o.label, 1.0, o.box);
    gts.add(a);
  }
  for (const auto& r : evaluate(dets, gts, kDefaultEvalThresholds)) {
    EXPECT_EQ(r.map, 1.0);
    for (const auto& [c, ap] : r.per_class_ap) EXPECT_EQ(ap, 1.0);
  }
}

TEST(Evaluate, EmptyDetections) {
  AnnotationSet gts;
  gts.add(Annotation("a", 10, 10, {{kGun, OrientedBox(5, 5, 2, 2, 0)}}));
  const auto r = evaluate({}, gts, kDefaultEvalThresholds);
  ASSERT_EQ(r.size(), 3u);
  for (const auto& rep : r) {
    EXPECT_EQ(rep.map, 0.0);
    EXPECT_EQ(rep.counts.at(kGun).false_negatives, 1u);
  }
}

TEST(Evaluate, ClassesWithoutGroundTruthAreExcluded) {
  AnnotationSet gts;
  gts.add(Annotation("a", 10, 10, {{kGun, OrientedBox(5, 5, 2, 2, 0)}}));
  const std::vector<Detection> dets = {{"a", kGun, 0.9, OrientedBox(5, 5, 2, 2, 0)},
                                       {"a", kPistol, 0.8, OrientedBox(5, 5, 2, 2, 0)}};
  const auto r = evaluate(dets, gts, std::vector<double>{0.5})[0];
  EXPECT_EQ(r.per_class_ap.count(kPistol), 0u);
  EXPECT_EQ(r.map, 1.0);
  EXPECT_EQ(r.counts.at(kPistol).false_positives, 1u);
  EXPECT_EQ(evaluate({}, AnnotationSet{}, std::vector<double>{0.5})[0].map, 0.0);
}

TEST(Evaluate, Errors) {
  AnnotationSet gts;
  gts.add(Annotation("a", 10, 10, {}));
  const std::vector<Detection> dets = {{"zzz", kGun, 0.9, OrientedBox(5, 5, 2, 2, 0)}};
  EXPECT_THROW(evaluate(dets, gts, kDefaultEvalThresholds), InputError);
  EXPECT_THROW(evaluate({}, gts, std::vector<double>{}), std::invalid_argument);
  EXPECT_THROW(evaluate({}, gts, std::vector<double>{0.0}), std::invalid_argument);
}

TEST(Evaluate, MatchesBruteForceOracle) {
  for (std::uint64_t seed = 100; seed < 300; ++seed) {
    const auto inst = testing::constructed_eval_instance(seed, 3, 8);
    for (IouMode mode : {IouMode::kRotated, IouMode::kHorizontal}) {
      const auto reports = evaluate(inst.dets, inst.gts, kDefaultEvalThresholds, {mode, 1});
      for (const auto& r : reports) {
        const auto o = brute_force_evaluate(inst.dets, inst.gts, r.iou_threshold,
                                            mode == IouMode::kRotated ? rotated : horizontal);
        ASSERT_EQ(r.per_class_ap.size(), o.ap.size()) << seed;
        for (const auto& [c, ap] : o.ap) ASSERT_NEAR(r.per_class_ap.at(c), ap, 1e-12) << seed;
        ASSERT_NEAR(r.map, o.map, 1e-12) << seed;
        for (const auto& [c, tp] : o.true_positives) {
          ASSERT_EQ(r.counts.at(c).true_positives, tp) << seed;
        }
      }
    }
  }
}

TEST(Evaluate, MapMonotoneInThreshold) {
  const std::vector<double> ts = {0.1, 0.25, 0.4, 0.5, 0.6, 0.75, 0.9, 1.0};
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    const auto inst = testing::constructed_eval_instance(seed, 3, 8);
    const auto r = evaluate(inst.dets, inst.gts, ts);
    for (std::size_t i = 1; i < r.size(); ++i) ASSERT_GE(r[i - 1].map, r[i].map) << seed;
  }
}

TEST(Evaluate, CountsAreConsistent) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto inst = testing::constructed_eval_instance(seed, 3, 8);
    for (const auto& r : evaluate(inst.dets, inst.gts, kDefaultEvalThresholds)) {
      for (const auto& [c, n] : r.counts) {
        ASSERT_EQ(n.true_positives + n.false_positives, n.detections);
        ASSERT_EQ(n.true_positives + n.false_negatives, n.ground_truths);
        ASSERT_LE(n.true_positives, std::min(n.detections, n.ground_truths));
      }
      ASSERT_GE(r.map, 0.0);
      ASSERT_LE(r.map, 1.0);
    }
  }
}

TEST(Evaluate, PermutationInvariantForDistinctScores) {
  std::mt19937_64 rng(9);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    auto inst = testing::constructed_eval_instance(seed, 3, 8);
    std::vector<Detection> dets;
    for (std::size_t i = 0; i < inst.dets.size(); ++i) {
      const auto& d = inst.dets[i];
      dets.emplace_back(d.image_name(), d.label(), 0.001 * static_cast<double>(i + 1), d.box());
    }
    const auto base = evaluate(dets, inst.gts, kDefaultEvalThresholds);
    std::shuffle(dets.begin(), dets.end(), rng);
    ASSERT_EQ(evaluate(dets, inst.gts, kDefaultEvalThresholds), base);
  }
}

TEST(Evaluate, HorizontalEqualsRotatedForAxisAlignedBoxes) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 50; ++trial) {
    AnnotationSet gts;
    std::vector<Detection> dets;
    for (int im = 0; im < 3; ++im) {
      const std::string name = "h" + std::to_string(im);
      std::vector<AnnotatedObject> objs;
      for (int k = 0; k < 4; ++k) {
        const OrientedBox b(20 + 60 * u(rng), 20 + 60 * u(rng), 5 + 20 * u(rng),
                            5 + 20 * u(rng), 0);
        const WeaponClass c = u(rng) < 0.5 ? kGun : kPistol;
        objs.push_back({c, b});
        dets.emplace_back(name, c, u(rng),
                          OrientedBox(b.cx() + 4 * (u(rng) - 0.5), b.cy() + 4 * (u(rng) - 0.5),
                                      b.w() * (0.8 + 0.4 * u(rng)), b.h(), 0));
      }
      gts.add(Annotation(name, 100, 100, objs));
    }
    const auto rot = evaluate(dets, gts, kDefaultEvalThresholds, {IouMode::kRotated, 1});
    auto hor = evaluate(dets, gts, kDefaultEvalThresholds, {IouMode::kHorizontal, 1});
    for (auto& r : hor) r.mode = IouMode::kRotated;
    ASSERT_EQ(rot, hor);
  }
}

TEST(Evaluate, ThreadCountDoesNotChangeResult) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto inst = testing::constructed_eval_instance(seed, 3, 8);
    const auto a = evaluate(inst.dets, inst.gts, kDefaultEvalThresholds, {IouMode::kRotated, 1});
    const auto b = evaluate(inst.dets, inst.gts, kDefaultEvalThresholds, {IouMode::kRotated, 8});
    ASSERT_EQ(a, b);
    ASSERT_EQ(reports_to_json(a), reports_to_json(b));
  }
}

TEST(Reports, JsonAndTable) {
  const SixVsFour f;
  AnnotationSet gts;
  gts.add(f.gts);
  const auto reports = evaluate(f.dets, gts, kDefaultEvalThresholds);
  const auto j = nlohmann::json::parse(reports_to_json(reports))["reports"];
  ASSERT_EQ(j.size(), 3u);
  EXPECT_EQ(j[1]["iou_threshold"], 0.5);
  EXPECT_EQ(j[1]["iou_mode"], "rotated");
  const std::string table = format_report_table(reports);
  EXPECT_NE(table.find("map@0.25"), std::string::npos);
  EXPECT_NE(table.find("map@0.75"), std::string::npos);
  EXPECT_NE(table.find("Gun"), std::string::npos);
  EXPECT_NE(table.find("mAP"), std::string::npos);
}

TEST(Nms, Examples) {
  const OrientedBox b(50, 50, 20, 10, 30);
  const std::vector<Detection> dup = {{"a", kGun, 0.8, b}, {"a", kGun, 0.9, b}};
  const auto kept = rotated_nms(dup);
  ASSERT_EQ(kept.size(), 1u);
  EXPECT_EQ(kept[0].score(), 0.9);

  const std::vector<Detection> apart = {{"a", kGun, 0.8, b},
                                        {"a", kGun, 0.9, OrientedBox(150, 150, 20, 10, 30)}};
  EXPECT_EQ(rotated_nms(apart).size(), 2u);
  EXPECT_EQ(kDefaultNmsIou, 0.5);
}

TEST(Nms, ChainKeepsEnds) {
  // Unit-height strips: A-B and B-C overlap by 2/3 of a width-3 box (IoU 0.5),
  // A-C by 1/3 (IoU 0.2).
  const std::vector<Detection> chain = {
      {"a", kGun, 0.7, OrientedBox(3.5, 0.5, 3, 1, 0)},
      {"a", kGun, 0.9, OrientedBox(1.5, 0.5, 3, 1, 0)},
      {"a", kGun, 0.8, OrientedBox(2.5, 0.5, 3, 1, 0)},
  };
  const auto idx = rotated_nms_indices(chain, 0.5);
  EXPECT_EQ(idx, (std::vector<std::size_t>{1, 0}));
  EXPECT_EQ(idx, testing::reference_nms(chain, 0.5));
}

TEST(Nms, ClassesAndImagesAreIndependent) {
  const OrientedBox b(50, 50, 20, 10, 30);
  const std::vector<Detection> d = {
      {"a", kGun, 0.9, b}, {"a", kPistol, 0.8, b}, {"b", kGun, 0.7, b}};
  EXPECT_EQ(rotated_nms(d).size(), 3u);
}

TEST(Nms, ThresholdOneOnlyDropsExactDuplicates) {
  std::mt19937_64 rng(13);
  std::vector<Detection> d;
  for (int i = 0; i < 30; ++i) {
    d.emplace_back("a", kGun, 0.5 + 0.01 * i, testing::random_box(rng, 5, 30, 40));
  }
  EXPECT_EQ(rotated_nms(d, 1.0).size(), d.size());
  d.push_back(d.front());
  EXPECT_EQ(rotated_nms(d, 1.0).size(), d.size() - 1);
}

TEST(Nms, IdempotentAndMatchesReference) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Detection> d;
    for (int i = 0; i < 25; ++i) {
      d.emplace_back(u(rng) < 0.5 ? "a" : "b", u(rng) < 0.5 ? kGun : kPistol,
                     std::round(u(rng) * 20) / 20, testing::random_box(rng, 5, 40, 60));
    }
    const auto once = rotated_nms(d);
    ASSERT_EQ(rotated_nms(once), once);
    const auto ref = testing::reference_nms(d, 0.5);
    ASSERT_EQ(rotated_nms_indices(d), ref);
  }
  EXPECT_THROW(rotated_nms({}, 0.0), std::invalid_argument);
}

TEST(DetectionsJsonl, RoundTripAndErrors) {
  const SixVsFour f;
  std::stringstream buf;
  write_detections_jsonl(buf, f.dets);
  EXPECT_EQ(read_detections_jsonl(buf), f.dets);

  std::istringstream bad(
      "{\"image_name\":\"a\",\"class\":\"gun\",\"score\":0.5,\"cx\":1,\"cy\":1,\"w\":1,"
      "\"h\":1,\"theta_deg\":0}\n\n{\"image_name\":\"a\",\"class\":\"rifle\"}\n");
  try {
    read_detections_jsonl(bad);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  std::istringstream missing("{\"image_name\":\"a\",\"class\":\"gun\",\"score\":0.5}\n");
  EXPECT_THROW(read_detections_jsonl(missing), ParseError);
  std::istringstream degenerate(
      "{\"image_name\":\"a\",\"class\":\"gun\",\"score\":0.5,\"cx\":1,\"cy\":1,\"w\":0,"
      "\"h\":1,\"theta_deg\":0}\n");
  EXPECT_THROW(read_detections_jsonl(degenerate), ParseError);
  std::istringstream junk("{not json\n");
  EXPECT_THROW(read_detections_jsonl(junk), ParseError);
  EXPECT_THROW(read_detections_jsonl_file("/nonexistent/dets.jsonl"), IoError);
}

}  // namespace
}  // namespace obb
