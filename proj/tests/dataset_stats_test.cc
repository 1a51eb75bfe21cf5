#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <set>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "obbkit/dataset_stats.h"
#include "testing/oracles.h"

namespace obb {
namespace {

constexpr WeaponClass kGun = WeaponClass::kGun;
constexpr WeaponClass kPistol = WeaponClass::kPistol;

// n_images images holding n_gun Guns and n_pistol Pistols, spread so every
// image has at least one object.
AnnotationSet count_fixture(std::size_t n_images, std::size_t n_gun, std::size_t n_pistol) {
  std::vector<std::vector<AnnotatedObject>> objs(n_images);
  std::size_t k = 0;
  for (std::size_t i = 0; i < n_gun + n_pistol; ++i, ++k) {
    const WeaponClass c = i < n_gun ? kGun : kPistol;
    objs[k % n_images].push_back({c, OrientedBox(50, 50, 10, 5, 0)});
  }
  AnnotationSet set;
  for (std::size_t i = 0; i < n_images; ++i) {
    set.add(Annotation("img" + std::to_string(i) + ".jpg", 100, 100, objs[i]));
  }
  return set;
}

TEST(Summarize, TrainingRowCounts) {
  const auto s = summarize(count_fixture(5149, 4341, 3206));
  EXPECT_EQ(s.total_images, 5149u);
  EXPECT_EQ(s.per_class_objects.at(kGun), 4341u);
  EXPECT_EQ(s.per_class_objects.at(kPistol), 3206u);
  EXPECT_EQ(s.total_objects, 7547u);
  EXPECT_EQ(s.weapons_per_image.min, 1u);
  EXPECT_EQ(s.weapons_per_image.max, 2u);
}

TEST(Summarize, AngleHistogramMatchesConstruction) {
  const std::array<std::size_t, 8> want = {2654, 1200, 300, 40, 17, 60, 900, 2804};
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> offset(-11.25, 11.25);
  std::vector<AnnotatedObject> objs;
  for (std::size_t bin = 0; bin < 8; ++bin) {
    for (std::size_t k = 0; k < want[bin]; ++k) {
      double t = 22.5 * static_cast<double>(bin) + offset(rng);
      objs.push_back({kGun, OrientedBox(50, 50, 10, 5, t)});
    }
  }
  std::shuffle(objs.begin(), objs.end(), rng);
  AnnotationSet set;
  for (std::size_t i = 0; i < objs.size(); i += 10) {
    std::vector<AnnotatedObject> part(objs.begin() + static_cast<long>(i),
                                      objs.begin() + static_cast<long>(std::min(i + 10, objs.size())));
    set.add(Annotation("a" + std::to_string(i), 100, 100, part));
  }
  const auto s = summarize(set, AngleScheme::kDataset);
  EXPECT_EQ(s.angle_histogram, want);
  EXPECT_EQ(s.angle_histogram[0], 2654u);
  EXPECT_EQ(s.angle_histogram[4], 17u);
  EXPECT_EQ(s.angle_histogram[7], 2804u);
}

TEST(Summarize, SingleImage) {
  AnnotationSet set;
  set.add(Annotation("x", 10, 10, {{kGun, OrientedBox(5, 5, 2, 2, 0)}}));
  const auto s = summarize(set);
  EXPECT_EQ(s.total_images, 1u);
  EXPECT_EQ(s.total_objects, 1u);
  EXPECT_EQ(s.per_class_objects.at(kGun), 1u);
  EXPECT_EQ(s.weapons_per_image, (WeaponsPerImage{1, 1, 1.0}));
  EXPECT_EQ(format_mean(s), "1.00");
}

TEST(Summarize, MeanPrintsTwoDecimals) {
  EXPECT_EQ(format_mean(summarize(count_fixture(10, 9, 5))), "1.40");
  EXPECT_EQ(format_mean(summarize(count_fixture(6398, 4983, 4031))), "1.41");
}

TEST(Summarize, EmptySet) {
  const auto s = summarize(AnnotationSet{});
  EXPECT_EQ(s.total_images, 0u);
  EXPECT_EQ(s.total_objects, 0u);
  EXPECT_EQ(s.per_class_objects.at(kGun), 0u);
  EXPECT_EQ(format_mean(s), "0.00");
}

TEST(Summarize, SchemesDisagreeNearEdges) {
  AnnotationSet set;
  set.add(Annotation("e", 100, 100, {{kGun, OrientedBox(50, 50, 10, 5, 11.5)}}));
  EXPECT_EQ(summarize(set, AngleScheme::kModel).angle_histogram[0], 1u);
  EXPECT_EQ(summarize(set, AngleScheme::kDataset).angle_histogram[1], 1u);
}

TEST(Summarize, InvariantsOnRandomSets) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 30; ++trial) {
    AnnotationSet set;
    for (int i = 0; i < 40; ++i) set.add(testing::random_annotation(rng, std::to_string(i), 6));
    const auto s = summarize(set);
    std::size_t per_class = 0;
    for (const auto& [c, n] : s.per_class_objects) per_class += n;
    EXPECT_EQ(per_class, s.total_objects);
    EXPECT_EQ(std::accumulate(s.angle_histogram.begin(), s.angle_histogram.end(), std::size_t{0}),
              s.total_objects);

    // Histogram does not depend on annotation order.
    std::vector<Annotation> anns = set.annotations();
    std::shuffle(anns.begin(), anns.end(), rng);
    AnnotationSet shuffled;
    for (auto& a : anns) shuffled.add(a);
    EXPECT_EQ(summarize(shuffled).angle_histogram, s.angle_histogram);
  }
}

TEST(Split, SizesAndErrors) {
  const auto set = count_fixture(10, 8, 4);
  const auto r = split(set, 0.8, 42);
  EXPECT_EQ(r.train.size(), 8u);
  EXPECT_EQ(r.test.size(), 2u);
  EXPECT_THROW(split(set, 0.0, 1), std::invalid_argument);
  EXPECT_THROW(split(set, 1.0, 1), std::invalid_argument);
  EXPECT_THROW(split(set, NAN, 1), std::invalid_argument);
  EXPECT_EQ(split(AnnotationSet{}, 0.5, 1).train.size(), 0u);
}

TEST(Split, DeterministicPartition) {
  std::mt19937_64 rng(3);
  AnnotationSet set;
  for (int i = 0; i < 101; ++i) set.add(testing::random_annotation(rng, std::to_string(i), 3));
  for (std::uint64_t seed : {0ull, 1ull, 12345ull}) {
    const auto a = split(set, 0.8, seed);
    const auto b = split(set, 0.8, seed);
    EXPECT_EQ(a.train.annotations(), b.train.annotations());
    EXPECT_EQ(a.test.annotations(), b.test.annotations());
    EXPECT_EQ(a.train.size(), 81u);

    std::multiset<std::string> names;
    for (const auto& x : a.train.annotations()) names.insert(x.image_name());
    for (const auto& x : a.test.annotations()) names.insert(x.image_name());
    std::multiset<std::string> orig;
    for (const auto& x : set.annotations()) orig.insert(x.image_name());
    EXPECT_EQ(names, orig);

    // Summaries add up.
    const auto full = summarize(set);
    const auto st = summarize(a.train);
    const auto ss = summarize(a.test);
    EXPECT_EQ(st.total_images + ss.total_images, full.total_images);
    EXPECT_EQ(st.total_objects + ss.total_objects, full.total_objects);
    for (WeaponClass c : kObjectClasses) {
      EXPECT_EQ(st.per_class_objects.at(c) + ss.per_class_objects.at(c),
                full.per_class_objects.at(c));
    }
    for (int k = 0; k < kNumAngleClasses; ++k) {
      EXPECT_EQ(st.angle_histogram[k] + ss.angle_histogram[k], full.angle_histogram[k]);
    }
  }
  EXPECT_NE(split(set, 0.8, 1).test.annotations(), split(set, 0.8, 2).test.annotations());
}

TEST(Split, KnownPermutationForSeed) {
  // Pins the documented shuffle so it cannot drift between builds.
  const auto set = count_fixture(10, 10, 0);
  const auto r = split(set, 0.5, 7);
  std::vector<std::string> train;
  for (const auto& a : r.train.annotations()) train.push_back(a.image_name());
  std::mt19937_64 rng(7);
  std::vector<std::size_t> perm(10);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  for (std::size_t i = 10; i > 1; --i) {
    const std::uint64_t range = i;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % range;
    std::uint64_t x;
    do x = rng(); while (x >= limit);
    std::swap(perm[i - 1], perm[x % range]);
  }
  std::vector<std::size_t> chosen(perm.begin(), perm.begin() + 5);
  std::sort(chosen.begin(), chosen.end());
  std::vector<std::string> want;
  for (std::size_t i : chosen) want.push_back("img" + std::to_string(i) + ".jpg");
  EXPECT_EQ(train, want);
}

TEST(Output, JsonAndChartCsv) {
  const auto s = summarize(count_fixture(10, 9, 5));
  const auto j = nlohmann::json::parse(summary_to_json(s));
  EXPECT_EQ(j["total_images"], 10);
  EXPECT_EQ(j["per_class_objects"]["Gun"], 9);
  EXPECT_EQ(j["weapons_per_image"]["mean_2dp"], "1.40");
  EXPECT_EQ(j["angle_histogram"].size(), 8u);
  const std::string csv = summary_to_chart_csv(s);
  EXPECT_EQ(csv.rfind("section,key,value\n", 0), 0u);
  EXPECT_NE(csv.find("class,Pistol,5\n"), std::string::npos);
  EXPECT_NE(csv.find("angle_class,0,14\n"), std::string::npos);
  EXPECT_NE(csv.find("weapons_per_image,mean,1.40\n"), std::string::npos);
}

}  // namespace
}  // namespace obb
