#include "obbkit/dataset_stats.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

#include <nlohmann/json.hpp>

#include "internal/text.h"

namespace obb {
namespace {

// Uniform integer in [0, bound] from raw 64-bit draws.
std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t bound) {
  if (bound == std::numeric_limits<std::uint64_t>::max()) return rng();
  const std::uint64_t range = bound + 1;
  const std::uint64_t limit =
      std::numeric_limits<std::uint64_t>::max() -
      std::numeric_limits<std::uint64_t>::max() % range;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % range;
}

}  // namespace

DatasetSummary summarize(const AnnotationSet& set, AngleScheme scheme) {
  DatasetSummary s;
  s.scheme = scheme;
  for (WeaponClass c : kObjectClasses) s.per_class_objects[c] = 0;
  s.total_images = set.size();
  std::size_t min_count = std::numeric_limits<std::size_t>::max();
  std::size_t max_count = 0;
  for (const auto& a : set.annotations()) {
    const std::size_t n = a.objects().size();
    min_count = std::min(min_count, n);
    max_count = std::max(max_count, n);
    for (const auto& obj : a.objects()) {
      ++s.per_class_objects[obj.label];
      ++s.angle_histogram[bin_angle(obj.box.theta(), scheme).index()];
    }
    s.total_objects += n;
  }
  if (s.total_images > 0) {
    s.weapons_per_image.min = min_count;
    s.weapons_per_image.max = max_count;
    s.weapons_per_image.mean =
        static_cast<double>(s.total_objects) / static_cast<double>(s.total_images);
  }
  return s;
}

std::string format_mean(const DatasetSummary& s) {
  return internal::format_fixed(s.weapons_per_image.mean, 2);
}

std::string summary_to_json(const DatasetSummary& s) {
  nlohmann::ordered_json j;
  j["total_images"] = s.total_images;
  j["total_objects"] = s.total_objects;
  nlohmann::ordered_json per_class = nlohmann::ordered_json::object();
  for (const auto& [c, n] : s.per_class_objects) per_class[std::string(to_string(c))] = n;
  j["per_class_objects"] = per_class;
  j["angle_scheme"] = std::string(to_string(s.scheme));
  j["angle_histogram"] = s.angle_histogram;
  j["weapons_per_image"] = {{"min", s.weapons_per_image.min},
                            {"max", s.weapons_per_image.max},
                            {"mean", s.weapons_per_image.mean},
                            {"mean_2dp", format_mean(s)}};
  return j.dump(2) + "\n";
}

std::string summary_to_chart_csv(const DatasetSummary& s) {
  std::string out = "section,key,value\n";
  auto row = [&out](std::string_view section, std::string_view key,
                    const std::string& value) {
    out.append(section).append(",").append(key).append(",").append(value) += '\n';
  };
  row("summary", "total_images", std::to_string(s.total_images));
  row("summary", "total_objects", std::to_string(s.total_objects));
  row("summary", "angle_scheme", std::string(to_string(s.scheme)));
  for (const auto& [c, n] : s.per_class_objects) row("class", to_string(c), std::to_string(n));
  for (int i = 0; i < kNumAngleClasses; ++i) {
    row("angle_class", std::to_string(i), std::to_string(s.angle_histogram[i]));
  }
  row("weapons_per_image", "min", std::to_string(s.weapons_per_image.min));
  row("weapons_per_image", "max", std::to_string(s.weapons_per_image.max));
  row("weapons_per_image", "mean", format_mean(s));
  return out;
}

SplitResult split(const AnnotationSet& set, double train_fraction,
                  std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw std::invalid_argument("train_fraction must be in (0, 1)");
  }
  const std::size_t n = set.size();
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    const auto j = static_cast<std::size_t>(bounded(rng, i - 1));
    std::swap(perm[i - 1], perm[j]);
  }
  const auto n_train = static_cast<std::size_t>(
      std::llround(train_fraction * static_cast<double>(n)));
  std::vector<bool> in_train(n, false);
  for (std::size_t k = 0; k < n_train; ++k) in_train[perm[k]] = true;

  SplitResult r{AnnotationSet(set.source_format()), AnnotationSet(set.source_format())};
  for (std::size_t i = 0; i < n; ++i) {
    (in_train[i] ? r.train : r.test).add(set.annotations()[i]);
  }
  return r;
}

}  // namespace obb
