#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <utility>

#include "obbkit/angle_codec.h"
#include "obbkit/annotation.h"
#include "obbkit/weapon_class.h"

namespace obb {

struct WeaponsPerImage {
  std::size_t min = 0;
  std::size_t max = 0;
  double mean = 0.0;

  friend bool operator==(const WeaponsPerImage&, const WeaponsPerImage&) = default;
};

struct DatasetSummary {
  std::size_t total_images = 0;
  // Always holds an entry for Gun and Pistol.
  std::map<WeaponClass, std::size_t> per_class_objects;
  std::size_t total_objects = 0;
  AngleScheme scheme = AngleScheme::kModel;
  std::array<std::size_t, kNumAngleClasses> angle_histogram{};
  WeaponsPerImage weapons_per_image;

  friend bool operator==(const DatasetSummary&, const DatasetSummary&) = default;
};

DatasetSummary summarize(const AnnotationSet& set,
                         AngleScheme scheme = AngleScheme::kModel);

// Mean weapons per image with two decimals, e.g. "1.40".
std::string format_mean(const DatasetSummary& s);

std::string summary_to_json(const DatasetSummary& s);
// Rows of section,key,value for charting.
std::string summary_to_chart_csv(const DatasetSummary& s);

struct SplitResult {
  AnnotationSet train;
  AnnotationSet test;
};

// Seeded image-level split. The permutation is a Fisher-Yates shuffle driven
// by std::mt19937_64(seed) with rejection sampling, so it is the same on every
// platform. train gets round(train_fraction * N) images. Both halves keep the
// input order. Throws std::invalid_argument unless 0 < train_fraction < 1.
SplitResult split(const AnnotationSet& set, double train_fraction = 0.8,
                  std::uint64_t seed = 0);

}  // namespace obb
