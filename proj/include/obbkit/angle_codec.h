#pragma once

#include <optional>
#include <string_view>

namespace obb {

inline constexpr int kNumAngleClasses = 8;
inline constexpr double kAngleClassWidthDeg = 22.5;

// Two 8-bin partitions of the half circle, both 22.5 degrees wide:
//   kDataset: bins start at -11.25 + 22.5 i (dataset statistics).
//   kModel:   bins start at -10 + 22.5 i (labels fed to the detector head).
// Bin indices are 0-based in both schemes and are not comparable across them.
enum class AngleScheme { kDataset, kModel };

std::string_view to_string(AngleScheme scheme);
// Accepts "model" and "dataset".
std::optional<AngleScheme> parse_angle_scheme(std::string_view name);

// Inclusive lower edge of bin `index`, in degrees (may be negative).
double bin_lower_edge(AngleScheme scheme, int index);

class AngleClass {
 public:
  // Throws std::invalid_argument unless 0 <= index < 8.
  AngleClass(AngleScheme scheme, int index);

  AngleScheme scheme() const noexcept { return scheme_; }
  int index() const noexcept { return index_; }

  friend bool operator==(const AngleClass&, const AngleClass&) = default;

 private:
  AngleScheme scheme_;
  int index_;
};

// theta mod 180 in [0, 180). Throws std::invalid_argument for NaN/Inf.
double wrap_angle(double theta_deg);

// Half-open bins, lower edge inclusive. The arc left over above the last bin
// wraps into bin 0 (175 deg == -5 deg).
AngleClass bin_angle(double theta_deg, AngleScheme scheme);

// Angle substituted for a bin when rebuilding a rotated box: index * 22.5.
double representative_angle(const AngleClass& c);

// wrap_angle(theta) / 180, in [0, 1).
double encode_angle_regression(double theta_deg);

struct DecodedAngle {
  double degrees = 0.0;
  // Set when the input was outside [0, 1) and had to be wrapped mod 1.
  bool wrapped = false;
};

DecodedAngle decode_angle_regression(double t);

}  // namespace obb
