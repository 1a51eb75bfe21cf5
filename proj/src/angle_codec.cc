#include "obbkit/angle_codec.h"

#include <cmath>
#include <stdexcept>

namespace obb {
namespace {

double first_edge(AngleScheme scheme) {
  return scheme == AngleScheme::kModel ? -10.0 : -11.25;
}

}  // namespace

std::string_view to_string(AngleScheme scheme) {
  return scheme == AngleScheme::kModel ? "model" : "dataset";
}

std::optional<AngleScheme> parse_angle_scheme(std::string_view name) {
  if (name == "model") return AngleScheme::kModel;
  if (name == "dataset") return AngleScheme::kDataset;
  return std::nullopt;
}

double bin_lower_edge(AngleScheme scheme, int index) {
  if (index < 0 || index >= kNumAngleClasses) {
    throw std::invalid_argument("angle class index out of range");
  }
  return first_edge(scheme) + kAngleClassWidthDeg * index;
}

AngleClass::AngleClass(AngleScheme scheme, int index)
    : scheme_(scheme), index_(index) {
  if (index < 0 || index >= kNumAngleClasses) {
    throw std::invalid_argument("angle class index must be in [0, 8)");
  }
}

double wrap_angle(double theta_deg) {
  if (!std::isfinite(theta_deg)) {
    throw std::invalid_argument("wrap_angle: non-finite angle");
  }
  double r = std::fmod(theta_deg, 180.0);
  if (r < 0.0) r += 180.0;
  // -tiny + 180 rounds to 180.
  if (r >= 180.0) r = 0.0;
  return r;
}

AngleClass bin_angle(double theta_deg, AngleScheme scheme) {
  // Shift so that bin 0 starts at zero, then every bin is [22.5 i, 22.5 (i+1)).
  const double shifted = wrap_angle(wrap_angle(theta_deg) - first_edge(scheme));
  int index = static_cast<int>(std::floor(shifted / kAngleClassWidthDeg));
  if (index >= kNumAngleClasses) index = kNumAngleClasses - 1;
  return AngleClass(scheme, index);
}

double representative_angle(const AngleClass& c) {
  return c.index() * kAngleClassWidthDeg;
}

double encode_angle_regression(double theta_deg) {
  const double t = wrap_angle(theta_deg) / 180.0;
  return t < 1.0 ? t : std::nextafter(1.0, 0.0);
}

DecodedAngle decode_angle_regression(double t) {
  if (!std::isfinite(t)) {
    throw std::invalid_argument("decode_angle_regression: non-finite value");
  }
  DecodedAngle out;
  if (t < 0.0 || t >= 1.0) {
    t -= std::floor(t);
    if (t >= 1.0) t = 0.0;
    out.wrapped = true;
  }
  out.degrees = t * 180.0;
  return out;
}

}  // namespace obb
