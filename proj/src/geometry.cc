#include "obbkit/geometry.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <tuple>
#include <utility>

#include "obbkit/angle_codec.h"

namespace obb {
namespace {

constexpr double kMergeDistance = 1e-9;

// Exact values at multiples of 90 degrees so axis-aligned boxes stay exact.
void sincos_deg(double deg, double* s, double* c) {
  double r = std::fmod(deg, 360.0);
  if (r < 0.0) r += 360.0;
  if (r == 0.0) {
    *s = 0.0;
    *c = 1.0;
  } else if (r == 90.0) {
    *s = 1.0;
    *c = 0.0;
  } else if (r == 180.0) {
    *s = 0.0;
    *c = -1.0;
  } else if (r == 270.0) {
    *s = -1.0;
    *c = 0.0;
  } else {
    const double rad = r * std::numbers::pi / 180.0;
    *s = std::sin(rad);
    *c = std::cos(rad);
  }
}

double cross(Point2D o, Point2D a, Point2D b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

// Twice the signed area; positive means counterclockwise in a y-up frame.
template <typename Range>
double shoelace(const Range& pts) {
  const std::size_t n = std::size(pts);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Point2D& p = pts[i];
    const Point2D& q = pts[(i + 1) % n];
    sum += p.x * q.y - q.x * p.y;
  }
  return sum;
}

bool is_axis_aligned(const OrientedBox& b) {
  return b.theta() == 0.0 || b.theta() == 90.0;
}

bool nearly_same_quad(const QuadPolygon& a, const QuadPolygon& b) {
  double scale = 1.0;
  for (const auto& p : a.vertices()) {
    scale = std::max({scale, std::abs(p.x), std::abs(p.y)});
  }
  const double tol = 1e-9 * scale;
  for (std::size_t i = 0; i < 4; ++i) {
    if (std::abs(a.vertices()[i].x - b.vertices()[i].x) > tol ||
        std::abs(a.vertices()[i].y - b.vertices()[i].y) > tol) {
      return false;
    }
  }
  return true;
}

}  // namespace

OrientedBox::OrientedBox(double cx, double cy, double w, double h,
                         double theta_deg) {
  if (!std::isfinite(cx) || !std::isfinite(cy) || !std::isfinite(w) ||
      !std::isfinite(h) || !std::isfinite(theta_deg)) {
    throw std::invalid_argument("OrientedBox: non-finite field");
  }
  if (w <= 0.0 || h <= 0.0) {
    throw std::invalid_argument("OrientedBox: width and height must be > 0");
  }
  cx_ = cx;
  cy_ = cy;
  w_ = w;
  h_ = h;
  theta_ = wrap_angle(theta_deg);
}

HorizontalBox::HorizontalBox(double xmin, double ymin, double xmax,
                             double ymax)
    : xmin_(xmin), ymin_(ymin), xmax_(xmax), ymax_(ymax) {
  if (!std::isfinite(xmin) || !std::isfinite(ymin) || !std::isfinite(xmax) ||
      !std::isfinite(ymax)) {
    throw std::invalid_argument("HorizontalBox: non-finite coordinate");
  }
  if (!(xmin < xmax) || !(ymin < ymax)) {
    throw std::invalid_argument("HorizontalBox: requires xmin < xmax and ymin < ymax");
  }
}

HorizontalBox HorizontalBox::from_center(double cx, double cy, double w,
                                         double h) {
  return HorizontalBox(cx - w / 2.0, cy - h / 2.0, cx + w / 2.0, cy + h / 2.0);
}

QuadPolygon QuadPolygon::from_vertices(const std::array<Point2D, 4>& vertices) {
  for (const auto& p : vertices) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
      throw std::invalid_argument("QuadPolygon: non-finite vertex");
    }
  }
  std::array<Point2D, 4> v = vertices;
  const double twice_area = shoelace(v);
  if (twice_area == 0.0) {
    throw std::invalid_argument("QuadPolygon: zero area");
  }
  for (std::size_t i = 0; i < 4; ++i) {
    const double turn = cross(v[i], v[(i + 1) % 4], v[(i + 2) % 4]);
    if (turn == 0.0 || (turn > 0.0) != (twice_area > 0.0)) {
      throw std::invalid_argument("QuadPolygon: vertices are not strictly convex");
    }
  }
  if (twice_area > 0.0) std::reverse(v.begin(), v.end());
  const auto first = std::min_element(
      v.begin(), v.end(), [](const Point2D& a, const Point2D& b) {
        return std::tie(a.y, a.x) < std::tie(b.y, b.x);
      });
  std::rotate(v.begin(), first, v.end());
  return QuadPolygon(v);
}

double QuadPolygon::area() const noexcept {
  return std::abs(shoelace(vertices_)) / 2.0;
}

Point2D rotate_point(Point2D p, Point2D center, double theta_deg) {
  double s = 0.0;
  double c = 1.0;
  sincos_deg(theta_deg, &s, &c);
  const double a = p.x - center.x;
  const double b = p.y - center.y;
  return {a * c - b * s + center.x, b * c + a * s + center.y};
}

QuadPolygon corners(const OrientedBox& b) {
  double s = 0.0;
  double c = 1.0;
  sincos_deg(b.theta(), &s, &c);
  const double hw = b.w() / 2.0;
  const double hh = b.h() / 2.0;
  const std::array<Point2D, 4> offsets = {
      Point2D{-hw, -hh}, Point2D{hw, -hh}, Point2D{hw, hh}, Point2D{-hw, hh}};
  std::array<Point2D, 4> pts;
  for (std::size_t i = 0; i < 4; ++i) {
    const double a = offsets[i].x;
    const double bb = offsets[i].y;
    pts[i] = {b.cx() + (a * c - bb * s), b.cy() + (bb * c + a * s)};
  }
  return QuadPolygon::from_vertices(pts);
}

HorizontalBox envelope(const OrientedBox& b) {
  const QuadPolygon q = corners(b);
  const auto& v = q.vertices();
  double xmin = v[0].x, xmax = v[0].x, ymin = v[0].y, ymax = v[0].y;
  for (const auto& p : v) {
    xmin = std::min(xmin, p.x);
    xmax = std::max(xmax, p.x);
    ymin = std::min(ymin, p.y);
    ymax = std::max(ymax, p.y);
  }
  return HorizontalBox(xmin, ymin, xmax, ymax);
}

std::vector<Point2D> convex_intersect(const QuadPolygon& a,
                                      const QuadPolygon& b) {
  const auto& clip = b.vertices();
  const double orient = shoelace(clip) < 0.0 ? -1.0 : 1.0;

  std::vector<Point2D> out(a.vertices().begin(), a.vertices().end());
  std::vector<Point2D> in;
  for (std::size_t e = 0; e < 4 && !out.empty(); ++e) {
    const Point2D p = clip[e];
    const Point2D q = clip[(e + 1) % 4];
    in.swap(out);
    out.clear();
    const std::size_t n = in.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Point2D cur = in[i];
      const Point2D prev = in[(i + n - 1) % n];
      const double dc = orient * cross(p, q, cur);
      const double dp = orient * cross(p, q, prev);
      const bool cur_in = dc >= 0.0;
      const bool prev_in = dp >= 0.0;
      if (cur_in != prev_in) {
        const double t = dp / (dp - dc);
        out.push_back({prev.x + (cur.x - prev.x) * t,
                       prev.y + (cur.y - prev.y) * t});
      }
      if (cur_in) out.push_back(cur);
    }
  }

  std::vector<Point2D> merged;
  merged.reserve(out.size());
  for (const auto& p : out) {
    if (merged.empty() || std::hypot(p.x - merged.back().x,
                                     p.y - merged.back().y) > kMergeDistance) {
      merged.push_back(p);
    }
  }
  while (merged.size() > 1 &&
         std::hypot(merged.front().x - merged.back().x,
                    merged.front().y - merged.back().y) <= kMergeDistance) {
    merged.pop_back();
  }
  if (merged.size() < 3) return {};
  // Slivers left over from touching edges carry no interior.
  if (polygon_area(merged) <= 1e-12 * std::min(a.area(), b.area())) return {};
  return merged;
}

double polygon_area(std::span<const Point2D> poly) {
  if (poly.size() < 3) return 0.0;
  return std::abs(shoelace(poly)) / 2.0;
}

double rotated_iou(const OrientedBox& a, const OrientedBox& b) {
  if (a == b) return 1.0;
  if (is_axis_aligned(a) && is_axis_aligned(b)) {
    return horizontal_iou(envelope(a), envelope(b));
  }
  // Fixed argument order makes the result bitwise symmetric.
  const auto key = [](const OrientedBox& x) {
    return std::make_tuple(x.cx(), x.cy(), x.w(), x.h(), x.theta());
  };
  const OrientedBox& first = key(a) < key(b) ? a : b;
  const OrientedBox& second = key(a) < key(b) ? b : a;

  const QuadPolygon qa = corners(first);
  const QuadPolygon qb = corners(second);
  if (nearly_same_quad(qa, qb)) return 1.0;
  const double inter = polygon_area(convex_intersect(qa, qb));
  if (inter <= 0.0) return 0.0;
  const double uni = first.area() + second.area() - inter;
  return std::clamp(inter / uni, 0.0, 1.0);
}

double horizontal_iou(const HorizontalBox& a, const HorizontalBox& b) {
  const double iw = std::min(a.xmax(), b.xmax()) - std::max(a.xmin(), b.xmin());
  const double ih = std::min(a.ymax(), b.ymax()) - std::max(a.ymin(), b.ymin());
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  const double uni = a.area() + b.area() - inter;
  return std::clamp(inter / uni, 0.0, 1.0);
}

}  // namespace obb
