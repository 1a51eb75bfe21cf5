#pragma once

#include <array>
#include <span>
#include <vector>

namespace obb {

// Image coordinates: x grows to the right, y grows downward. Angles are in
// degrees; a positive angle rotates (1, 0) towards (0, 1), which appears
// clockwise on screen.

struct Point2D {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2D&, const Point2D&) = default;
};

// Center/size/angle rectangle as stored by roLabelImg.
// Invariants: all fields finite, w > 0, h > 0, 0 <= theta < 180.
class OrientedBox {
 public:
  // Throws std::invalid_argument on non-finite values or non-positive size.
  // theta is wrapped into [0, 180); theta and theta + 180 describe the same
  // rectangle.
  OrientedBox(double cx, double cy, double w, double h, double theta_deg);

  double cx() const noexcept { return cx_; }
  double cy() const noexcept { return cy_; }
  double w() const noexcept { return w_; }
  double h() const noexcept { return h_; }
  double theta() const noexcept { return theta_; }
  Point2D center() const noexcept { return {cx_, cy_}; }
  double area() const noexcept { return w_ * h_; }

  friend bool operator==(const OrientedBox&, const OrientedBox&) = default;

 private:
  double cx_;
  double cy_;
  double w_;
  double h_;
  double theta_;
};

// Axis-aligned rectangle. Invariants: finite, xmin < xmax, ymin < ymax.
class HorizontalBox {
 public:
  // Throws std::invalid_argument when the invariants do not hold.
  HorizontalBox(double xmin, double ymin, double xmax, double ymax);

  static HorizontalBox from_center(double cx, double cy, double w, double h);

  double xmin() const noexcept { return xmin_; }
  double ymin() const noexcept { return ymin_; }
  double xmax() const noexcept { return xmax_; }
  double ymax() const noexcept { return ymax_; }
  double width() const noexcept { return xmax_ - xmin_; }
  double height() const noexcept { return ymax_ - ymin_; }
  Point2D center() const noexcept {
    return {(xmin_ + xmax_) / 2.0, (ymin_ + ymax_) / 2.0};
  }
  double area() const noexcept { return width() * height(); }

  friend bool operator==(const HorizontalBox&, const HorizontalBox&) = default;

 private:
  double xmin_;
  double ymin_;
  double xmax_;
  double ymax_;
};

// Convex quadrilateral with nonzero area. Vertices run counterclockwise as
// seen on screen (negative shoelace sum in raw y-down coordinates) and start
// at the vertex with the smallest (y, x).
class QuadPolygon {
 public:
  // Reorders the vertices canonically. Throws std::invalid_argument if they
  // are not finite or do not form a convex quadrilateral with nonzero area.
  static QuadPolygon from_vertices(const std::array<Point2D, 4>& vertices);

  const std::array<Point2D, 4>& vertices() const noexcept { return vertices_; }
  double area() const noexcept;

  friend bool operator==(const QuadPolygon&, const QuadPolygon&) = default;

 private:
  explicit QuadPolygon(const std::array<Point2D, 4>& v) : vertices_(v) {}
  std::array<Point2D, 4> vertices_;
};

// a' = a cos(theta) - b sin(theta), b' = b cos(theta) + a sin(theta), applied
// to p - center and translated back.
Point2D rotate_point(Point2D p, Point2D center, double theta_deg);

QuadPolygon corners(const OrientedBox& b);

// Tightest horizontal box containing all four corners.
HorizontalBox envelope(const OrientedBox& b);

// Clips `a` against every edge of `b` (Sutherland-Hodgman). The result keeps
// the winding of `a`; it is empty when the interiors do not overlap.
std::vector<Point2D> convex_intersect(const QuadPolygon& a, const QuadPolygon& b);

// Shoelace area, always >= 0. Fewer than three vertices give 0.
double polygon_area(std::span<const Point2D> poly);

double rotated_iou(const OrientedBox& a, const OrientedBox& b);
double horizontal_iou(const HorizontalBox& a, const HorizontalBox& b);

}  // namespace obb
