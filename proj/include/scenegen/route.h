#ifndef SCENEGEN_ROUTE_H_
#define SCENEGEN_ROUTE_H_

#include <vector>

#include "scenegen/geometry.h"

namespace scenegen {

struct RouteProjection {
  double s = 0.0;        // arc length of the closest point
  double offset = 0.0;   // signed lateral offset, left of the route positive
  double heading = 0.0;  // route tangent heading at s
  Vec2 point;
};

// Piecewise-linear path with arc-length parameterization.
class Route {
 public:
  Route() = default;
  // Throws std::invalid_argument for fewer than two points or zero-length
  // segments.
  explicit Route(std::vector<Vec2> points);

  double Length() const { return cumulative_.back(); }
  const std::vector<Vec2>& points() const { return points_; }

  Vec2 PointAt(double s) const;
  double HeadingAt(double s) const;
  // Curvature from the heading change over a centered window.
  double CurvatureAt(double s, double window = 2.0) const;
  RouteProjection Project(const Vec2& p) const;

 private:
  int SegmentAt(double s) const;

  std::vector<Vec2> points_;
  std::vector<double> cumulative_;
};

// Points on a circular arc from start_angle to end_angle (radians), spaced at
// most `step` meters apart.
std::vector<Vec2> ArcPolyline(const Vec2& center, double radius,
                              double start_angle, double end_angle,
                              double step);

}  // namespace scenegen

#endif  // SCENEGEN_ROUTE_H_
