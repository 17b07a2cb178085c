#include "scenegen/route.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace scenegen {

Route::Route(std::vector<Vec2> points) : points_(std::move(points)) {
  if (points_.size() < 2) {
    throw std::invalid_argument("route needs at least two waypoints");
  }
  cumulative_.push_back(0.0);
  for (size_t i = 1; i < points_.size(); ++i) {
    const double len = (points_[i] - points_[i - 1]).Norm();
    if (!(len > 1e-9)) throw std::invalid_argument("degenerate route segment");
    cumulative_.push_back(cumulative_.back() + len);
  }
}

int Route::SegmentAt(double s) const {
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), s);
  int i = static_cast<int>(it - cumulative_.begin()) - 1;
  return std::clamp(i, 0, static_cast<int>(points_.size()) - 2);
}

Vec2 Route::PointAt(double s) const {
  const int i = SegmentAt(s);
  const Vec2 a = points_[i];
  const Vec2 b = points_[i + 1];
  const double len = cumulative_[i + 1] - cumulative_[i];
  // Extrapolates linearly past either end.
  return a + (b - a) * ((s - cumulative_[i]) / len);
}

double Route::HeadingAt(double s) const {
  const int i = SegmentAt(s);
  const Vec2 d = points_[i + 1] - points_[i];
  return std::atan2(d.y, d.x);
}

double Route::CurvatureAt(double s, double window) const {
  const double a = std::max(0.0, s - 0.5 * window);
  const double b = std::min(Length(), s + 0.5 * window);
  if (b - a < 1e-9) return 0.0;
  return NormalizeAngle(HeadingAt(b) - HeadingAt(a)) / (b - a);
}

RouteProjection Route::Project(const Vec2& p) const {
  RouteProjection best;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i + 1 < points_.size(); ++i) {
    const Vec2 a = points_[i];
    const Vec2 ab = points_[i + 1] - a;
    const double len2 = ab.Dot(ab);
    double u = (p - a).Dot(ab) / len2;
    const bool first = i == 0;
    const bool last = i + 2 == points_.size();
    if (!first) u = std::max(u, 0.0);
    if (!last) u = std::min(u, 1.0);
    const Vec2 q = a + ab * u;
    const double d2 = (p - q).Dot(p - q);
    if (d2 < best_d2) {
      best_d2 = d2;
      const double len = std::sqrt(len2);
      const Vec2 rel = p - q;
      best.s = cumulative_[i] + u * len;
      best.heading = std::atan2(ab.y, ab.x);
      best.offset = (ab.x * rel.y - ab.y * rel.x) / len;
      best.point = q;
    }
  }
  return best;
}

std::vector<Vec2> ArcPolyline(const Vec2& center, double radius,
                              double start_angle, double end_angle,
                              double step) {
  const double sweep = end_angle - start_angle;
  const int n = std::max(
      1, static_cast<int>(std::ceil(std::abs(sweep) * radius / step - 1e-9)));
  std::vector<Vec2> pts;
  for (int k = 0; k <= n; ++k) {
    const double a = start_angle + sweep * k / n;
    pts.push_back({center.x + radius * std::cos(a),
                   center.y + radius * std::sin(a)});
  }
  return pts;
}

}  // namespace scenegen
