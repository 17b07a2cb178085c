#include "scenegen/geometry.h"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace scenegen {

double Vec2::Norm() const { return std::hypot(x, y); }

double NormalizeAngle(double angle) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  double a = std::fmod(angle, kTwoPi);
  if (a <= -std::numbers::pi) a += kTwoPi;
  if (a > std::numbers::pi) a -= kTwoPi;
  return a;
}

Vec2 Rotate(const Vec2& v, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {c * v.x - s * v.y, s * v.x + c * v.y};
}

Vec2 KinematicState::WorldVelocity() const {
  return Rotate({v_lon, v_lat}, yaw);
}

double KinematicState::Speed() const { return std::hypot(v_lon, v_lat); }

void ValidateState(const KinematicState& s) {
  for (double f : {s.x, s.y, s.yaw, s.v_lon, s.v_lat, s.half_length,
                   s.half_width}) {
    if (!std::isfinite(f)) throw std::invalid_argument("non-finite state");
  }
  if (s.half_length <= 0.0 || s.half_width <= 0.0) {
    throw std::invalid_argument("vehicle extents must be positive");
  }
}

Vec2 ToEgoFrame(const KinematicState& ego, const KinematicState& adv) {
  const double c = std::cos(ego.yaw);
  const double s = std::sin(ego.yaw);
  const double wx = adv.x - ego.x;
  const double wy = adv.y - ego.y;
  return {c * wx + s * wy, -s * wx + c * wy};
}

Vec2 Envelope(const KinematicState& ego, const KinematicState& adv) {
  const double dpsi = adv.yaw - ego.yaw;
  const double ac = std::abs(std::cos(dpsi));
  const double as = std::abs(std::sin(dpsi));
  return {ego.half_length + ac * adv.half_length + as * adv.half_width,
          ego.half_width + ac * adv.half_width + as * adv.half_length};
}

namespace {

// -d/dt |d| given d and its rate. At d == 0 the distance can only grow.
double ClosingSpeed(double d, double rate) {
  if (d > 0.0) return -rate;
  if (d < 0.0) return rate;
  return -std::abs(rate);
}

}  // namespace

RelativeFrame MakeRelativeFrame(const KinematicState& ego,
                                const KinematicState& adv) {
  RelativeFrame f;
  const Vec2 d = ToEgoFrame(ego, adv);
  const Vec2 s = Envelope(ego, adv);
  f.d_x = d.x;
  f.d_y = d.y;
  f.delta_psi = NormalizeAngle(adv.yaw - ego.yaw);
  f.s_x = s.x;
  f.s_y = s.y;
  f.clearance_x = std::abs(d.x) - s.x;
  f.clearance_y = std::abs(d.y) - s.y;
  const Vec2 rel = Rotate(adv.WorldVelocity() - ego.WorldVelocity(), -ego.yaw);
  f.rel_vx = rel.x;
  f.rel_vy = rel.y;
  f.dv_x = ClosingSpeed(d.x, rel.x);
  f.dv_y = ClosingSpeed(d.y, rel.y);
  return f;
}

std::array<Vec2, 4> Corners(const KinematicState& s) {
  const Vec2 c = s.Position();
  const Vec2 ax = Rotate({s.half_length, 0.0}, s.yaw);
  const Vec2 ay = Rotate({0.0, s.half_width}, s.yaw);
  return {c + ax + ay, c + ax - ay, c - ax - ay, c - ax + ay};
}

bool ObbOverlap(const KinematicState& a, const KinematicState& b) {
  const Vec2 d = b.Position() - a.Position();
  const Vec2 axes[4] = {Rotate({1.0, 0.0}, a.yaw), Rotate({0.0, 1.0}, a.yaw),
                        Rotate({1.0, 0.0}, b.yaw), Rotate({0.0, 1.0}, b.yaw)};
  const Vec2 a_ext[2] = {axes[0] * a.half_length, axes[1] * a.half_width};
  const Vec2 b_ext[2] = {axes[2] * b.half_length, axes[3] * b.half_width};
  for (const Vec2& axis : axes) {
    const double ra = std::abs(a_ext[0].Dot(axis)) + std::abs(a_ext[1].Dot(axis));
    const double rb = std::abs(b_ext[0].Dot(axis)) + std::abs(b_ext[1].Dot(axis));
    if (std::abs(d.Dot(axis)) >= ra + rb) return false;
  }
  return true;
}

}  // namespace scenegen
