#ifndef SCENEGEN_GEOMETRY_H_
#define SCENEGEN_GEOMETRY_H_

#include <array>

namespace scenegen {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double k) const { return {x * k, y * k}; }
  double Dot(const Vec2& o) const { return x * o.x + y * o.y; }
  double Norm() const;
};

// Wraps an angle into (-pi, pi].
double NormalizeAngle(double angle);

// Rotates v by angle (counter-clockwise).
Vec2 Rotate(const Vec2& v, double angle);

// Pose and body-frame velocity of one vehicle. half_length / half_width are
// half-extents of the rectangular footprint.
struct KinematicState {
  double x = 0.0;
  double y = 0.0;
  double yaw = 0.0;
  double v_lon = 0.0;
  double v_lat = 0.0;
  double half_length = 2.4;
  double half_width = 1.0;

  Vec2 Position() const { return {x, y}; }
  Vec2 WorldVelocity() const;
  double Speed() const;
};

// Throws std::invalid_argument if extents are non-positive or any field is
// non-finite.
void ValidateState(const KinematicState& s);

// Adversary relative to the ego body frame. Closing speeds are positive when
// |d_a| is shrinking.
struct RelativeFrame {
  double d_x = 0.0;
  double d_y = 0.0;
  double delta_psi = 0.0;
  double s_x = 0.0;
  double s_y = 0.0;
  double clearance_x = 0.0;
  double clearance_y = 0.0;
  double dv_x = 0.0;
  double dv_y = 0.0;
  // Relative velocity (adversary minus ego) in ego axes.
  double rel_vx = 0.0;
  double rel_vy = 0.0;
};

// R(-yaw_ego) * (p_adv - p_ego).
Vec2 ToEgoFrame(const KinematicState& ego, const KinematicState& adv);

// Projected half-extent envelope of the two boxes along the ego axes.
Vec2 Envelope(const KinematicState& ego, const KinematicState& adv);

RelativeFrame MakeRelativeFrame(const KinematicState& ego,
                                const KinematicState& adv);

std::array<Vec2, 4> Corners(const KinematicState& s);

// Separating-axis test on the two oriented rectangles. Boxes that only touch
// along an edge do not overlap.
bool ObbOverlap(const KinematicState& a, const KinematicState& b);

}  // namespace scenegen

#endif  // SCENEGEN_GEOMETRY_H_
