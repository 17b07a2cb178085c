#include "scenegen/feasibility.h"

#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

namespace scenegen {
namespace {

constexpr double kPi = std::numbers::pi;

KinematicState Vehicle(double x, double y, double yaw, double v_lon,
                       double v_lat = 0.0) {
  KinematicState s;
  s.x = x;
  s.y = y;
  s.yaw = yaw;
  s.v_lon = v_lon;
  s.v_lat = v_lat;
  return s;
}

TEST(LimitLonOppositeTest, Examples) {
  EXPECT_DOUBLE_EQ(LimitLonOpposite({10, 10, 4, 4}), 25.0);
  EXPECT_DOUBLE_EQ(LimitLonOpposite({0, 0, 4, 4}), 0.0);
  EXPECT_DOUBLE_EQ(LimitLonOpposite({10, 0, 4, 4}), 12.5);
}

TEST(LimitLonSameTest, Examples) {
  EXPECT_DOUBLE_EQ(LimitLonSame({20, 10, 4, 2}), 25.0);
  EXPECT_DOUBLE_EQ(LimitLonSame({20, 18, 4, 2}), 1.0);
  EXPECT_DOUBLE_EQ(LimitLonSame({10, 10, 4, 2}), 0.0);
  EXPECT_DOUBLE_EQ(LimitLonSame({10, 10, 3, 3}), 0.0);
}

TEST(LimitLonSameTest, NeverNegativeAndStopTermOnlyWhenNotClosing) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> v(0, 25);
  std::uniform_real_distribution<double> a(0.5, 8);
  for (int i = 0; i < 5000; ++i) {
    const AxisPair p{v(rng), v(rng), a(rng), a(rng)};
    const double d = LimitLonSame(p);
    EXPECT_GE(d, 0.0);
    if (p.v_rear <= p.v_front && p.a_rear <= p.a_front) {
      const double stop = p.v_rear * p.v_rear / (2 * p.a_rear) -
                          p.v_front * p.v_front / (2 * p.a_front);
      EXPECT_DOUBLE_EQ(d, std::max(0.0, stop));
    }
  }
}

TEST(LimitLatTest, Examples) {
  EXPECT_DOUBLE_EQ(LimitLat({2, 2, 2, 2}, Direction::kSame), 0.0);
  EXPECT_DOUBLE_EQ(LimitLat({2, 2, 2, 2}, Direction::kOpposite), 2.0);
  EXPECT_DOUBLE_EQ(LimitLat({0, 3, 2, 2}, Direction::kSame), 0.0);
}

TEST(ConservativeRssTest, ReducesToPhysicsLimit) {
  FeasibilityParams p;
  p.reaction_time = 0.0;
  p.lon_min_brake = 4.0;
  EXPECT_DOUBLE_EQ(
      ConservativeRss({10, 10, 4, 4}, Axis::kLon, Direction::kOpposite, p),
      25.0);
}

TEST(ConservativeRssTest, SameDirectionWithReaction) {
  FeasibilityParams p;
  p.reaction_time = 1.0;
  p.lon_accel_max = 2.0;
  p.lon_min_brake = 2.0;
  EXPECT_DOUBLE_EQ(
      ConservativeRss({10, 0, 3, 4}, Axis::kLon, Direction::kSame, p), 47.0);
}

TEST(ConservativeRssTest, LateralBufferOnly) {
  FeasibilityParams p;
  p.reaction_time = 0.0;
  EXPECT_DOUBLE_EQ(
      ConservativeRss({0, 0, 2, 1.5}, Axis::kLat, Direction::kSame, p), 0.3);
}

TEST(ConservativeRssTest, LateralReactionFromRest) {
  // Both sides accelerate for rho = 0.5 s at 0.5 m/s^2 before braking at
  // 0.8 m/s^2: rear 0.0625 + 0.0390625, front 0.0625 - 0.0390625.
  FeasibilityParams p;
  EXPECT_DOUBLE_EQ(
      ConservativeRss({0, 0, 2, 1.5}, Axis::kLat, Direction::kSame, p),
      0.3 + 0.078125);
}

TEST(AxialTtcTest, DirectRatio) {
  FeasibilityParams p;
  RelativeFrame r;
  r.clearance_x = 10;
  r.dv_x = 5;
  r.clearance_y = 3;
  r.dv_y = -1;
  const TtcResult t = AxialTtc(r, p);
  EXPECT_DOUBLE_EQ(t.t_x, 2.0);
  EXPECT_DOUBLE_EQ(t.t_y, p.far_cap);
  EXPECT_DOUBLE_EQ(t.t, 2.0);
  EXPECT_EQ(t.colliding_axis, Axis::kLon);
}

TEST(AxialTtcTest, NothingClosing) {
  FeasibilityParams p;
  RelativeFrame r;
  r.clearance_x = 10;
  r.clearance_y = 10;
  const TtcResult t = AxialTtc(r, p);
  EXPECT_DOUBLE_EQ(t.t, 10000.0);
  EXPECT_EQ(t.colliding_axis, Axis::kNone);
}

TEST(AxialTtcTest, TouchingAndTies) {
  FeasibilityParams p;
  RelativeFrame r;
  r.clearance_x = 0;
  r.dv_x = 1;
  r.clearance_y = 4;
  r.dv_y = 1;
  EXPECT_DOUBLE_EQ(AxialTtc(r, p).t_x, 0.0);
  r.clearance_x = 4;
  EXPECT_EQ(AxialTtc(r, p).colliding_axis, Axis::kLon);
  r.clearance_x = 5;
  EXPECT_EQ(AxialTtc(r, p).colliding_axis, Axis::kLat);
}

TEST(AxialTtcTest, FloorOnTinyClosingSpeed) {
  FeasibilityParams p;
  RelativeFrame r;
  r.clearance_x = 0.5;
  r.dv_x = 1e-9;
  EXPECT_DOUBLE_EQ(AxialTtc(r, p).t_x, 0.5 / p.ttc_floor);
}

TEST(OrthogonalCompensationTest, Examples) {
  FeasibilityParams p;
  Compensation c = OrthogonalCompensation(2.0, Axis::kLon, 1.0, 2.0, p);
  EXPECT_DOUBLE_EQ(c.l_x, 0.0);
  EXPECT_DOUBLE_EQ(c.l_y, 4.0);
  c = OrthogonalCompensation(2.0, Axis::kLat, 1.0, 2.0, p);
  EXPECT_DOUBLE_EQ(c.l_x, 4.0);
  EXPECT_DOUBLE_EQ(c.l_y, 0.0);
  c = OrthogonalCompensation(2.0, Axis::kLon, -1.0, 2.0, p);
  EXPECT_DOUBLE_EQ(c.l_y, 0.0);
  c = OrthogonalCompensation(2.0, Axis::kNone, 1.0, 2.0, p);
  EXPECT_DOUBLE_EQ(c.l_x, 0.0);
  EXPECT_DOUBLE_EQ(c.l_y, 0.0);
}

TEST(SigmaTest, FarApartIsOne) {
  FeasibilityParams p;
  const FeasibilityReport r =
      Sigma(Vehicle(0, 0, 0, 10), Vehicle(500, 40, kPi, 10), p);
  EXPECT_DOUBLE_EQ(r.sigma, 1.0);
  EXPECT_DOUBLE_EQ(r.residual_x, 0.0);
  EXPECT_DOUBLE_EQ(r.residual_y, 0.0);
}

TEST(SigmaTest, HeadOnBelowLimitIsNegative) {
  FeasibilityParams p;
  p.ego_lon_brake = 4.0;
  // Edge gap 20 m, both at 10 m/s, limit 25 m: residual 0.2 on x.
  const FeasibilityReport r =
      Sigma(Vehicle(0, 0, 0, 10), Vehicle(24.8, 0, kPi, 10), p);
  EXPECT_NEAR(r.d_limit_x, 25.0, 1e-9);
  EXPECT_NEAR(r.clearance_x, 20.0, 1e-9);
  EXPECT_NEAR(r.residual_x, 0.2, 1e-9);
  EXPECT_NEAR(r.sigma, 0.8, 1e-9);
  EXPECT_EQ(r.direction_x, Direction::kOpposite);
  EXPECT_EQ(r.colliding_axis, Axis::kLon);
  EXPECT_DOUBLE_EQ(r.l_x, 0.0);
}

TEST(SigmaTest, OneAxisFullyViolated) {
  FeasibilityParams p;
  // Touching head-on, lateral safe: residual_x = 1, sigma = 0.
  const FeasibilityReport r =
      Sigma(Vehicle(0, 0, 0, 10), Vehicle(4.8, 0, kPi, 10), p);
  EXPECT_NEAR(r.residual_x, 1.0, 1e-12);
  EXPECT_DOUBLE_EQ(r.residual_y, 0.0);
  EXPECT_NEAR(r.sigma, 0.0, 1e-12);
}

TEST(SigmaTest, BothAxesFullyViolated) {
  FeasibilityParams p;
  // Overlapping boxes closing on both axes.
  KinematicState ego = Vehicle(0, 0, 0, 5, 1);
  KinematicState adv = Vehicle(2, 0.5, kPi, 5, 1);
  const FeasibilityReport r = Sigma(ego, adv, p);
  EXPECT_NEAR(r.residual_x, 1.0, 1e-12);
  EXPECT_NEAR(r.residual_y, 1.0, 1e-12);
  EXPECT_NEAR(r.sigma, 1.0 - std::sqrt(2.0), 1e-12);
}

TEST(SigmaTest, StationaryAxesCannotBeViolated) {
  FeasibilityParams p;
  const FeasibilityReport r =
      Sigma(Vehicle(0, 0, 0, 0), Vehicle(3, 0, 0, 0), p);
  EXPECT_DOUBLE_EQ(r.d_limit_x, 0.0);
  EXPECT_DOUBLE_EQ(r.sigma, 1.0);
}

TEST(SigmaTest, RecedingBothAxesIsOne) {
  FeasibilityParams p;
  const FeasibilityReport r =
      Sigma(Vehicle(0, 0, 0, 5), Vehicle(-20, -5, kPi, 5), p);
  EXPECT_DOUBLE_EQ(r.sigma, 1.0);
  EXPECT_EQ(r.colliding_axis, Axis::kNone);
}

TEST(SigmaTest, ResidualsBoundSigma) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> pos(-30, 30);
  std::uniform_real_distribution<double> ang(-kPi, kPi);
  std::uniform_real_distribution<double> spd(0, 15);
  FeasibilityParams p;
  for (int i = 0; i < 5000; ++i) {
    const FeasibilityReport r =
        Sigma(Vehicle(0, 0, ang(rng), spd(rng)),
              Vehicle(pos(rng), pos(rng), ang(rng), spd(rng)), p);
    EXPECT_LE(r.sigma, 1.0);
    EXPECT_GE(r.sigma, 1.0 - std::sqrt(2.0) - 1e-12);
    EXPECT_EQ(r.sigma == 1.0, r.residual_x == 0.0 && r.residual_y == 0.0);
    if (r.colliding_axis == Axis::kLon) {
      EXPECT_DOUBLE_EQ(r.l_x, 0.0);
    }
    if (r.colliding_axis == Axis::kLat) {
      EXPECT_DOUBLE_EQ(r.l_y, 0.0);
    }
  }
}

// Moving the adversary outward along one axis grows that clearance and
// leaves the approach geometry and speeds fixed.
TEST(SigmaTest, MonotoneInClearance) {
  std::mt19937_64 rng(22);
  std::uniform_real_distribution<double> pos(-25, 25);
  std::uniform_real_distribution<double> ang(-kPi, kPi);
  std::uniform_real_distribution<double> spd(0, 15);
  std::uniform_real_distribution<double> step(0.0, 3.0);
  FeasibilityParams p;
  for (int i = 0; i < 3000; ++i) {
    const KinematicState ego = Vehicle(0, 0, 0, spd(rng), 0.0);
    KinematicState adv = Vehicle(pos(rng), pos(rng), ang(rng), spd(rng));
    const FeasibilityReport base = Sigma(ego, adv, p);
    KinematicState moved = adv;
    const bool along_x = i % 2 == 0;
    const double dd = step(rng);
    if (along_x) {
      moved.x += (adv.x >= 0 ? 1.0 : -1.0) * dd;
    } else {
      moved.y += (adv.y >= 0 ? 1.0 : -1.0) * dd;
    }
    const FeasibilityReport r = Sigma(ego, moved, p);
    // Only compare when the TTC structure, and so the compensation, is
    // unchanged in kind: the residual on the moved axis must not grow.
    if (along_x) {
      if (r.l_x == base.l_x) {
        EXPECT_LE(r.residual_x, base.residual_x + 1e-12);
      }
    } else {
      if (r.l_y == base.l_y) {
        EXPECT_LE(r.residual_y, base.residual_y + 1e-12);
      }
    }
  }
}

TEST(SigmaTest, ConservativeNeverAbovePhysicsLimit) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> pos(-30, 30);
  std::uniform_real_distribution<double> ang(-kPi, kPi);
  std::uniform_real_distribution<double> spd(0, 15);
  FeasibilityParams p;
  for (int i = 0; i < 5000; ++i) {
    const KinematicState ego = Vehicle(0, 0, ang(rng), spd(rng));
    const KinematicState adv = Vehicle(pos(rng), pos(rng), ang(rng), spd(rng));
    const double phys = Sigma(ego, adv, p, FeasibilityMode::kPhysicsLimit).sigma;
    const double cons =
        Sigma(ego, adv, p, FeasibilityMode::kConservativeRss).sigma;
    EXPECT_LE(cons, phys + 1e-12);
  }
}

TEST(SigmaTest, DirectionClassification) {
  FeasibilityParams p;
  EXPECT_TRUE(Sigma(Vehicle(0, 0, 0, 5), Vehicle(20, 0, 0.4, 5), p)
                  .parallel_headings);
  EXPECT_TRUE(Sigma(Vehicle(0, 0, 0, 5), Vehicle(20, 0, kPi - 0.4, 5), p)
                  .parallel_headings);
  EXPECT_FALSE(Sigma(Vehicle(0, 0, 0, 5), Vehicle(20, 0, kPi / 2, 5), p)
                   .parallel_headings);
}

TEST(FeasibilityParamsTest, Validation) {
  FeasibilityParams p;
  EXPECT_NO_THROW(p.Validate());
  p.p_norm = 0;
  EXPECT_THROW(p.Validate(), std::invalid_argument);
  p = FeasibilityParams{};
  p.ego_lon_brake = 0.0;
  EXPECT_THROW(p.Validate(), std::invalid_argument);
  EXPECT_EQ(ParseFeasibilityMode("conservative_rss"),
            FeasibilityMode::kConservativeRss);
  EXPECT_THROW(ParseFeasibilityMode("bogus"), std::invalid_argument);
}

}  // namespace
}  // namespace scenegen
