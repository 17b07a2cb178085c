#include "scenegen/campaign.h"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

namespace scenegen {

Case1d SampleCase1d(uint64_t seed, const FeasibilityParams& params) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::uniform_int_distribution<int> kind(0, 2);
  Case1d c;
  const double gap = 0.2 + 39.8 * u01(rng);
  const double v_ego = 15.0 * u01(rng);
  const double v_adv = 15.0 * u01(rng);
  const int k = kind(rng);
  c.ego.v_lon = v_ego;
  const double center = gap + c.ego.half_length + c.adv.half_length;
  c.oracle.gap = gap;
  c.oracle.v_ego = v_ego;
  c.oracle.ego_brake = params.ego_lon_brake;
  c.oracle.adv_brake = params.npc_lon_brake;
  c.oracle.dt = params.dt;
  if (k == 0) {  // oncoming
    c.adv.x = center;
    c.adv.yaw = std::numbers::pi;
    c.adv.v_lon = v_adv;
    c.oracle.v_adv = -v_adv;
    c.oracle.adversary_ahead = true;
  } else if (k == 1) {  // leading
    c.adv.x = center;
    c.adv.v_lon = v_adv;
    c.oracle.v_adv = v_adv;
    c.oracle.adversary_ahead = true;
  } else {  // following
    c.adv.x = -center;
    c.adv.v_lon = v_adv;
    c.oracle.v_adv = v_adv;
    c.oracle.adversary_ahead = false;
  }
  return c;
}

double LongitudinalResidual(const FeasibilityReport& report) {
  return (report.d_limit_x - report.clearance_x) /
         std::max(report.d_limit_x, 1e-6);
}

Campaign1dResult RunCampaign1d(int cases, uint64_t seed,
                               const FeasibilityParams& params, double band) {
  Campaign1dResult r;
  std::mt19937_64 seeds(seed);
  for (int i = 0; i < cases; ++i) {
    const Case1d c = SampleCase1d(seeds(), params);
    ++r.cases;
    const FeasibilityReport rep = Sigma(c.ego, c.adv, params);
    const double residual = LongitudinalResidual(rep);
    if (std::abs(residual) < band) {
      ++r.band_excluded;
      continue;
    }
    const OracleResult o = BrakingOracle1d(c.oracle);
    if (!o.diagnostic.empty()) ++r.overflows;
    ++r.compared;
    const bool predicted_unavoidable = residual > 0.0;
    const bool unavoidable = o.verdict == Verdict::kUnavoidable;
    if (predicted_unavoidable == unavoidable) {
      ++r.agreements;
    } else if (predicted_unavoidable) {
      ++r.violations;
    } else {
      ++r.misses;
    }
  }
  return r;
}

void SampleState2d(uint64_t seed, KinematicState* ego, KinematicState* adv) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::uniform_real_distribution<double> pos(-30.0, 30.0);
  std::uniform_real_distribution<double> yaw(-std::numbers::pi, std::numbers::pi);
  std::uniform_real_distribution<double> speed(0.0, 15.0);
  std::normal_distribution<double> jitter(0.0, 1.5);
  const bool encounter = u01(rng) < 0.5;
  do {
    *ego = KinematicState{};
    *adv = KinematicState{};
    ego->v_lon = speed(rng);
    adv->yaw = yaw(rng);
    adv->v_lon = speed(rng);
    if (encounter) {
      // Both reach a common point after t_meet at their current velocities.
      const double t_meet = 0.3 + 2.7 * u01(rng);
      const Vec2 meet{ego->v_lon * t_meet + jitter(rng), jitter(rng)};
      const Vec2 start = meet - adv->WorldVelocity() * t_meet;
      adv->x = start.x;
      adv->y = start.y;
    } else {
      adv->x = pos(rng);
      adv->y = pos(rng);
    }
  } while (ObbOverlap(*ego, *adv) ||
           MakeRelativeFrame(*ego, *adv).clearance_x <= 0.0 ||
           MakeRelativeFrame(*ego, *adv).clearance_y <= 0.0);
}

Campaign2dResult RunCampaign2d(int cases, uint64_t seed,
                               const FeasibilityParams& params,
                               const ControlBounds& ego_bounds,
                               const EscapeOptions& options, double band) {
  Campaign2dResult r;
  std::mt19937_64 seeds(seed);
  for (int i = 0; i < cases; ++i) {
    KinematicState ego;
    KinematicState adv;
    SampleState2d(seeds(), &ego, &adv);
    ++r.cases;
    const double sigma = Sigma(ego, adv, params).sigma;
    const OracleResult o = EscapeOracle2d(ego, adv, ego_bounds, options);
    r.nodes += o.nodes;
    if (o.verdict == Verdict::kUnknown) {
      ++r.unknowns;
      continue;
    }
    if (std::abs(sigma) <= band) {
      ++r.band_excluded;
      continue;
    }
    const bool avoidable = o.verdict == Verdict::kAvoidable;
    if (sigma < 0.0) {
      ++r.predicted_unavoidable;
      if (avoidable) {
        ++r.counterexamples;
        std::ostringstream note;
        note << "sigma=" << sigma << " adv=(" << adv.x << ", " << adv.y
             << ", yaw " << adv.yaw << ", v " << adv.v_lon << ") ego v "
             << ego.v_lon;
        r.counterexample_notes.push_back(note.str());
      } else {
        ++r.confirmed;
      }
    } else {
      ++r.predicted_avoidable;
      if (avoidable) ++r.escapes_found;
    }
  }
  return r;
}

}  // namespace scenegen
