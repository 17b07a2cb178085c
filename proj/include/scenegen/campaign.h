#ifndef SCENEGEN_CAMPAIGN_H_
#define SCENEGEN_CAMPAIGN_H_

#include <cstdint>
#include <string>
#include <vector>

#include "scenegen/feasibility.h"
#include "scenegen/microsim.h"
#include "scenegen/oracle.h"

namespace scenegen {

// Randomized longitudinal encounters checked against BrakingOracle1d.
struct Campaign1dResult {
  int cases = 0;
  int band_excluded = 0;
  int compared = 0;
  int agreements = 0;
  // Sigma says unavoidable, the oracle finds an escape.
  int violations = 0;
  // Sigma says avoidable, the oracle finds none.
  int misses = 0;
  int overflows = 0;

  double MatchRate() const {
    return compared == 0 ? 1.0 : static_cast<double>(agreements) / compared;
  }
};

struct Case1d {
  KinematicState ego;
  KinematicState adv;
  Braking1d oracle;
};

// Ego at the origin heading +x; the adversary sits on the ego's axis ahead
// (oncoming or same direction) or behind (same direction).
Case1d SampleCase1d(uint64_t seed, const FeasibilityParams& params);

// d_limit_x - clearance_x from Sigma, divided by max(d_limit_x, 1e-6).
double LongitudinalResidual(const FeasibilityReport& report);

Campaign1dResult RunCampaign1d(int cases, uint64_t seed,
                               const FeasibilityParams& params,
                               double band = 0.05);

struct Campaign2dResult {
  int cases = 0;
  int unknowns = 0;
  int band_excluded = 0;  // |sigma| <= band
  int predicted_unavoidable = 0;  // sigma < -band, oracle known
  int confirmed = 0;
  int counterexamples = 0;
  int predicted_avoidable = 0;  // sigma > band, oracle known
  int escapes_found = 0;
  int64_t nodes = 0;
  std::vector<std::string> counterexample_notes;

  double UnknownRate() const {
    return cases == 0 ? 0.0 : static_cast<double>(unknowns) / cases;
  }
  int Agreements() const { return confirmed + escapes_found; }
  int Compared() const { return predicted_unavoidable + predicted_avoidable; }
};

// Two boxes that do not overlap. Half the draws are uniform over a 60 m square
// around the ego; the other half put both vehicles on a collision course that
// meets within 0.3 to 3 s, with some positional jitter.
void SampleState2d(uint64_t seed, KinematicState* ego, KinematicState* adv);

Campaign2dResult RunCampaign2d(int cases, uint64_t seed,
                               const FeasibilityParams& params,
                               const ControlBounds& ego_bounds,
                               const EscapeOptions& options,
                               double band = 0.05);

}  // namespace scenegen

#endif  // SCENEGEN_CAMPAIGN_H_
