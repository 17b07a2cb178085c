#ifndef SCENEGEN_SCHEDULE_H_
#define SCENEGEN_SCHEDULE_H_

#include <cstdint>
#include <vector>

namespace scenegen {

struct ScheduleParams {
  int levels = 8;
  double eps_max = 0.35;
  double u_min = -3.0;
  double u_max = 0.0;
  int switch_every = 100;

  void Validate() const;
};

double NormalCdf(double x);

// Threshold levels from the truncated standard-normal CDF, evenly spaced on
// [u_min, u_max] and rescaled to [0, eps_max].
std::vector<double> EpsilonLevels(int n, double eps_max, double u_min,
                                  double u_max);

struct ActiveLevel {
  double epsilon = 0.0;
  int level = 1;  // 1-based
};

// Cyclic sweep over the levels, switching every switch_every episodes.
class EpsSchedule {
 public:
  EpsSchedule() : EpsSchedule(ScheduleParams{}) {}
  explicit EpsSchedule(const ScheduleParams& params);

  ActiveLevel Active(int64_t episode) const;
  // True if `episode` starts a new block (and episode > 0).
  bool SwitchesAt(int64_t episode) const;

  const std::vector<double>& levels() const { return levels_; }
  const ScheduleParams& params() const { return params_; }

 private:
  ScheduleParams params_;
  std::vector<double> levels_;
};

}  // namespace scenegen

#endif  // SCENEGEN_SCHEDULE_H_
