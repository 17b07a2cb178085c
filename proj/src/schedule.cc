#include "scenegen/schedule.h"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace scenegen {

void ScheduleParams::Validate() const {
  if (levels < 2) throw std::invalid_argument("schedule.levels must be >= 2");
  if (!(eps_max > 0.0)) {
    throw std::invalid_argument("schedule.eps_max must be positive");
  }
  if (!(u_min < u_max)) {
    throw std::invalid_argument("schedule.u_min must be < schedule.u_max");
  }
  if (switch_every <= 0) {
    throw std::invalid_argument("schedule.switch_every must be positive");
  }
}

double NormalCdf(double x) {
  return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

std::vector<double> EpsilonLevels(int n, double eps_max, double u_min,
                                  double u_max) {
  ScheduleParams p;
  p.levels = n;
  p.eps_max = eps_max;
  p.u_min = u_min;
  p.u_max = u_max;
  p.Validate();
  const double f_min = NormalCdf(u_min);
  const double span = NormalCdf(u_max) - f_min;
  std::vector<double> eps(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double u = u_min + (u_max - u_min) * i / (n - 1);
    eps[static_cast<size_t>(i)] = eps_max * (NormalCdf(u) - f_min) / span;
  }
  // Pin the endpoints against rounding.
  eps.front() = 0.0;
  eps.back() = eps_max;
  return eps;
}

EpsSchedule::EpsSchedule(const ScheduleParams& params)
    : params_(params),
      levels_(EpsilonLevels(params.levels, params.eps_max, params.u_min,
                            params.u_max)) {}

ActiveLevel EpsSchedule::Active(int64_t episode) const {
  if (episode < 0) episode = 0;
  const int64_t block = episode / params_.switch_every;
  const int idx = static_cast<int>(block % params_.levels);
  return {levels_[static_cast<size_t>(idx)], idx + 1};
}

bool EpsSchedule::SwitchesAt(int64_t episode) const {
  return episode > 0 && episode % params_.switch_every == 0;
}

}  // namespace scenegen
