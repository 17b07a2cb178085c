#include "scenegen/schedule.h"

#include <cmath>

#include <gtest/gtest.h>

namespace scenegen {
namespace {

// Independent normal CDF via a Simpson integration of the density.
double CdfOracle(double x) {
  const int n = 20000;
  const double lo = -12.0;
  const double h = (x - lo) / n;
  auto f = [](double t) {
    return std::exp(-0.5 * t * t) / std::sqrt(2.0 * std::numbers::pi);
  };
  double s = f(lo) + f(x);
  for (int i = 1; i < n; ++i) s += f(lo + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
  return s * h / 3.0;
}

TEST(NormalCdfTest, MatchesQuadrature) {
  for (double x : {-3.0, -1.5, -0.2, 0.0, 0.7, 2.5}) {
    EXPECT_NEAR(NormalCdf(x), CdfOracle(x), 1e-12) << x;
  }
}

TEST(EpsilonLevelsTest, EndpointsAndThreeLevelExample) {
  const std::vector<double> three = EpsilonLevels(3, 0.35, -3.0, 0.0);
  ASSERT_EQ(three.size(), 3u);
  EXPECT_DOUBLE_EQ(three[0], 0.0);
  EXPECT_DOUBLE_EQ(three[2], 0.35);
  const double expected = 0.35 * (CdfOracle(-1.5) - CdfOracle(-3.0)) /
                          (CdfOracle(0.0) - CdfOracle(-3.0));
  EXPECT_NEAR(three[1], expected, 1e-12);
  EXPECT_NEAR(three[1], 0.0459, 5e-4);
  const std::vector<double> two = EpsilonLevels(2, 0.35, -3.0, 0.0);
  EXPECT_EQ(two, (std::vector<double>{0.0, 0.35}));
  EXPECT_THROW(EpsilonLevels(1, 0.35, -3.0, 0.0), std::invalid_argument);
  EXPECT_THROW(EpsilonLevels(4, 0.35, 0.0, -3.0), std::invalid_argument);
}

TEST(EpsilonLevelsTest, DefaultTable) {
  const std::vector<double> expected = {
      0.0,
      0.0026069061852017615,
      0.010326550881956918,
      0.029401141386412302,
      0.06873060779253438,
      0.13640140576380639,
      0.23356795685662148,
      0.35};
  const std::vector<double> levels = EpsSchedule().levels();
  ASSERT_EQ(levels.size(), expected.size());
  for (size_t i = 0; i < levels.size(); ++i) {
    EXPECT_NEAR(levels[i], expected[i], 1e-15) << i;
  }
  EXPECT_LT(levels[1] - levels[0], levels[7] - levels[6]);
  for (size_t i = 2; i < levels.size(); ++i) {
    EXPECT_GE(levels[i] - levels[i - 1], levels[i - 1] - levels[i - 2]);
  }
}

TEST(EpsilonLevelsTest, MonotoneForAnyTruncation) {
  for (double lo : {-5.0, -3.0, -1.0, 0.5}) {
    for (double hi : {lo + 0.1, lo + 1.0, lo + 4.0}) {
      const std::vector<double> l = EpsilonLevels(8, 0.35, lo, hi);
      EXPECT_DOUBLE_EQ(l.front(), 0.0);
      EXPECT_DOUBLE_EQ(l.back(), 0.35);
      for (size_t i = 1; i < l.size(); ++i) EXPECT_GT(l[i], l[i - 1]);
    }
  }
}

TEST(EpsScheduleTest, CyclesEveryHundredEpisodes) {
  const EpsSchedule s;
  EXPECT_EQ(s.Active(0).level, 1);
  EXPECT_DOUBLE_EQ(s.Active(0).epsilon, 0.0);
  EXPECT_EQ(s.Active(99).level, 1);
  EXPECT_EQ(s.Active(100).level, 2);
  EXPECT_DOUBLE_EQ(s.Active(100).epsilon, s.levels()[1]);
  EXPECT_EQ(s.Active(799).level, 8);
  EXPECT_EQ(s.Active(800).level, 1);
  for (int64_t e = 0; e < 3000; ++e) {
    EXPECT_EQ(s.SwitchesAt(e), e > 0 && e % 100 == 0) << e;
    EXPECT_EQ(s.Active(e).level, static_cast<int>((e / 100) % 8) + 1);
  }
}

TEST(ScheduleParamsTest, Validation) {
  ScheduleParams p;
  EXPECT_NO_THROW(p.Validate());
  p.levels = 1;
  EXPECT_THROW(p.Validate(), std::invalid_argument);
  p = ScheduleParams{};
  p.switch_every = 0;
  EXPECT_THROW(p.Validate(), std::invalid_argument);
}

}  // namespace
}  // namespace scenegen
