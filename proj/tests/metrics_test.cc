#include "scenegen/metrics.h"

#include <random>

#include <gtest/gtest.h>

namespace scenegen {
namespace {

EpisodeLog MakeLog(const std::vector<double>& sigma, bool collided,
                   const std::vector<double>& phi = {}) {
  EpisodeLog log;
  for (size_t t = 0; t < sigma.size(); ++t) {
    Frame f;
    f.step = static_cast<int>(t);
    f.sigma = sigma[t];
    f.phi = phi.empty() ? 0.0 : phi[t];
    log.frames.push_back(f);
  }
  log.summary.collided = collided;
  if (collided) log.frames.back().collision = true;
  log.summary.steps = static_cast<int>(sigma.size());
  return log;
}

TEST(CollisionRateTest, Examples) {
  std::vector<EpisodeLog> logs;
  for (int i = 0; i < 10; ++i) logs.push_back(MakeLog({1.0}, i < 9));
  EXPECT_DOUBLE_EQ(CollisionRate(logs), 0.9);
  EXPECT_DOUBLE_EQ(CollisionRate({MakeLog({1.0}, false)}), 0.0);
  EXPECT_DOUBLE_EQ(CollisionRate({MakeLog({1.0}, true)}), 1.0);
  EXPECT_THROW(CollisionRate({}), std::invalid_argument);
}

TEST(PhysInvalidRateTest, AllFeasible) {
  EXPECT_DOUBLE_EQ(PhysInvalidRate({MakeLog(std::vector<double>(20, 0.5), true)}),
                   0.0);
}

TEST(PhysInvalidRateTest, ExclusionWindow) {
  EXPECT_EQ(ExclusionFrames(0.8, 0.1), 8);
  // Collision at step 11: steps 3..10 and the collision frame are dropped,
  // steps 0..2 survive and step 2 is the only negative one among them.
  std::vector<double> sigma(12, 0.4);
  for (int t = 2; t <= 11; ++t) sigma[t] = -0.2;
  const InvalidCount c = PhysInvalidCount({MakeLog(sigma, true)});
  EXPECT_EQ(c.frames, 3);
  EXPECT_EQ(c.invalid, 1);
  EXPECT_NEAR(c.Rate(), 1.0 / 3.0, 1e-15);
}

TEST(PhysInvalidRateTest, NoCollisionNoExclusion) {
  std::vector<double> sigma(100, 0.5);
  for (int t = 0; t < 5; ++t) sigma[t * 20] = -0.1;
  EXPECT_DOUBLE_EQ(PhysInvalidRate({MakeLog(sigma, false)}), 0.05);
}

TEST(PhysInvalidRateTest, ShortCollidedEpisodeContributesNothing) {
  const InvalidCount c = PhysInvalidCount({MakeLog({-1, -1, -1}, true)});
  EXPECT_EQ(c.frames, 0);
  EXPECT_DOUBLE_EQ(c.Rate(), 0.0);
}

TEST(GridCellTest, BoundariesGoToLowerCell) {
  EXPECT_EQ(GridCell(0.0, 40), 0);
  EXPECT_EQ(GridCell(1.0, 40), 39);
  EXPECT_EQ(GridCell(0.5, 40), 19);
  EXPECT_EQ(GridCell(0.125, 40), 4);
  EXPECT_EQ(GridCell(0.5000001, 40), 20);
  EXPECT_EQ(GridCell(-0.3, 40), 0);
  EXPECT_EQ(GridCell(1.7, 40), 39);
}

TEST(GapCoverageScoreTest, Examples) {
  EXPECT_DOUBLE_EQ(
      GapCoverageScore({MakeLog({0.51, 0.515, 0.52, -1}, true, {0.3, 0.3, 0.3, 1})}),
      1.0 / 1600.0);
  EXPECT_DOUBLE_EQ(GapCoverageScore({MakeLog({0.5, 0.9}, false, {0.1, 0.9})}),
                   0.0);
  EXPECT_DOUBLE_EQ(GapCoverageScore({MakeLog({1.0, 0.5}, true, {1.0, 0.5})}),
                   2.0 / 1600.0);
}

TEST(GapCoverageScoreTest, MonotoneUnderUnion) {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(-0.3, 1.0);
  std::vector<EpisodeLog> acc;
  double last = 0.0;
  for (int i = 0; i < 50; ++i) {
    std::vector<double> s(30), p(30);
    for (int t = 0; t < 30; ++t) {
      s[t] = u(rng);
      p[t] = std::abs(u(rng));
    }
    acc.push_back(MakeLog(s, i % 3 != 0, p));
    const double g = GapCoverageScore(acc);
    EXPECT_GE(g, last);
    last = g;
  }
}

TEST(CoverageGridTest, Examples) {
  const std::vector<EpisodeLog> one = {MakeLog({0.5}, false, {0.5})};
  EXPECT_DOUBLE_EQ(CoverageGrid(one, {0.4}, {0.4})[0][0], 1.0);
  EXPECT_DOUBLE_EQ(CoverageGrid(one, {0.0}, {0.0})[0][0], 1.0);
  EXPECT_DOUBLE_EQ(CoverageGrid(one, {1.1}, {0.0})[0][0], 0.0);
}

TEST(CoverageGridTest, MonotoneInThresholds) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<EpisodeLog> logs;
  for (int i = 0; i < 20; ++i) {
    std::vector<double> s(25), p(25);
    for (int t = 0; t < 25; ++t) {
      s[t] = u(rng);
      p[t] = u(rng);
    }
    logs.push_back(MakeLog(s, false, p));
  }
  const std::vector<double> th = {0.0, 0.1, 0.3, 0.5, 0.7, 0.9};
  const auto g = CoverageGrid(logs, th, th);
  for (size_t i = 0; i < th.size(); ++i) {
    for (size_t j = 0; j < th.size(); ++j) {
      if (i > 0) {
        EXPECT_LE(g[i][j], g[i - 1][j]);
      }
      if (j > 0) {
        EXPECT_LE(g[i][j], g[i][j - 1]);
      }
    }
  }
}

}  // namespace
}  // namespace scenegen
