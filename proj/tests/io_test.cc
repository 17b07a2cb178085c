#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "scenegen/checkpoint.h"
#include "scenegen/config.h"
#include "scenegen/episode_io.h"

namespace scenegen {
namespace {

namespace fs = std::filesystem;

fs::path TempPath(const std::string& name) {
  return fs::temp_directory_path() /
         ("scenegen_io_" + std::to_string(::getpid()) + "_" + name);
}

TEST(ConfigTest, RoundTripMaterializesDefaults) {
  const Config c = ParseConfig("{}");
  const std::string text = SerializeConfig(c);
  EXPECT_EQ(SerializeConfig(ParseConfig(text)), text);
  EXPECT_NE(text.find("\"entropy_coef\""), std::string::npos);
  EXPECT_EQ(c.policy.batch_size, 2048);
  EXPECT_DOUBLE_EQ(c.policy.clip, 0.25);
  EXPECT_DOUBLE_EQ(c.risk.w_plus, 50.0);
  EXPECT_EQ(c.schedule.levels, 8);
  EXPECT_DOUBLE_EQ(c.feasibility.npc_lon_brake, 4.0);
}

TEST(ConfigTest, OverridesAreApplied) {
  const Config c = ParseConfig(
      R"({"run": {"seed": 9, "variant": "phi_only"},
          "world": {"scenario": "cut_in", "ego": "aggressive_variant"},
          "policy": {"minibatch": 128}})");
  EXPECT_EQ(c.run.seed, 9u);
  EXPECT_EQ(c.run.variant, Variant::kPhiOnly);
  EXPECT_EQ(c.world.scenario, "cut_in");
  EXPECT_EQ(c.world.ego, EgoKind::kAggressiveVariant);
  EXPECT_EQ(c.policy.minibatch, 128);
  EXPECT_EQ(ParseConfig(SerializeConfig(c)).run.variant, Variant::kPhiOnly);
}

void ExpectConfigError(const std::string& text, const std::string& needle) {
  try {
    ParseConfig(text);
    ADD_FAILURE() << "no error for " << text;
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find(needle), std::string::npos)
        << e.what();
  }
}

TEST(ConfigTest, ErrorsNameTheField) {
  ExpectConfigError(R"({"policy": {"entropy_coeff": 0.1}})", "policy.entropy_coeff");
  ExpectConfigError(R"({"bogus": 1})", "bogus");
  ExpectConfigError(R"({"run": {"episodes": "many"}})", "run.episodes");
  ExpectConfigError(R"({"world": {"scenario": "foo"}})", "foo");
  ExpectConfigError(R"({"run": {"variant": "best"}})", "best");
  ExpectConfigError(R"({"policy": {"clip": 2.0}})", "policy.clip");
  ExpectConfigError("{not json", "config");
}

TEST(ConfigTest, HashTracksContent) {
  const Config a = ParseConfig("{}");
  Config b = a;
  EXPECT_EQ(ConfigHash(a), ConfigHash(b));
  b.run.seed = 2;
  EXPECT_NE(ConfigHash(a), ConfigHash(b));
  // FNV-1a 64-bit reference values.
  EXPECT_EQ(Fnv1a(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(Fnv1a("a"), 0xaf63dc4c8601ec8cULL);
}

TEST(ConfigTest, LoadMissingFileFails) {
  EXPECT_THROW(LoadConfig("/nonexistent/config.json"), std::runtime_error);
}

TEST(CheckpointTest, EncodeDecodeIsExact) {
  Checkpoint c;
  c.config_hash = 0x1234abcd5678ef90ULL;
  Eigen::VectorXd v(4);
  v << 1.0 / 3.0, -0.0, 1e-300, 12345.678;
  c.Put("alpha", v);
  c.Put("empty", Eigen::VectorXd());
  c.metadata = R"({"k": 1})";
  const std::string bytes = EncodeCheckpoint(c);
  const Checkpoint d = DecodeCheckpoint(bytes);
  EXPECT_EQ(d.config_hash, c.config_hash);
  EXPECT_EQ(d.metadata, c.metadata);
  EXPECT_EQ(d.Get("alpha", 4), v);
  EXPECT_EQ(EncodeCheckpoint(d), bytes);
  EXPECT_THROW(d.Get("alpha", 5), std::runtime_error);
  EXPECT_THROW(d.Get("beta", 1), std::runtime_error);
}

TEST(CheckpointTest, RejectsCorruptInput) {
  Checkpoint c;
  c.Put("x", Eigen::VectorXd::Ones(3));
  std::string bytes = EncodeCheckpoint(c);
  std::string bad_magic = bytes;
  bad_magic[0] ^= 0x55;
  EXPECT_THROW(DecodeCheckpoint(bad_magic), std::runtime_error);
  EXPECT_THROW(DecodeCheckpoint(bytes.substr(0, bytes.size() - 3)),
               std::runtime_error);
  EXPECT_THROW(DecodeCheckpoint(bytes + "zz"), std::runtime_error);
  EXPECT_THROW(LoadCheckpoint("/nonexistent/ckpt"), std::runtime_error);
}

TEST(CheckpointTest, PolicyAndCriticRoundTrip) {
  PolicyParams pp;
  pp.hidden = 16;
  ScenarioPolicy policy(pp, ControlBounds{-4, 3, 1.5}, 1);
  std::mt19937_64 rng(2);
  std::vector<PpoSample> batch(64);
  for (PpoSample& s : batch) {
    for (double& x : s.state) x = 0.1;
    s.advantage = 1.0;
  }
  policy.Update(batch, rng);  // non-trivial optimizer state
  RiskParams rp;
  rp.hidden = 8;
  RiskCritic critic(rp, 3);

  Checkpoint c;
  PutPolicy(policy, "policy", &c);
  PutRiskCritic(critic, "risk", &c);
  const fs::path path = TempPath("ckpt");
  SaveCheckpoint(c, path.string());
  const Checkpoint d = LoadCheckpoint(path.string());
  fs::remove(path);

  ScenarioPolicy p2(pp, ControlBounds{-4, 3, 1.5}, 99);
  GetPolicy(d, "policy", &p2);
  EXPECT_EQ(p2.actor().Parameters(), policy.actor().Parameters());
  EXPECT_EQ(p2.critic().Parameters(), policy.critic().Parameters());
  EXPECT_EQ(p2.actor_opt().steps(), policy.actor_opt().steps());
  EXPECT_EQ(p2.actor_opt().m(), policy.actor_opt().m());
  EXPECT_EQ(p2.critic_opt().v(), policy.critic_opt().v());

  RiskCritic c2(rp, 77);
  GetRiskCritic(d, "risk", &c2);
  EXPECT_EQ(c2.online().Parameters(), critic.online().Parameters());
  EXPECT_EQ(c2.target().Parameters(), critic.target().Parameters());
}

EpisodeLog SampleLog() {
  EpisodeLog log;
  for (int t = 0; t < 5; ++t) {
    Frame f;
    f.step = t;
    f.ego.x = 0.1 * t;
    f.ego.y = 1.0 / 3.0;
    f.ego.yaw = 0.7;
    f.ego.v_lon = 6.123456789012345;
    f.ego.half_length = 2.3;
    f.adv.x = -5.0 + t;
    f.adv.yaw = -1.2;
    f.adv_action = {0.25 * t, -0.1};
    f.sigma = 0.5 - 0.3 * t;
    f.phi = 0.01 * t;
    f.epsilon = 0.0026069061852017615;
    f.collision = t == 4;
    log.frames.push_back(f);
  }
  log.summary.collided = true;
  log.summary.steps = 5;
  log.summary.seed = 0xfedcba9876543210ULL;
  log.summary.level = 3;
  log.summary.episode = 217;
  log.summary.adv_clamps = 2;
  return log;
}

TEST(EpisodeIoTest, RoundTripIsBitExact) {
  const EpisodeLog log = SampleLog();
  const fs::path path = TempPath("episodes.jsonl");
  WriteEpisodes({log, log}, path.string());
  const std::vector<EpisodeLog> back = ReadEpisodes(path.string());
  fs::remove(path);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(EncodeEpisode(back[0]), EncodeEpisode(log));
  const Frame& a = back[0].frames[3];
  const Frame& b = log.frames[3];
  EXPECT_EQ(a.ego.y, b.ego.y);
  EXPECT_EQ(a.ego.v_lon, b.ego.v_lon);
  EXPECT_EQ(a.ego.half_length, 2.3);
  EXPECT_EQ(a.sigma, b.sigma);
  EXPECT_EQ(a.epsilon, b.epsilon);
  EXPECT_EQ(back[0].summary.seed, log.summary.seed);
  EXPECT_EQ(back[0].summary.episode, 217);
  EXPECT_TRUE(back[1].frames.back().collision);
}

TEST(EpisodeIoTest, HeaderNamesFields) {
  const std::string h = EpisodeHeaderLine();
  EXPECT_NE(h.find("\"version\":1"), std::string::npos);
  EXPECT_NE(h.find("\"sigma\""), std::string::npos);
  EXPECT_EQ(FrameFields().front(), "step");
  EXPECT_EQ(FrameFields().back(), "collision");
}

TEST(EpisodeIoTest, RejectsBadInput) {
  std::istringstream empty("");
  EXPECT_THROW(ParseEpisodes(empty), std::runtime_error);
  std::istringstream wrong_version(
      R"({"format":"scenegen-episodes","version":2,"frame_fields":[]})"
      "\n");
  EXPECT_THROW(ParseEpisodes(wrong_version), std::runtime_error);
  std::istringstream orphan_frame(EpisodeHeaderLine() + "\n[0,1,2]\n");
  EXPECT_THROW(ParseEpisodes(orphan_frame), std::runtime_error);
  std::istringstream garbage(EpisodeHeaderLine() + "\n{oops\n");
  EXPECT_THROW(ParseEpisodes(garbage), std::runtime_error);
  EXPECT_THROW(ReadEpisodes("/nonexistent/e.jsonl"), std::runtime_error);
}

}  // namespace
}  // namespace scenegen
