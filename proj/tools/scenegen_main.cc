// Command-line entry point: train, sample-topk, eval, oracle, metrics,
// schedule and plot.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "scenegen/campaign.h"
#include "scenegen/checkpoint.h"
#include "scenegen/config.h"
#include "scenegen/episode_io.h"
#include "scenegen/metrics.h"
#include "scenegen/schedule.h"
#include "scenegen/selection.h"
#include "scenegen/svg.h"
#include "scenegen/trainer.h"

namespace fs = std::filesystem;
using namespace scenegen;

namespace {

constexpr const char* kVersion = "0.1.0";
constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

// Relative run paths live under $SCENEGEN_RUNS, or ./runs when it is unset.
std::string ResolveRun(const std::string& run) {
  const fs::path p(run);
  if (p.is_absolute() || fs::exists(p)) return p.string();
  const char* root = std::getenv("SCENEGEN_RUNS");
  return (fs::path(root != nullptr ? root : "runs") / p).string();
}

Config RunConfig(const std::string& run_dir) {
  return LoadConfig((fs::path(run_dir) / "config.json").string());
}

std::string HexHash(uint64_t h) {
  std::ostringstream ss;
  ss << std::hex << std::setw(16) << std::setfill('0') << h;
  return ss.str();
}

void WriteManifest(const Config& config, const std::string& run_dir,
                   const Trainer& trainer) {
  nlohmann::json m = {
      {"config_hash", HexHash(ConfigHash(config))},
      {"seed", config.run.seed},
      {"variant", ToString(config.run.variant)},
      {"episodes", trainer.next_episode()},
      {"versions",
       {{"scenegen", kVersion},
        {"episode_format", kEpisodeFormatVersion},
        {"checkpoint_format", Checkpoint::kVersion},
        {"compiler", __VERSION__}}}};
  WriteTextFile((fs::path(run_dir) / "manifest.json").string(), m.dump(2) + "\n");
}

// Loads the final risk critic of a run, if present.
bool LoadCritic(const std::string& run_dir, const Config& config,
                RiskCritic* critic) {
  const fs::path path = fs::path(run_dir) / "checkpoints" / "final.ckpt";
  if (!fs::exists(path)) return false;
  *critic = RiskCritic(config.risk, 0);
  GetRiskCritic(LoadCheckpoint(path.string()), "risk", critic);
  return true;
}

void PrintReport(const EvalReport& r, std::ostream& out) {
  out << r.controller << ',' << r.episodes << ',' << r.collision_rate << ','
      << r.phys_invalid_rate << ',' << r.gcs << '\n';
}

int CmdTrain(const std::string& config_path, const std::string& run,
             bool resume, bool quiet) {
  const Config config = LoadConfig(config_path);
  const std::string run_dir = ResolveRun(run);
  fs::create_directories(run_dir);
  const std::string stored = (fs::path(run_dir) / "config.json").string();
  if (!resume && fs::exists((fs::path(run_dir) / "episodes.jsonl"))) {
    throw std::runtime_error(run_dir +
                             " already holds a run; pass --resume to continue");
  }
  WriteTextFile(stored, SerializeConfig(config));
  Trainer trainer(config, run_dir);
  if (resume) {
    if (trainer.Resume()) {
      std::cerr << "resumed at episode " << trainer.next_episode()
                << ", level " << trainer.active_level() << "\n";
    } else {
      std::cerr << "no saved state, starting fresh\n";
    }
  }
  int64_t collisions = 0;
  int64_t seen = 0;
  trainer.Run([&](const EpisodeLog& log) {
    ++seen;
    if (log.summary.collided) ++collisions;
    if (!quiet && (log.summary.episode + 1) % 100 == 0) {
      std::cerr << "episode " << log.summary.episode + 1 << " level "
                << log.summary.level << " cr(last block) "
                << static_cast<double>(collisions) / seen << "\n";
      collisions = 0;
      seen = 0;
    }
  });
  WriteManifest(config, run_dir, trainer);
  std::cout << run_dir << "\n";
  return 0;
}

int CmdSampleTopK(const std::string& run, int k, const std::string& out) {
  const std::string run_dir = ResolveRun(run);
  const Config config = RunConfig(run_dir);
  const std::vector<EpisodeLog> logs =
      ReadEpisodes((fs::path(run_dir) / "episodes.jsonl").string());
  const TopK top = SelectTopK(logs, k, config.world.dt);
  if (!top.warning.empty()) std::cerr << "warning: " << top.warning << "\n";
  const std::string path =
      out.empty() ? (fs::path(run_dir) / "topk.jsonl").string() : out;
  WriteEpisodes(top.logs, path);
  for (const EpisodeLog& log : top.logs) {
    const CriticalityKey key = MakeCriticalityKey(log, config.world.dt);
    std::cout << log.summary.episode << ',' << key.collided << ','
              << key.tail_phi << ',' << key.min_positive_sigma << '\n';
  }
  std::cerr << top.logs.size() << " episodes written to " << path << "\n";
  return 0;
}

int CmdEval(const std::string& run, const std::string& logs_path,
            const std::string& config_path, const std::string& ego) {
  if (run.empty() && logs_path.empty()) {
    throw std::invalid_argument("pass --run or --logs");
  }
  Config config;
  std::string run_dir;
  if (!run.empty()) {
    run_dir = ResolveRun(run);
    config = RunConfig(run_dir);
  } else if (!config_path.empty()) {
    config = LoadConfig(config_path);
  }
  std::vector<EgoKind> egos;
  if (ego == "all") {
    egos = {EgoKind::kRouteFollowerBrake, EgoKind::kIdmPursuit,
            EgoKind::kAggressiveVariant};
  } else {
    egos = {ParseEgoKind(ego)};
  }
  const std::string source =
      !logs_path.empty() ? logs_path
                         : (fs::path(run_dir) / "episodes.jsonl").string();
  const std::vector<EpisodeLog> logs = ReadEpisodes(source);
  RiskCritic critic;
  const bool have_critic = !run_dir.empty() && LoadCritic(run_dir, config, &critic);
  if (!have_critic) std::cerr << "warning: no risk critic, phi is 0\n";
  std::cout << "controller,episodes,collision_rate,phys_invalid_rate,gcs\n";
  PrintReport(EvaluateLogs(logs, config.world.dt, "logged",
                           config.run.exclude_tail_s),
              std::cout);
  for (EgoKind kind : egos) {
    PrintReport(EvaluateReplay(config.world, config.feasibility,
                               have_critic ? &critic : nullptr, logs, kind,
                               config.run.exclude_tail_s),
                std::cout);
  }
  return 0;
}

int CmdOracle(int cases, uint64_t seed, const std::string& config_path) {
  const Config config =
      config_path.empty() ? Config{} : LoadConfig(config_path);
  const Campaign1dResult r1 = RunCampaign1d(cases, seed, config.feasibility);
  const Campaign2dResult r2 = RunCampaign2d(
      cases, seed, config.feasibility, config.world.ego_bounds, EscapeOptions{});
  std::cout << "campaign,cases,compared,agreements,agreement_pct,"
               "band_excluded,unknowns,violations\n";
  std::cout << "1d," << r1.cases << ',' << r1.compared << ',' << r1.agreements
            << ',' << 100.0 * r1.MatchRate() << ',' << r1.band_excluded
            << ",0," << r1.violations << '\n';
  const double pct2 = r2.Compared() == 0
                          ? 100.0
                          : 100.0 * r2.Agreements() / r2.Compared();
  std::cout << "2d," << r2.cases << ',' << r2.Compared() << ','
            << r2.Agreements() << ',' << pct2 << ',' << r2.band_excluded << ','
            << r2.unknowns << ',' << r2.counterexamples << '\n';
  for (const std::string& note : r2.counterexample_notes) {
    std::cerr << "counterexample: " << note << "\n";
  }
  return 0;
}

std::vector<double> Thresholds(int n) {
  std::vector<double> t;
  for (int i = 0; i < n; ++i) t.push_back(static_cast<double>(i) / n);
  return t;
}

int CmdMetrics(const std::string& run, const std::string& out_dir) {
  const std::string run_dir = ResolveRun(run);
  const Config config = RunConfig(run_dir);
  const std::vector<EpisodeLog> logs =
      ReadEpisodes((fs::path(run_dir) / "episodes.jsonl").string());
  const std::string dir = out_dir.empty() ? run_dir : out_dir;
  fs::create_directories(dir);
  const double dt = config.world.dt;
  const double tail = config.run.exclude_tail_s;

  std::ostringstream summary;
  summary << "scope,episodes,collision_rate,phys_invalid_rate,gcs\n";
  auto row = [&](const std::string& scope, const std::vector<EpisodeLog>& set) {
    if (set.empty()) return;
    summary << scope << ',' << set.size() << ',' << CollisionRate(set) << ','
            << PhysInvalidRate(set, tail, dt) << ',' << GapCoverageScore(set)
            << '\n';
  };
  row("all", logs);
  const size_t last = std::min<size_t>(200, logs.size());
  row("final200", std::vector<EpisodeLog>(logs.end() - static_cast<long>(last),
                                          logs.end()));
  std::map<int, std::vector<EpisodeLog>> by_level;
  for (const EpisodeLog& log : logs) by_level[log.summary.level].push_back(log);
  for (const auto& [level, set] : by_level) {
    row("level" + std::to_string(level), set);
  }
  WriteTextFile((fs::path(dir) / "summary.csv").string(), summary.str());
  std::cout << summary.str();

  const std::vector<double> th = Thresholds(10);
  const auto grid = CoverageGrid(logs, th, th);
  std::ostringstream cov;
  cov << "phi_threshold";
  for (double s : th) cov << ",sigma>=" << s;
  cov << '\n';
  for (size_t i = 0; i < th.size(); ++i) {
    cov << th[i];
    for (double v : grid[i]) cov << ',' << v;
    cov << '\n';
  }
  WriteTextFile((fs::path(dir) / "coverage.csv").string(), cov.str());
  return 0;
}

int CmdSchedule(const std::string& config_path) {
  const Config config =
      config_path.empty() ? Config{} : LoadConfig(config_path);
  const EpsSchedule schedule(config.schedule);
  std::cout << "level,epsilon,first_episode\n";
  std::cout << std::setprecision(17);
  for (size_t i = 0; i < schedule.levels().size(); ++i) {
    std::cout << i + 1 << ',' << schedule.levels()[i] << ','
              << static_cast<int64_t>(i) * config.schedule.switch_every << '\n';
  }
  return 0;
}

int CmdPlot(const std::string& run, const std::string& out_dir) {
  const std::string run_dir = ResolveRun(run);
  const std::string dir = out_dir.empty() ? run_dir : out_dir;
  fs::create_directories(dir);
  const CsvTable metrics = ReadCsv((fs::path(run_dir) / "metrics.csv").string());
  const std::vector<double> x = metrics.Column("episode");
  WriteTextFile((fs::path(dir) / "training.svg").string(),
                LineChartSvg("Training", "episode",
                             {{"window CR", x, metrics.Column("window_cr")},
                              {"entropy", x, metrics.Column("entropy")},
                              {"risk loss", x, metrics.Column("risk_loss")}}));

  const fs::path episodes = fs::path(run_dir) / "episodes.jsonl";
  if (fs::exists(episodes)) {
    const Config config = RunConfig(run_dir);
    const std::vector<EpisodeLog> logs = ReadEpisodes(episodes.string());
    std::map<int, std::vector<EpisodeLog>> by_level;
    for (const EpisodeLog& log : logs) by_level[log.summary.level].push_back(log);
    std::vector<std::string> labels;
    std::vector<double> invalid;
    for (const auto& [level, set] : by_level) {
      labels.push_back("L" + std::to_string(level));
      invalid.push_back(
          PhysInvalidRate(set, config.run.exclude_tail_s, config.world.dt));
    }
    WriteTextFile((fs::path(dir) / "invalid_rate.svg").string(),
                  BarChartSvg("Phys-invalid rate per level", labels, invalid));
    const std::vector<double> th = Thresholds(10);
    std::vector<std::string> th_labels;
    for (double t : th) {
      std::ostringstream ss;
      ss << t;
      th_labels.push_back(ss.str());
    }
    WriteTextFile((fs::path(dir) / "coverage.svg").string(),
                  HeatmapSvg("Coverage: phi >= row, sigma >= column", th_labels,
                             th_labels, CoverageGrid(logs, th, th)));
  }
  std::cout << dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Safety-critical scenario generation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  std::string config_path;
  std::string run;
  std::string out;
  std::string logs_path;
  std::string ego = "all";
  bool resume = false;
  bool quiet = false;
  int k = 10;
  int cases = 500;
  uint64_t seed = 1;

  CLI::App* train = app.add_subcommand("train", "Train a scenario policy");
  train->add_option("-c,--config", config_path, "Config file (JSON)")->required();
  train->add_option("-r,--run", run, "Run directory")->required();
  train->add_flag("--resume", resume, "Continue from the last saved state");
  train->add_flag("-q,--quiet", quiet, "No progress output");

  CLI::App* topk = app.add_subcommand("sample-topk", "Select critical episodes");
  topk->add_option("-r,--run", run, "Run directory")->required();
  topk->add_option("-k", k, "Number of episodes")->check(CLI::NonNegativeNumber);
  topk->add_option("-o,--out", out, "Output JSONL");

  CLI::App* eval = app.add_subcommand("eval", "Replay logs against ego controllers");
  eval->add_option("-r,--run", run, "Run directory");
  eval->add_option("-l,--logs", logs_path, "Episode JSONL");
  eval->add_option("-c,--config", config_path, "Config for --logs");
  eval->add_option("-e,--ego", ego,
                   "route_follower_brake | idm_pursuit | aggressive_variant | all");

  CLI::App* oracle = app.add_subcommand("oracle", "Soundness campaigns");
  oracle->add_option("--cases", cases, "Cases per campaign")
      ->check(CLI::PositiveNumber);
  oracle->add_option("--seed", seed, "Sampling seed");
  oracle->add_option("-c,--config", config_path, "Config file");

  CLI::App* metrics = app.add_subcommand("metrics", "Metric tables for a run");
  metrics->add_option("-r,--run", run, "Run directory")->required();
  metrics->add_option("-o,--out", out, "Output directory");

  CLI::App* schedule = app.add_subcommand("schedule", "Print the epsilon levels");
  schedule->add_option("-c,--config", config_path, "Config file");

  CLI::App* plot = app.add_subcommand("plot", "Render SVG figures for a run");
  plot->add_option("-r,--run", run, "Run directory")->required();
  plot->add_option("-o,--out", out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*train) return CmdTrain(config_path, run, resume, quiet);
    if (*topk) return CmdSampleTopK(run, k, out);
    if (*eval) return CmdEval(run, logs_path, config_path, ego);
    if (*oracle) return CmdOracle(cases, seed, config_path);
    if (*metrics) return CmdMetrics(run, out);
    if (*schedule) return CmdSchedule(config_path);
    if (*plot) return CmdPlot(run, out);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
