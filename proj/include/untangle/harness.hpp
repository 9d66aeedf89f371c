#pragma once

#include "untangle/environment.hpp"
#include "untangle/learner.hpp"
#include "untangle/metrics.hpp"
#include "untangle/replay.hpp"
#include "untangle/scenario.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace untangle {

/// Component switches; each ablation turns one of them off.
struct Ablation {
  bool dual_replay = true;
  bool safety_layer = true;
  bool hierarchical_control = true;
};

/// Comma-separated component names to disable ("dual_replay",
/// "safety_layer", "hierarchical_control"); "" and "none" disable nothing.
Ablation parse_ablation(std::string_view list);
std::string ablation_label(const Ablation& a);

struct RunConfig {
  Density scenario = Density::low;
  std::vector<std::uint64_t> seeds{1};
  int episodes = 2000;       // training episodes per seed
  int eval_episodes = 100;   // greedy-policy episodes per seed after training
  Ablation ablation;
  Hyperparameters hyper;
  ReplayConfig replay;
  std::optional<ScenarioConfig> scenario_override;  // replaces the generated layout
  int trace_episodes = 4;    // evaluation episodes per seed dumped step by step
  int checkpoint_every = 0;  // training episodes between checkpoints, 0 = final only
  int jobs = 1;              // seeds trained concurrently

  /// Default training length for a density: 2,000 episodes for low and
  /// medium, 5,000 for high.
  static int default_episodes(Density d);
  /// Throws std::invalid_argument before any compute.
  void validate() const;
  ScenarioConfig scenario_for(std::uint64_t seed) const;
};

/// Invariant counters collected over every executed step.
struct RunAudit {
  long steps = 0;
  long screened_actions = 0;
  long high_risk_without_replan = 0;  // executed with lookahead risk >= theta_high, no replan logged
  long assignment_violations = 0;     // steps with C6, C7 or C8 failing
  long kinematic_violations = 0;      // steps with C2 .. C5 failing
  long schedule_checks = 0;           // episodes validated against their fixture
  long schedule_failures = 0;
  long aborted_episodes = 0;
};

struct SeedResult {
  std::uint64_t seed = 0;
  std::vector<EpisodeSummary> train;
  std::vector<EpisodeSummary> eval;
  RateSummary train_rates;
  RateSummary eval_rates;
  int convergence_episode = -1;
  double reward_auc = 0.0;
  RunAudit audit;
  std::vector<std::string> trace_lines;  // JSON lines of the traced evaluation episodes
  std::string checkpoint;                // final checkpoint document
};

struct RunReport {
  RunConfig config;
  std::vector<SeedResult> seeds;
};

using ProgressCallback = std::function<void(std::uint64_t seed, const EpisodeSummary&)>;

/// Trains and evaluates one seed; deterministic in (config, seed). When
/// `checkpoint_dir` is given, periodic checkpoints are written there.
SeedResult run_seed(const RunConfig& config, std::uint64_t seed,
                    const ProgressCallback& progress = {},
                    const std::optional<std::filesystem::path>& checkpoint_dir = std::nullopt);

/// All seeds, up to `config.jobs` at a time.
RunReport run(const RunConfig& config, const ProgressCallback& progress = {},
              const std::optional<std::filesystem::path>& checkpoint_dir = std::nullopt);

/// Headline metrics of a report: evaluation rates, training convergence
/// and reward area, mean and sample std across seeds.
struct ReportMetrics {
  MeanStd entanglement_rate;
  MeanStd success_rate;
  MeanStd intervention_rate;
  MeanStd idle_rate;
  MeanStd convergence_episodes;
  MeanStd reward_auc;
  MeanStd mean_reward;
};

ReportMetrics report_metrics(const RunReport& r);

std::string metrics_json(const RunReport& r);
std::string curve_csv(const RunReport& r);
std::string trace_jsonl(const RunReport& r);
/// Writes metrics.json, curve.csv, trace.jsonl and checkpoints/ under `dir`.
void write_artifacts(const RunReport& r, const std::filesystem::path& dir);

/// JSON line for one episode summary ("type": "episode").
std::string episode_record(const EpisodeSummary& e);

/// Process intervals of one traced episode.
struct TracedSchedule {
  std::string key;      // "seed/phase/episode", empty for a bare interval list
  std::string fixture;  // fixture the episode ran under, empty if not recorded
  std::vector<ProcessInterval> intervals;
};

/// Groups the "process" records of a trace by episode. Lines without
/// episode keys form one group. Throws std::runtime_error on malformed input.
std::vector<TracedSchedule> read_traced_schedules(std::istream& in);

}  // namespace untangle
