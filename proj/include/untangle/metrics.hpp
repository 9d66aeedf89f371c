#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace untangle {

/// Per-episode record from which every reported metric is recomputed.
struct EpisodeSummary {
  std::uint64_t seed = 0;
  std::string phase = "train";  // "train" or "eval"
  int episode = 0;              // 0-based within the phase
  std::string fixture;
  int steps = 0;
  bool entangled = false;
  bool aborted = false;
  int tasks_completed = 0;
  int tasks_total = 0;
  int processes_completed = 0;
  int processes_total = 0;
  long arm_steps = 0;
  long interventions = 0;    // arm-steps whose action was scaled or replaced
  long idle_arm_steps = 0;   // arm-steps without assignment while tasks remain
  double reward = 0.0;       // sum over steps of the mean arm learning signal
  double scheduler_return = 0.0;
  double max_abs_linking = 0.0;
  int max_braid_length = 0;
  long obstacle_violations = 0;
  double omega = 0.0;        // replay mixing weight at episode end
  long samples = 0;          // arm transitions collected
};

/// Percentages over a set of episodes. Entanglement: episodes ending with
/// the entanglement indicator on. Success: mean fraction of task processes
/// completed within the horizon. Intervention and idle: pooled over
/// arm-steps.
struct RateSummary {
  double entanglement = 0.0;
  double success = 0.0;
  double intervention = 0.0;
  double idle = 0.0;
  double task_completion = 0.0;  // mean fraction of whole tasks completed
  double mean_reward = 0.0;
  std::size_t episodes = 0;
};

RateSummary summarize(std::span<const EpisodeSummary> episodes);

/// Trailing mean over `window` values; entry i averages values
/// max(0, i - window + 1) .. i.
std::vector<double> moving_average(std::span<const double> values, std::size_t window);

/// First 1-based episode whose full `window` moving average reaches the
/// asymptote mean(last `tail` values) - (1 - fraction) * |asymptote|;
/// -1 if none or fewer than `window` values.
int convergence_episode(std::span<const double> rewards, std::size_t window = 100,
                        std::size_t tail = 500, double fraction = 0.95);

/// Area under the reward curve against collected samples, with the sample
/// axis in thousands: sum_e reward_e * samples_e / 1000.
double reward_auc_per_kilosample(std::span<const double> rewards, std::span<const long> samples);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation, 0 for fewer than two values
};

MeanStd mean_std(std::span<const double> values);

}  // namespace untangle
