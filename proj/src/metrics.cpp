#include "untangle/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace untangle {

RateSummary summarize(std::span<const EpisodeSummary> episodes) {
  RateSummary r;
  r.episodes = episodes.size();
  if (episodes.empty()) return r;
  double entangled = 0.0;
  double success = 0.0;
  double tasks = 0.0;
  double reward = 0.0;
  long arm_steps = 0;
  long interventions = 0;
  long idle = 0;
  for (const auto& e : episodes) {
    entangled += e.entangled ? 1.0 : 0.0;
    if (e.processes_total > 0) {
      success += static_cast<double>(e.processes_completed) / e.processes_total;
    }
    if (e.tasks_total > 0) tasks += static_cast<double>(e.tasks_completed) / e.tasks_total;
    reward += e.reward;
    arm_steps += e.arm_steps;
    interventions += e.interventions;
    idle += e.idle_arm_steps;
  }
  const auto n = static_cast<double>(episodes.size());
  r.entanglement = 100.0 * entangled / n;
  r.success = 100.0 * success / n;
  r.task_completion = 100.0 * tasks / n;
  r.mean_reward = reward / n;
  if (arm_steps > 0) {
    r.intervention = 100.0 * static_cast<double>(interventions) / static_cast<double>(arm_steps);
    r.idle = 100.0 * static_cast<double>(idle) / static_cast<double>(arm_steps);
  }
  return r;
}

std::vector<double> moving_average(std::span<const double> values, std::size_t window) {
  if (window == 0) throw std::invalid_argument("window must be positive");
  std::vector<double> out(values.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    sum += values[i];
    if (i >= window) sum -= values[i - window];
    out[i] = sum / static_cast<double>(std::min(i + 1, window));
  }
  return out;
}

int convergence_episode(std::span<const double> rewards, std::size_t window, std::size_t tail,
                        double fraction) {
  if (rewards.size() < window || window == 0) return -1;
  const std::size_t t = std::min(tail, rewards.size());
  double asymptote = 0.0;
  for (std::size_t i = rewards.size() - t; i < rewards.size(); ++i) asymptote += rewards[i];
  asymptote /= static_cast<double>(t);
  const double threshold = asymptote - (1.0 - fraction) * std::abs(asymptote);
  const std::vector<double> ma = moving_average(rewards, window);
  for (std::size_t i = window - 1; i < ma.size(); ++i) {
    if (ma[i] >= threshold) return static_cast<int>(i + 1);
  }
  return -1;
}

double reward_auc_per_kilosample(std::span<const double> rewards, std::span<const long> samples) {
  if (rewards.size() != samples.size()) throw std::invalid_argument("size mismatch");
  double area = 0.0;
  for (std::size_t i = 0; i < rewards.size(); ++i) {
    area += rewards[i] * static_cast<double>(samples[i]) / 1000.0;
  }
  return area;
}

MeanStd mean_std(std::span<const double> values) {
  MeanStd m;
  if (values.empty()) return m;
  for (double v : values) m.mean += v;
  m.mean /= static_cast<double>(values.size());
  if (values.size() < 2) return m;
  double ss = 0.0;
  for (double v : values) ss += (v - m.mean) * (v - m.mean);
  m.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  return m;
}

}  // namespace untangle
