#include "untangle/metrics.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace untangle {
namespace {

TEST(Summarize, PooledRates) {
  std::vector<EpisodeSummary> eps(2);
  eps[0].entangled = true;
  eps[0].processes_completed = 3;
  eps[0].processes_total = 30;
  eps[0].tasks_completed = 1;
  eps[0].tasks_total = 8;
  eps[0].arm_steps = 100;
  eps[0].interventions = 10;
  eps[0].idle_arm_steps = 40;
  eps[0].reward = -2.0;
  eps[1].processes_completed = 15;
  eps[1].processes_total = 30;
  eps[1].tasks_completed = 4;
  eps[1].tasks_total = 8;
  eps[1].arm_steps = 300;
  eps[1].interventions = 30;
  eps[1].idle_arm_steps = 0;
  eps[1].reward = 4.0;
  const RateSummary r = summarize(eps);
  EXPECT_EQ(r.episodes, 2u);
  EXPECT_DOUBLE_EQ(r.entanglement, 50.0);
  EXPECT_DOUBLE_EQ(r.success, 100.0 * (0.1 + 0.5) / 2.0);
  EXPECT_DOUBLE_EQ(r.task_completion, 100.0 * (1.0 / 8 + 4.0 / 8) / 2.0);
  EXPECT_DOUBLE_EQ(r.intervention, 10.0);
  EXPECT_DOUBLE_EQ(r.idle, 10.0);
  EXPECT_DOUBLE_EQ(r.mean_reward, 1.0);
  EXPECT_EQ(summarize({}).episodes, 0u);
}

TEST(MovingAverage, TrailingWithPartialStart) {
  const std::vector<double> v{1, 2, 3, 4, 5};
  const auto m = moving_average(v, 2);
  EXPECT_EQ(m, (std::vector<double>{1.0, 1.5, 2.5, 3.5, 4.5}));
  EXPECT_THROW(moving_average(v, 0), std::invalid_argument);
}

TEST(Convergence, FirstFullWindowReachingThreshold) {
  // Linear ramp 0..999 then a plateau at 1000: asymptote 1000, threshold 950.
  std::vector<double> r;
  for (int i = 0; i < 1000; ++i) r.push_back(i);
  for (int i = 0; i < 1000; ++i) r.push_back(1000.0);
  // Oracle: scan the window means directly.
  int expected = -1;
  for (std::size_t end = 100; end <= r.size(); ++end) {
    double s = 0.0;
    for (std::size_t k = end - 100; k < end; ++k) s += r[k];
    if (s / 100.0 >= 950.0) {
      expected = static_cast<int>(end);
      break;
    }
  }
  EXPECT_EQ(convergence_episode(r), expected);
  EXPECT_EQ(convergence_episode(std::vector<double>(50, 1.0)), -1);
}

TEST(Convergence, NegativeAsymptoteUsesMagnitude) {
  std::vector<double> r(600, -10.0);
  for (int i = 0; i < 200; ++i) r[static_cast<std::size_t>(i)] = -40.0;
  // Tail of 300 gives asymptote -10 and threshold -10.5; a window holding
  // k early values averages -10 - 0.3 k, so at most one may remain.
  EXPECT_EQ(convergence_episode(r, 100, 300), 299);
  // Default tail of 500: asymptote -16, threshold -16.8, k <= 22.
  EXPECT_EQ(convergence_episode(r), 278);
}

TEST(Auc, PerKilosample) {
  const std::vector<double> r{1.0, -2.0, 0.5};
  const std::vector<long> s{1000, 500, 4000};
  EXPECT_DOUBLE_EQ(reward_auc_per_kilosample(r, s), 1.0 - 1.0 + 2.0);
  EXPECT_THROW(reward_auc_per_kilosample(r, std::vector<long>{1}), std::invalid_argument);
}

TEST(MeanStd, SampleDeviation) {
  const MeanStd m = mean_std(std::vector<double>{2, 4, 4, 4, 5, 5, 7, 9});
  EXPECT_DOUBLE_EQ(m.mean, 5.0);
  EXPECT_NEAR(m.std, std::sqrt(32.0 / 7.0), 1e-12);
  EXPECT_EQ(mean_std(std::vector<double>{3.0}).std, 0.0);
}

}  // namespace
}  // namespace untangle
