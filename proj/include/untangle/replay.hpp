#pragma once

#include "untangle/risk.hpp"

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace untangle {

/// One arm transition. Observations are stored in single precision; the
/// critic inputs and collection-time estimates ride along so that stale
/// samples can be re-scored against the current critic.
struct Experience {
  Eigen::VectorXf observation;
  Eigen::VectorXf action;
  double reward = 0.0;
  Eigen::VectorXf next_observation;
  bool done = false;
  double topo_risk = 0.0;
  double td_error = 0.0;

  Eigen::VectorXf critic_observation;
  Eigen::VectorXf next_critic_observation;
  double discount = 0.99;
  double old_log_prob = 0.0;
  double gae = 0.0;           // advantage estimate at collection
  double value_at_collection = 0.0;
  bool entangled = false;     // the entanglement indicator was on for this step
};

enum class BufferId : int { safe = 0, risky = 1, neutral = 2 };

std::string_view to_string(BufferId b);

/// Three-way rule: safe below tau_low, risky at or above tau_high, neutral
/// otherwise. Non-finite risk is routed to risky.
BufferId classify_risk(double risk, const RiskCoeffs& c);

/// omega_min + (omega_max - omega_min) * n_entangle / n_total (omega_min when
/// n_total == 0).
double replay_omega(std::uint64_t n_entangle, std::uint64_t n_total, double omega_min,
                    double omega_max);

struct ReplayConfig {
  std::array<std::size_t, 3> capacities{50000, 20000, 50000};  // safe, risky, neutral
  double omega_min = 0.2;
  double omega_max = 0.8;
  double beta_is = 0.4;
  bool prioritized = true;  // false: uniform sampling over everything stored
};

struct ReplaySlot {
  BufferId buffer = BufferId::safe;
  std::size_t index = 0;
};

struct ReplaySample {
  std::vector<ReplaySlot> slots;
  std::vector<double> probabilities;  // P(i) at draw time
  std::vector<double> weights;        // importance weights, max-normalized
  double omega = 0.0;
  bool partial = false;               // fewer than `batch` items were stored
};

/// Risk-partitioned replay with priorities
///   P(i) proportional to (1 - omega) |td_error(i)| + omega * risk(i),
/// backed by a sum tree that keeps both channels so omega can change
/// without rebuilding.
class DualReplay {
 public:
  explicit DualReplay(ReplayConfig config = {}, RiskCoeffs coeffs = {});

  BufferId classify_and_store(Experience e);

  /// Draws without replacement. With prioritized == false (or when every
  /// score is zero) the draw is uniform.
  ReplaySample sample(std::size_t batch, std::mt19937_64& rng) const;

  const Experience& at(ReplaySlot s) const;
  void update_td_error(ReplaySlot s, double td_error);

  /// Exact P(i) for every stored experience, in slot order (safe, risky,
  /// neutral; ring index within each).
  std::vector<std::pair<ReplaySlot, double>> probabilities() const;
  double priority_score(ReplaySlot s) const;

  double omega() const;
  std::size_t size() const;
  std::size_t size(BufferId b) const { return buffers_[static_cast<int>(b)].count; }
  std::uint64_t n_entangle() const { return n_entangle_; }
  std::uint64_t n_total() const { return n_total_; }
  std::uint64_t non_finite_risk_count() const { return non_finite_; }
  double max_priority() const { return max_priority_; }
  const ReplayConfig& config() const { return config_; }

  void restore_counters(std::uint64_t n_entangle, std::uint64_t n_total, std::uint64_t non_finite,
                        double max_priority);

 private:
  struct Ring {
    std::vector<Experience> items;
    std::size_t capacity = 0;
    std::size_t head = 0;  // next write position
    std::size_t count = 0;
    std::size_t offset = 0;  // first leaf in the sum tree
  };

  // Two-channel sum tree: per node, summed |td| and summed risk.
  struct SumTree {
    std::size_t leaves = 1;
    std::vector<double> td;
    std::vector<double> risk;
    void resize(std::size_t n);
    void set(std::size_t leaf, double td_value, double risk_value);
    double total(double omega) const { return (1.0 - omega) * td[1] + omega * risk[1]; }
    double leaf_score(std::size_t leaf, double omega) const {
      return (1.0 - omega) * td[leaves + leaf] + omega * risk[leaves + leaf];
    }
    std::size_t find(double u, double omega) const;
  };

  std::size_t leaf_of(ReplaySlot s) const {
    return buffers_[static_cast<int>(s.buffer)].offset + s.index;
  }
  ReplaySlot slot_of(std::size_t leaf) const;

  ReplayConfig config_;
  RiskCoeffs coeffs_;
  std::array<Ring, 3> buffers_;
  mutable SumTree tree_;  // entries are zeroed and restored inside sample()
  std::uint64_t n_entangle_ = 0;
  std::uint64_t n_total_ = 0;
  std::uint64_t non_finite_ = 0;
  double max_priority_ = 1.0;
};

}  // namespace untangle
