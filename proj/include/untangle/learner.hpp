#pragma once

#include "untangle/network.hpp"
#include "untangle/replay.hpp"

#include <Eigen/Dense>

#include <random>
#include <string>
#include <vector>

namespace untangle {

struct Hyperparameters {
  double policy_lr = 1e-4;
  double value_lr = 1e-4;
  double clip = 0.10;
  double gae_lambda = 0.95;
  double gamma = 0.99;
  double topo_weight = 0.02;
  double mix = 0.70;  // weight of the stored GAE against a fresh one-step TD error
  std::size_t batch = 128;
  int updates_per_episode = 8;
  std::vector<int> hidden{64, 64};
  double init_log_std = -0.5;
  double min_log_std = -3.0;
  double max_log_std = 1.0;
  double max_grad_norm = 0.5;
  double value_coef = 0.5;
  bool normalize_advantages = true;

  void validate() const;
};

/// Shared decentralized Gaussian policy over the arm observation and a
/// centralized value function over the critic observation.
class ActorCritic {
 public:
  ActorCritic() = default;
  ActorCritic(int obs_dim, int critic_dim, int action_dim, const Hyperparameters& h,
              std::mt19937_64& rng);

  int obs_dim() const { return policy_.input_size(); }
  int critic_dim() const { return value_.input_size(); }
  int action_dim() const { return policy_.output_size(); }

  Eigen::VectorXd mean_action(const Eigen::VectorXd& obs) const;
  Eigen::VectorXd sample_action(const Eigen::VectorXd& obs, std::mt19937_64& rng,
                                double* log_prob) const;
  double log_prob(const Eigen::VectorXd& obs, const Eigen::VectorXd& action) const;
  double value(const Eigen::VectorXd& critic_obs) const;

  /// Policy network parameters followed by the per-dimension log std.
  Eigen::VectorXd actor_parameters() const;
  void set_actor_parameters(const Eigen::VectorXd& p);
  Eigen::VectorXd critic_parameters() const { return value_.parameters(); }
  void set_critic_parameters(const Eigen::VectorXd& p) { value_.set_parameters(p); }

  const Mlp& policy() const { return policy_; }
  const Mlp& value_net() const { return value_; }
  const Eigen::VectorXd& log_std() const { return log_std_; }

 private:
  Mlp policy_;
  Eigen::VectorXd log_std_;
  Mlp value_;
};

/// Column-per-sample training batch.
struct PolicyBatch {
  Eigen::MatrixXd obs;
  Eigen::MatrixXd actions;
  Eigen::MatrixXd critic_obs;
  Eigen::VectorXd old_log_prob;
  Eigen::VectorXd advantages;
  Eigen::VectorXd value_targets;
  Eigen::VectorXd risk;
  Eigen::VectorXd weights;  // importance weights; ones for uniform sampling
};

/// Loss terms, each a weighted batch mean:
///   policy = -mean w * min(r A, clip(r, 1 - eps, 1 + eps) A)
///   topo   = topo_weight * mean w * r * risk
///   value  = value_coef * mean w * (V - target)^2
/// with r = exp(log pi - old log pi). Gradients are with respect to the
/// actor parameters (policy, topo) and the critic parameters (value).
struct LossTerms {
  double policy = 0.0;
  double topo = 0.0;
  double value = 0.0;
  double clip_fraction = 0.0;
  double approx_kl = 0.0;
  Eigen::VectorXd grad_policy;
  Eigen::VectorXd grad_topo;
  Eigen::VectorXd grad_value;

  double total() const { return policy + topo + value; }
};

LossTerms evaluate_losses(const ActorCritic& net, const PolicyBatch& batch,
                          const Hyperparameters& h, bool with_gradients = true);

struct UpdateDiagnostics {
  bool skipped = false;    // non-finite loss, no parameters changed
  bool partial_batch = false;
  std::size_t batch_size = 0;
  double policy_loss = 0.0;
  double topo_loss = 0.0;
  double value_loss = 0.0;
  double clip_fraction = 0.0;
  double approx_kl = 0.0;
  double mean_td_error = 0.0;
};

/// Actor-critic pair with its optimizers.
class Learner {
 public:
  Learner() = default;
  Learner(int obs_dim, int critic_dim, int action_dim, Hyperparameters h, std::mt19937_64& rng);

  /// Samples a batch, applies one clipped-surrogate step to the actor and one
  /// regression step to the critic, and refreshes the sampled TD errors.
  UpdateDiagnostics update_policies(DualReplay& replay, std::mt19937_64& rng);

  /// Builds the training batch for `sample` from the current critic.
  PolicyBatch make_batch(const DualReplay& replay, const ReplaySample& sample) const;

  ActorCritic& net() { return net_; }
  const ActorCritic& net() const { return net_; }
  const Hyperparameters& hyper() const { return hyper_; }
  std::size_t skipped_updates() const { return skipped_; }

  std::string checkpoint_json() const;
  void load_checkpoint_json(const std::string& text);

 private:
  Hyperparameters hyper_;
  ActorCritic net_;
  Adam actor_opt_;
  Adam critic_opt_;
  std::size_t skipped_ = 0;
};

/// Generalized advantage estimates for one trajectory; `values` has one
/// more entry than `rewards` (bootstrap value, 0 when terminal).
std::vector<double> generalized_advantages(const std::vector<double>& rewards,
                                           const std::vector<double>& values,
                                           const std::vector<double>& discounts, double lambda);

}  // namespace untangle
