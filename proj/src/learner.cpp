#include "untangle/learner.hpp"

#include <json.hpp>

#include <cmath>
#include <algorithm>
#include <stdexcept>

namespace untangle {

namespace {

constexpr double kHalfLogTwoPi = 0.91893853320467274178;  // 0.5 * log(2 pi)
constexpr int kCheckpointVersion = 1;

std::vector<double> to_vector(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

Eigen::VectorXd from_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

void Hyperparameters::validate() const {
  auto fail = [](const char* what) { throw std::invalid_argument(what); };
  if (!(policy_lr > 0.0) || !(value_lr > 0.0)) fail("learning rates must be positive");
  if (!(clip > 0.0 && clip < 1.0)) fail("clip must lie in (0, 1)");
  if (gae_lambda < 0.0 || gae_lambda > 1.0) fail("gae_lambda must lie in [0, 1]");
  if (gamma < 0.0 || gamma > 1.0) fail("gamma must lie in [0, 1]");
  if (topo_weight < 0.0) fail("topo_weight must be non-negative");
  if (mix < 0.0 || mix > 1.0) fail("mix must lie in [0, 1]");
  if (batch == 0) fail("batch must be positive");
  if (updates_per_episode < 0) fail("updates_per_episode must be non-negative");
  for (int h : hidden) {
    if (h <= 0) fail("hidden sizes must be positive");
  }
  if (min_log_std > max_log_std) fail("log std bounds are inverted");
}

ActorCritic::ActorCritic(int obs_dim, int critic_dim, int action_dim, const Hyperparameters& h,
                         std::mt19937_64& rng) {
  std::vector<int> ps{obs_dim};
  ps.insert(ps.end(), h.hidden.begin(), h.hidden.end());
  ps.push_back(action_dim);
  policy_ = Mlp(ps, rng, 0.01);
  log_std_ = Eigen::VectorXd::Constant(action_dim, h.init_log_std);
  std::vector<int> vs{critic_dim};
  vs.insert(vs.end(), h.hidden.begin(), h.hidden.end());
  vs.push_back(1);
  value_ = Mlp(vs, rng, 1.0);
}

Eigen::VectorXd ActorCritic::mean_action(const Eigen::VectorXd& obs) const {
  return policy_.forward_one(obs);
}

Eigen::VectorXd ActorCritic::sample_action(const Eigen::VectorXd& obs, std::mt19937_64& rng,
                                           double* log_prob) const {
  const Eigen::VectorXd mu = mean_action(obs);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd a(mu.size());
  double lp = 0.0;
  for (Eigen::Index i = 0; i < mu.size(); ++i) {
    const double z = normal(rng);
    a(i) = mu(i) + std::exp(log_std_(i)) * z;
    lp += -0.5 * z * z - log_std_(i) - kHalfLogTwoPi;
  }
  if (log_prob) *log_prob = lp;
  return a;
}

double ActorCritic::log_prob(const Eigen::VectorXd& obs, const Eigen::VectorXd& action) const {
  const Eigen::VectorXd mu = mean_action(obs);
  double lp = 0.0;
  for (Eigen::Index i = 0; i < mu.size(); ++i) {
    const double z = (action(i) - mu(i)) / std::exp(log_std_(i));
    lp += -0.5 * z * z - log_std_(i) - kHalfLogTwoPi;
  }
  return lp;
}

double ActorCritic::value(const Eigen::VectorXd& critic_obs) const {
  return value_.forward_one(critic_obs)(0);
}

Eigen::VectorXd ActorCritic::actor_parameters() const {
  const Eigen::VectorXd p = policy_.parameters();
  Eigen::VectorXd out(p.size() + log_std_.size());
  out << p, log_std_;
  return out;
}

void ActorCritic::set_actor_parameters(const Eigen::VectorXd& p) {
  const auto n = static_cast<Eigen::Index>(policy_.parameter_count());
  if (p.size() != n + log_std_.size()) throw std::invalid_argument("actor parameter size mismatch");
  policy_.set_parameters(p.head(n));
  log_std_ = p.tail(log_std_.size());
}

LossTerms evaluate_losses(const ActorCritic& net, const PolicyBatch& batch,
                          const Hyperparameters& h, bool with_gradients) {
  LossTerms out;
  const Eigen::Index n = batch.obs.cols();
  if (n == 0) return out;
  const double inv_n = 1.0 / static_cast<double>(n);

  Mlp::Cache pcache;
  const Eigen::MatrixXd mu = net.policy().forward(batch.obs, with_gradients ? &pcache : nullptr);
  const Eigen::VectorXd& log_std = net.log_std();
  const Eigen::ArrayXd inv_var = (-2.0 * log_std.array()).exp();

  Eigen::VectorXd g_pol(n), g_topo(n);  // d loss / d log pi per sample
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::ArrayXd diff = (batch.actions.col(i) - mu.col(i)).array();
    const double lp =
        (-0.5 * diff.square() * inv_var - log_std.array() - kHalfLogTwoPi).sum();
    const double log_ratio = lp - batch.old_log_prob(i);
    const double ratio = std::exp(log_ratio);
    const double adv = batch.advantages(i);
    const double w = batch.weights(i);
    const double clipped_ratio = std::clamp(ratio, 1.0 - h.clip, 1.0 + h.clip);
    const double unclipped = ratio * adv;
    const double clipped = clipped_ratio * adv;
    const bool use_unclipped = unclipped <= clipped;
    out.policy -= w * std::min(unclipped, clipped) * inv_n;
    out.topo += h.topo_weight * w * ratio * batch.risk(i) * inv_n;
    if (!use_unclipped) out.clip_fraction += inv_n;
    out.approx_kl += (ratio - 1.0 - log_ratio) * inv_n;
    g_pol(i) = use_unclipped ? -w * adv * ratio * inv_n : 0.0;
    g_topo(i) = h.topo_weight * w * batch.risk(i) * ratio * inv_n;
  }

  Mlp::Cache vcache;
  const Eigen::MatrixXd v =
      net.value_net().forward(batch.critic_obs, with_gradients ? &vcache : nullptr);
  Eigen::MatrixXd g_v(1, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double err = v(0, i) - batch.value_targets(i);
    out.value += h.value_coef * batch.weights(i) * err * err * inv_n;
    g_v(0, i) = 2.0 * h.value_coef * batch.weights(i) * err * inv_n;
  }

  if (!with_gradients) return out;

  // d log pi / d mu = (a - mu) / sigma^2 ; d log pi / d log sigma = z^2 - 1.
  const Eigen::MatrixXd dlp_dmu =
      ((batch.actions - mu).array().colwise() * inv_var).matrix();
  const Eigen::MatrixXd z2 = ((batch.actions - mu).array().square().colwise() * inv_var).matrix();
  auto actor_grad = [&](const Eigen::VectorXd& coeff) {
    const Eigen::MatrixXd grad_out = dlp_dmu * coeff.asDiagonal();
    const Eigen::VectorXd gp = net.policy().backward(pcache, grad_out);
    const Eigen::VectorXd gs =
        (z2.array() - 1.0).matrix() * coeff;
    Eigen::VectorXd g(gp.size() + gs.size());
    g << gp, gs;
    return g;
  };
  out.grad_policy = actor_grad(g_pol);
  out.grad_topo = actor_grad(g_topo);
  out.grad_value = net.value_net().backward(vcache, g_v);
  return out;
}

Learner::Learner(int obs_dim, int critic_dim, int action_dim, Hyperparameters h,
                 std::mt19937_64& rng)
    : hyper_(std::move(h)) {
  hyper_.validate();
  net_ = ActorCritic(obs_dim, critic_dim, action_dim, hyper_, rng);
  actor_opt_ = Adam(static_cast<std::size_t>(net_.actor_parameters().size()), hyper_.policy_lr,
                    hyper_.max_grad_norm);
  critic_opt_ = Adam(static_cast<std::size_t>(net_.critic_parameters().size()), hyper_.value_lr,
                     hyper_.max_grad_norm);
}

PolicyBatch Learner::make_batch(const DualReplay& replay, const ReplaySample& sample) const {
  const auto n = static_cast<Eigen::Index>(sample.slots.size());
  PolicyBatch b;
  b.obs.resize(net_.obs_dim(), n);
  b.actions.resize(net_.action_dim(), n);
  b.critic_obs.resize(net_.critic_dim(), n);
  b.old_log_prob.resize(n);
  b.advantages.resize(n);
  b.value_targets.resize(n);
  b.risk.resize(n);
  b.weights.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Experience& e = replay.at(sample.slots[static_cast<std::size_t>(i)]);
    b.obs.col(i) = e.observation.cast<double>();
    b.actions.col(i) = e.action.cast<double>();
    b.critic_obs.col(i) = e.critic_observation.cast<double>();
    b.old_log_prob(i) = e.old_log_prob;
    const double v_now = net_.value(b.critic_obs.col(i));
    const double v_next = e.done ? 0.0 : net_.value(e.next_critic_observation.cast<double>());
    const double td_target = e.reward + e.discount * v_next;
    const double fresh_td = td_target - v_now;
    b.advantages(i) = hyper_.mix * e.gae + (1.0 - hyper_.mix) * fresh_td;
    b.value_targets(i) =
        hyper_.mix * (e.gae + e.value_at_collection) + (1.0 - hyper_.mix) * td_target;
    b.risk(i) = std::isfinite(e.topo_risk) ? e.topo_risk : 0.0;
    b.weights(i) = sample.weights[static_cast<std::size_t>(i)];
  }
  if (hyper_.normalize_advantages && n > 1) {
    const double mean = b.advantages.mean();
    const double sd = std::sqrt((b.advantages.array() - mean).square().mean());
    b.advantages = ((b.advantages.array() - mean) / (sd + 1e-8)).matrix();
  }
  return b;
}

UpdateDiagnostics Learner::update_policies(DualReplay& replay, std::mt19937_64& rng) {
  UpdateDiagnostics d;
  const ReplaySample sample = replay.sample(hyper_.batch, rng);
  d.partial_batch = sample.partial;
  d.batch_size = sample.slots.size();
  if (sample.slots.empty()) {
    d.skipped = true;
    return d;
  }
  const PolicyBatch batch = make_batch(replay, sample);
  const LossTerms loss = evaluate_losses(net_, batch, hyper_, true);
  d.policy_loss = loss.policy;
  d.topo_loss = loss.topo;
  d.value_loss = loss.value;
  d.clip_fraction = loss.clip_fraction;
  d.approx_kl = loss.approx_kl;
  if (!std::isfinite(loss.total()) || !loss.grad_policy.allFinite() ||
      !loss.grad_topo.allFinite() || !loss.grad_value.allFinite()) {
    d.skipped = true;
    ++skipped_;
    return d;
  }

  Eigen::VectorXd actor = net_.actor_parameters();
  actor_opt_.step(actor, loss.grad_policy + loss.grad_topo);
  const Eigen::Index k = net_.log_std().size();
  actor.tail(k) = actor.tail(k).cwiseMax(hyper_.min_log_std).cwiseMin(hyper_.max_log_std);
  net_.set_actor_parameters(actor);
  Eigen::VectorXd critic = net_.critic_parameters();
  critic_opt_.step(critic, loss.grad_value);
  net_.set_critic_parameters(critic);

  double td_sum = 0.0;
  for (const ReplaySlot& s : sample.slots) {
    const Experience& e = replay.at(s);
    const double v_now = net_.value(e.critic_observation.cast<double>());
    const double v_next = e.done ? 0.0 : net_.value(e.next_critic_observation.cast<double>());
    const double td = e.reward + e.discount * v_next - v_now;
    replay.update_td_error(s, td);
    td_sum += std::abs(td);
  }
  d.mean_td_error = td_sum / static_cast<double>(sample.slots.size());
  return d;
}

std::string Learner::checkpoint_json() const {
  nlohmann::json j;
  j["format"] = "untangle-checkpoint";
  j["version"] = kCheckpointVersion;
  j["obs_dim"] = net_.obs_dim();
  j["critic_dim"] = net_.critic_dim();
  j["action_dim"] = net_.action_dim();
  j["hidden"] = hyper_.hidden;
  j["actor"] = to_vector(net_.actor_parameters());
  j["critic"] = to_vector(net_.critic_parameters());
  j["actor_adam"] = {{"t", actor_opt_.steps()},
                     {"m", to_vector(actor_opt_.first_moment())},
                     {"v", to_vector(actor_opt_.second_moment())}};
  j["critic_adam"] = {{"t", critic_opt_.steps()},
                      {"m", to_vector(critic_opt_.first_moment())},
                      {"v", to_vector(critic_opt_.second_moment())}};
  j["skipped_updates"] = skipped_;
  return j.dump();
}

void Learner::load_checkpoint_json(const std::string& text) {
  const nlohmann::json j = nlohmann::json::parse(text);
  if (j.value("format", "") != "untangle-checkpoint" || j.value("version", 0) != kCheckpointVersion) {
    throw std::invalid_argument("unsupported checkpoint format or version");
  }
  if (j.at("obs_dim").get<int>() != net_.obs_dim() ||
      j.at("critic_dim").get<int>() != net_.critic_dim() ||
      j.at("action_dim").get<int>() != net_.action_dim() ||
      j.at("hidden").get<std::vector<int>>() != hyper_.hidden) {
    throw std::invalid_argument("checkpoint shape does not match the learner");
  }
  net_.set_actor_parameters(from_vector(j.at("actor").get<std::vector<double>>()));
  net_.set_critic_parameters(from_vector(j.at("critic").get<std::vector<double>>()));
  const auto& a = j.at("actor_adam");
  actor_opt_.restore(a.at("t").get<long>(), from_vector(a.at("m").get<std::vector<double>>()),
                     from_vector(a.at("v").get<std::vector<double>>()));
  const auto& c = j.at("critic_adam");
  critic_opt_.restore(c.at("t").get<long>(), from_vector(c.at("m").get<std::vector<double>>()),
                      from_vector(c.at("v").get<std::vector<double>>()));
  skipped_ = j.value("skipped_updates", std::size_t{0});
}

std::vector<double> generalized_advantages(const std::vector<double>& rewards,
                                           const std::vector<double>& values,
                                           const std::vector<double>& discounts, double lambda) {
  const std::size_t n = rewards.size();
  if (values.size() != n + 1 || discounts.size() != n) {
    throw std::invalid_argument("generalized_advantages: size mismatch");
  }
  std::vector<double> adv(n);
  double running = 0.0;
  for (std::size_t t = n; t-- > 0;) {
    const double delta = rewards[t] + discounts[t] * values[t + 1] - values[t];
    running = delta + discounts[t] * lambda * running;
    adv[t] = running;
  }
  return adv;
}

}  // namespace untangle
