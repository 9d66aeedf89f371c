#include "untangle/harness.hpp"

#include "untangle/scheduler.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace untangle {

namespace {

using nlohmann::json;

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  return splitmix(splitmix(splitmix(seed) ^ stream) ^ index);
}

constexpr std::uint64_t kTrainStream = 1;
constexpr std::uint64_t kEvalStream = 2;
constexpr std::uint64_t kLearnerStream = 3;

Eigen::VectorXf to_float(const Eigen::VectorXd& v) { return v.cast<float>(); }

json vec_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

json rates_json(const RateSummary& r) {
  return {{"entanglement_rate", r.entanglement}, {"success_rate", r.success},
          {"intervention_rate", r.intervention}, {"idle_rate", r.idle},
          {"task_completion_rate", r.task_completion},
          {"mean_reward", r.mean_reward},        {"episodes", r.episodes}};
}

json mean_std_json(const MeanStd& m) { return {{"mean", m.mean}, {"std", m.std}}; }

json step_record(std::uint64_t seed, const EpisodeSummary& ep, const Environment& env,
                 const StepInfo& info) {
  json arms = json::array();
  for (int j = 0; j < env.arm_count(); ++j) {
    const ArmStepRecord& a = info.arms[static_cast<std::size_t>(j)];
    json nodes = json::array();
    for (const Vec3& p : env.arms()[static_cast<std::size_t>(j)].centerline.points()) {
      nodes.push_back(vec_json(p));
    }
    arms.push_back({{"arm", j},
                    {"assignment", a.assignment ? json(to_string(*a.assignment)) : json(nullptr)},
                    {"decision", std::string(to_string(a.decision))},
                    {"lookahead_risk", a.lookahead_risk},
                    {"executed_risk", a.executed_risk},
                    {"scale", a.scale},
                    {"replan", a.replan_requested},
                    {"distance", a.distance_after},
                    {"on_target", a.on_target},
                    {"reward", a.reward},
                    {"nodes", std::move(nodes)}});
  }
  json constraints = json::object();
  for (const auto& c : info.constraints) {
    const json margin = std::isfinite(c.margin) ? json(c.margin) : json(nullptr);
    constraints[c.name] = {{"ok", c.satisfied}, {"margin", margin}};
  }
  json started = json::array();
  for (const auto& p : info.started) started.push_back(to_string(p));
  json completed = json::array();
  for (const auto& p : info.completed) completed.push_back(to_string(p));
  return {{"type", "step"},
          {"seed", seed},
          {"phase", ep.phase},
          {"episode", ep.episode},
          {"step", info.step},
          {"max_abs_linking", info.topo.max_abs_linking()},
          {"braid_length", info.topo.braid_length},
          {"braid_word", info.braid_word},
          {"topo_risk", info.topo.risk},
          {"entangled", info.entangled},
          {"concurrency_budget", info.concurrency_budget},
          {"discount", info.discount},
          {"scheduler_reward", info.scheduler_reward},
          {"started", std::move(started)},
          {"completed", std::move(completed)},
          {"obstacle_violations", info.obstacle_violations},
          {"constraints", std::move(constraints)},
          {"arms", std::move(arms)}};
}

json episode_json(const EpisodeSummary& e) {
  return {{"type", "episode"},
          {"seed", e.seed},
          {"phase", e.phase},
          {"episode", e.episode},
          {"fixture", e.fixture},
          {"steps", e.steps},
          {"entangled", e.entangled},
          {"aborted", e.aborted},
          {"tasks_completed", e.tasks_completed},
          {"tasks_total", e.tasks_total},
          {"processes_completed", e.processes_completed},
          {"processes_total", e.processes_total},
          {"arm_steps", e.arm_steps},
          {"interventions", e.interventions},
          {"idle_arm_steps", e.idle_arm_steps},
          {"reward", e.reward},
          {"scheduler_return", e.scheduler_return},
          {"max_abs_linking", e.max_abs_linking},
          {"max_braid_length", e.max_braid_length},
          {"obstacle_violations", e.obstacle_violations},
          {"omega", e.omega},
          {"samples", e.samples}};
}

struct ArmTrajectory {
  std::vector<Eigen::VectorXd> obs;
  std::vector<Eigen::VectorXd> critic_obs;
  std::vector<Eigen::VectorXd> actions;
  std::vector<double> log_probs;
  std::vector<double> rewards;
  std::vector<double> discounts;
  std::vector<double> risks;
  std::vector<bool> entangled;
};

class SeedRunner {
 public:
  SeedRunner(const RunConfig& cfg, std::uint64_t seed)
      : cfg_(cfg),
        seed_(seed),
        scenario_(cfg.scenario_for(seed)),
        env_(scenario_, EnvSwitches{cfg.ablation.safety_layer, cfg.ablation.hierarchical_control}),
        scheduler_(cfg.ablation.hierarchical_control),
        rng_(stream_seed(seed, kLearnerStream, 0)),
        replay_(replay_config(cfg), scenario_.risk) {
    Hyperparameters h = cfg.hyper;
    if (!cfg.ablation.dual_replay) h.topo_weight = 0.0;
    learner_ = Learner(env_.obs_dim(), env_.critic_dim(), Environment::kActionDim, h, rng_);
  }

  EpisodeSummary run_episode(const std::string& phase, int index, bool learn,
                             std::vector<std::string>* trace, RunAudit& audit) {
    const std::uint64_t stream = phase == "train" ? kTrainStream : kEvalStream;
    env_.reset(stream_seed(seed_, stream, static_cast<std::uint64_t>(index)), index);
    scheduler_.reset(env_.arm_count());
    const auto n = static_cast<std::size_t>(env_.arm_count());

    EpisodeSummary ep;
    ep.seed = seed_;
    ep.phase = phase;
    ep.episode = index;
    ep.fixture = env_.fixture().name;
    ep.tasks_total = static_cast<int>(env_.tasks().tasks().size());
    ep.processes_total = static_cast<int>(env_.tasks().process_count());

    std::vector<ArmTrajectory> traj(n);
    StepInfo info;
    while (!env_.done()) {
      const auto obs = env_.observations();
      const auto critic = env_.critic_observations();
      const bool unfinished = !env_.tasks().all_complete();
      const SchedulerAction sa = scheduler_.decide(env_);
      std::vector<ArmAction> actions;
      actions.reserve(n);
      for (std::size_t j = 0; j < n; ++j) {
        Eigen::VectorXd a;
        double logp = 0.0;
        if (learn) {
          a = learner_.net().sample_action(obs[j], rng_, &logp);
        } else {
          a = learner_.net().mean_action(obs[j]);
        }
        actions.push_back(env_.action_from_command(static_cast<int>(j), a));
        if (learn) {
          traj[j].obs.push_back(obs[j]);
          traj[j].critic_obs.push_back(critic[j]);
          traj[j].actions.push_back(std::move(a));
          traj[j].log_probs.push_back(logp);
        }
      }
      info = env_.step(sa, actions);
      audit_step(info, audit);

      const double team_share = info.scheduler_reward / static_cast<double>(n);
      double mean_reward = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const ArmStepRecord& rec = info.arms[j];
        const double signal = rec.reward + team_share;
        mean_reward += signal;
        ++ep.arm_steps;
        if (rec.decision != ScreeningDecision::pass) ++ep.interventions;
        if (unfinished && !rec.assignment) ++ep.idle_arm_steps;
        if (learn) {
          traj[j].rewards.push_back(signal);
          traj[j].discounts.push_back(info.discount);
          traj[j].risks.push_back(info.topo.risk);
          traj[j].entangled.push_back(info.entangled);
        }
      }
      ep.reward += mean_reward / static_cast<double>(n);
      ep.scheduler_return += info.scheduler_reward;
      ep.processes_completed += static_cast<int>(info.completed.size());
      ep.max_abs_linking = std::max(ep.max_abs_linking, info.topo.max_abs_linking());
      ep.max_braid_length = std::max(ep.max_braid_length, info.topo.braid_length);
      ep.obstacle_violations += info.obstacle_violations;
      if (trace) trace->push_back(step_record(seed_, ep, env_, info).dump());
    }
    ep.steps = info.step;
    ep.entangled = info.entangled;
    ep.aborted = info.aborted;
    ep.tasks_completed = env_.tasks().completed_tasks();
    if (ep.aborted) ++audit.aborted_episodes;

    ++audit.schedule_checks;
    if (!validate_schedule_fixture(env_.process_intervals(), env_.fixture()).pass) {
      ++audit.schedule_failures;
    }
    if (trace) {
      for (const auto& iv : env_.process_intervals()) {
        trace->push_back(json{{"type", "process"},
                              {"seed", seed_},
                              {"phase", phase},
                              {"episode", index},
                              {"fixture", ep.fixture},
                              {"task", iv.task},
                              {"process", iv.process},
                              {"start", iv.start},
                              {"end", iv.end}}
                             .dump());
      }
    }

    if (learn) {
      store(traj, info.terminated);
      ep.samples = static_cast<long>(n) * ep.steps;
      for (int u = 0; u < learner_.hyper().updates_per_episode; ++u) {
        learner_.update_policies(replay_, rng_);
      }
    }
    ep.omega = replay_.omega();
    if (trace) trace->push_back(episode_json(ep).dump());
    return ep;
  }

  std::string checkpoint(int episode) const {
    json j;
    j["format"] = "untangle-run-checkpoint";
    j["version"] = 1;
    j["seed"] = seed_;
    j["episode"] = episode;
    j["replay"] = {{"n_entangle", replay_.n_entangle()},
                   {"n_total", replay_.n_total()},
                   {"non_finite_risk", replay_.non_finite_risk_count()},
                   {"max_priority", replay_.max_priority()},
                   {"omega", replay_.omega()}};
    j["learner"] = json::parse(learner_.checkpoint_json());
    return j.dump();
  }

 private:
  static ReplayConfig replay_config(const RunConfig& cfg) {
    ReplayConfig r = cfg.replay;
    r.prioritized = cfg.ablation.dual_replay;
    return r;
  }

  void audit_step(const StepInfo& info, RunAudit& audit) const {
    ++audit.steps;
    const double high = scenario_.risk.theta_high;
    for (const auto& a : info.arms) {
      if (!env_.switches().safety_layer) continue;
      ++audit.screened_actions;
      const bool risky = !(a.lookahead_risk < high) || !(a.executed_risk < high);
      if (risky && !a.replan_requested) ++audit.high_risk_without_replan;
    }
    bool kinematic = true;
    bool assignment = true;
    for (std::size_t c = 0; c < info.constraints.size(); ++c) {
      if (c >= 1 && c <= 4) kinematic = kinematic && info.constraints[c].satisfied;
      if (c >= 5) assignment = assignment && info.constraints[c].satisfied;
    }
    if (!kinematic) ++audit.kinematic_violations;
    if (!assignment) ++audit.assignment_violations;
  }

  void store(const std::vector<ArmTrajectory>& traj, bool terminal) {
    const auto final_critic = env_.critic_observations();
    const auto final_obs = env_.observations();
    for (std::size_t j = 0; j < traj.size(); ++j) {
      const ArmTrajectory& t = traj[j];
      const std::size_t len = t.rewards.size();
      std::vector<double> values(len + 1, 0.0);
      for (std::size_t k = 0; k < len; ++k) values[k] = learner_.net().value(t.critic_obs[k]);
      values[len] = terminal ? 0.0 : learner_.net().value(final_critic[j]);
      const std::vector<double> adv =
          generalized_advantages(t.rewards, values, t.discounts, learner_.hyper().gae_lambda);
      for (std::size_t k = 0; k < len; ++k) {
        const bool last = k + 1 == len;
        Experience e;
        e.observation = to_float(t.obs[k]);
        e.action = to_float(t.actions[k]);
        e.reward = t.rewards[k];
        e.next_observation = to_float(last ? final_obs[j] : t.obs[k + 1]);
        e.done = last && terminal;
        e.topo_risk = t.risks[k];
        e.critic_observation = to_float(t.critic_obs[k]);
        e.next_critic_observation = to_float(last ? final_critic[j] : t.critic_obs[k + 1]);
        e.discount = t.discounts[k];
        e.old_log_prob = t.log_probs[k];
        e.gae = adv[k];
        e.value_at_collection = values[k];
        e.entangled = t.entangled[k];
        replay_.classify_and_store(std::move(e));
      }
    }
  }

  const RunConfig& cfg_;
  std::uint64_t seed_;
  ScenarioConfig scenario_;
  Environment env_;
  Scheduler scheduler_;
  std::mt19937_64 rng_;
  DualReplay replay_;
  Learner learner_;
};

}  // namespace

Ablation parse_ablation(std::string_view list) {
  Ablation a;
  std::string s(list);
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(' '));
    item.erase(item.find_last_not_of(' ') + 1);
    if (item.empty() || item == "none") continue;
    if (item == "dual_replay") {
      a.dual_replay = false;
    } else if (item == "safety_layer") {
      a.safety_layer = false;
    } else if (item == "hierarchical_control") {
      a.hierarchical_control = false;
    } else {
      throw std::invalid_argument("unknown ablation '" + item + "'");
    }
  }
  return a;
}

std::string ablation_label(const Ablation& a) {
  std::string out;
  const auto add = [&out](const char* name) {
    if (!out.empty()) out += ",";
    out += name;
  };
  if (!a.dual_replay) add("dual_replay");
  if (!a.safety_layer) add("safety_layer");
  if (!a.hierarchical_control) add("hierarchical_control");
  return out.empty() ? "none" : out;
}

int RunConfig::default_episodes(Density d) { return d == Density::high ? 5000 : 2000; }

void RunConfig::validate() const {
  if (seeds.empty()) throw std::invalid_argument("at least one seed is required");
  if (episodes < 0) throw std::invalid_argument("episodes must be non-negative");
  if (eval_episodes < 0) throw std::invalid_argument("eval_episodes must be non-negative");
  if (trace_episodes < 0) throw std::invalid_argument("trace_episodes must be non-negative");
  if (checkpoint_every < 0) throw std::invalid_argument("checkpoint_every must be non-negative");
  if (jobs < 1) throw std::invalid_argument("jobs must be positive");
  hyper.validate();
  DualReplay probe(replay, scenario_override ? scenario_override->risk : RiskCoeffs{});
  if (scenario_override) {
    scenario_override->validate();
  } else {
    make_scenario(scenario, seeds.front()).validate();
  }
}

ScenarioConfig RunConfig::scenario_for(std::uint64_t seed) const {
  return scenario_override ? *scenario_override : make_scenario(scenario, seed);
}

SeedResult run_seed(const RunConfig& config, std::uint64_t seed, const ProgressCallback& progress,
                    const std::optional<std::filesystem::path>& checkpoint_dir) {
  SeedRunner runner(config, seed);
  SeedResult r;
  r.seed = seed;
  const auto write_checkpoint = [&](int episode) {
    if (!checkpoint_dir) return;
    std::filesystem::create_directories(*checkpoint_dir);
    std::ofstream out(*checkpoint_dir / ("seed" + std::to_string(seed) + "_ep" +
                                         std::to_string(episode) + ".json"));
    out << runner.checkpoint(episode) << '\n';
  };
  for (int e = 0; e < config.episodes; ++e) {
    r.train.push_back(runner.run_episode("train", e, true, nullptr, r.audit));
    if (progress) progress(seed, r.train.back());
    if (config.checkpoint_every > 0 && (e + 1) % config.checkpoint_every == 0) {
      write_checkpoint(e + 1);
    }
  }
  for (int e = 0; e < config.eval_episodes; ++e) {
    std::vector<std::string>* trace = e < config.trace_episodes ? &r.trace_lines : nullptr;
    r.eval.push_back(runner.run_episode("eval", e, false, trace, r.audit));
    if (progress) progress(seed, r.eval.back());
  }
  r.train_rates = summarize(r.train);
  r.eval_rates = summarize(r.eval);
  std::vector<double> rewards;
  std::vector<long> samples;
  for (const auto& e : r.train) {
    rewards.push_back(e.reward);
    samples.push_back(e.samples);
  }
  r.convergence_episode = convergence_episode(rewards);
  r.reward_auc = reward_auc_per_kilosample(rewards, samples);
  r.checkpoint = runner.checkpoint(config.episodes);
  return r;
}

RunReport run(const RunConfig& config, const ProgressCallback& progress,
              const std::optional<std::filesystem::path>& checkpoint_dir) {
  config.validate();
  RunReport report;
  report.config = config;
  report.seeds.resize(config.seeds.size());
  std::vector<std::exception_ptr> errors(config.seeds.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < config.seeds.size(); i = next++) {
      try {
        report.seeds[i] = run_seed(config, config.seeds[i], progress, checkpoint_dir);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const auto jobs = std::min<std::size_t>(static_cast<std::size_t>(config.jobs), config.seeds.size());
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < jobs; ++t) pool.emplace_back(worker);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return report;
}

ReportMetrics report_metrics(const RunReport& r) {
  std::vector<double> ent, succ, interv, idle, conv, auc, reward;
  for (const auto& s : r.seeds) {
    ent.push_back(s.eval_rates.entanglement);
    succ.push_back(s.eval_rates.success);
    interv.push_back(s.eval_rates.intervention);
    idle.push_back(s.eval_rates.idle);
    conv.push_back(s.convergence_episode);
    auc.push_back(s.reward_auc);
    reward.push_back(s.eval_rates.mean_reward);
  }
  return {mean_std(ent),  mean_std(succ), mean_std(interv), mean_std(idle),
          mean_std(conv), mean_std(auc),  mean_std(reward)};
}

std::string metrics_json(const RunReport& r) {
  const ReportMetrics m = report_metrics(r);
  json seeds = json::array();
  RunAudit total;
  std::vector<double> t_ent, t_succ, t_interv, t_idle, t_reward;
  for (const auto& s : r.seeds) {
    const RunAudit& a = s.audit;
    seeds.push_back({{"seed", s.seed},
                     {"eval", rates_json(s.eval_rates)},
                     {"train", rates_json(s.train_rates)},
                     {"convergence_episode", s.convergence_episode},
                     {"reward_auc_per_1e3_samples", s.reward_auc},
                     {"audit",
                      {{"steps", a.steps},
                       {"screened_actions", a.screened_actions},
                       {"high_risk_without_replan", a.high_risk_without_replan},
                       {"assignment_violations", a.assignment_violations},
                       {"kinematic_violations", a.kinematic_violations},
                       {"schedule_checks", a.schedule_checks},
                       {"schedule_failures", a.schedule_failures},
                       {"aborted_episodes", a.aborted_episodes}}}});
    total.steps += a.steps;
    total.screened_actions += a.screened_actions;
    total.high_risk_without_replan += a.high_risk_without_replan;
    total.assignment_violations += a.assignment_violations;
    total.kinematic_violations += a.kinematic_violations;
    total.schedule_checks += a.schedule_checks;
    total.schedule_failures += a.schedule_failures;
    total.aborted_episodes += a.aborted_episodes;
    t_ent.push_back(s.train_rates.entanglement);
    t_succ.push_back(s.train_rates.success);
    t_interv.push_back(s.train_rates.intervention);
    t_idle.push_back(s.train_rates.idle);
    t_reward.push_back(s.train_rates.mean_reward);
  }
  json seed_list = json::array();
  for (auto s : r.config.seeds) seed_list.push_back(s);
  const json doc = {
      {"format", "untangle-metrics"},
      {"version", 1},
      {"scenario", std::string(to_string(r.config.scenario))},
      {"seeds", seed_list},
      {"episodes", r.config.episodes},
      {"eval_episodes", r.config.eval_episodes},
      {"ablation",
       {{"dual_replay", r.config.ablation.dual_replay},
        {"safety_layer", r.config.ablation.safety_layer},
        {"hierarchical_control", r.config.ablation.hierarchical_control}}},
      {"metrics",
       {{"entanglement_rate", mean_std_json(m.entanglement_rate)},
        {"success_rate", mean_std_json(m.success_rate)},
        {"intervention_rate", mean_std_json(m.intervention_rate)},
        {"idle_rate", mean_std_json(m.idle_rate)},
        {"convergence_episodes", mean_std_json(m.convergence_episodes)},
        {"reward_auc_per_1e3_samples", mean_std_json(m.reward_auc)},
        {"mean_reward", mean_std_json(m.mean_reward)}}},
      {"training",
       {{"entanglement_rate", mean_std_json(mean_std(t_ent))},
        {"success_rate", mean_std_json(mean_std(t_succ))},
        {"intervention_rate", mean_std_json(mean_std(t_interv))},
        {"idle_rate", mean_std_json(mean_std(t_idle))},
        {"mean_reward", mean_std_json(mean_std(t_reward))}}},
      {"audit",
       {{"steps", total.steps},
        {"screened_actions", total.screened_actions},
        {"high_risk_without_replan", total.high_risk_without_replan},
        {"assignment_violations", total.assignment_violations},
        {"kinematic_violations", total.kinematic_violations},
        {"schedule_checks", total.schedule_checks},
        {"schedule_failures", total.schedule_failures},
        {"aborted_episodes", total.aborted_episodes}}},
      {"per_seed", seeds}};
  return doc.dump(2) + "\n";
}

std::string curve_csv(const RunReport& r) {
  std::ostringstream out;
  out.precision(10);
  out << "seed,episode,reward,mean_reward,entanglement_rate,intervention_rate,success_rate,omega\n";
  for (const auto& s : r.seeds) {
    std::vector<double> reward, entangled;
    for (const auto& e : s.train) {
      reward.push_back(e.reward);
      entangled.push_back(e.entangled ? 100.0 : 0.0);
    }
    const auto reward_ma = moving_average(reward, 100);
    const auto ent_ma = moving_average(entangled, 100);
    for (std::size_t i = 0; i < s.train.size(); ++i) {
      const EpisodeSummary& e = s.train[i];
      const double interv =
          e.arm_steps > 0 ? 100.0 * static_cast<double>(e.interventions) / e.arm_steps : 0.0;
      const double succ =
          e.processes_total > 0 ? 100.0 * e.processes_completed / e.processes_total : 0.0;
      out << s.seed << ',' << e.episode << ',' << e.reward << ',' << reward_ma[i] << ','
          << ent_ma[i] << ',' << interv << ',' << succ << ',' << e.omega << '\n';
    }
  }
  return out.str();
}

std::string episode_record(const EpisodeSummary& e) { return episode_json(e).dump(); }

std::string trace_jsonl(const RunReport& r) {
  std::string out;
  for (const auto& s : r.seeds) {
    for (const auto& e : s.train) out += episode_json(e).dump() + "\n";
    for (const auto& line : s.trace_lines) out += line + "\n";
    for (std::size_t i = static_cast<std::size_t>(r.config.trace_episodes); i < s.eval.size(); ++i) {
      out += episode_json(s.eval[i]).dump() + "\n";
    }
  }
  return out;
}

void write_artifacts(const RunReport& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir / "checkpoints");
  const auto write = [&dir](const char* name, const std::string& text) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw std::runtime_error(std::string("cannot write ") + name);
    out << text;
  };
  write("metrics.json", metrics_json(r));
  write("curve.csv", curve_csv(r));
  write("trace.jsonl", trace_jsonl(r));
  for (const auto& s : r.seeds) {
    std::ofstream out(dir / "checkpoints" / ("seed" + std::to_string(s.seed) + "_final.json"));
    out << s.checkpoint << '\n';
  }
}

std::vector<TracedSchedule> read_traced_schedules(std::istream& in) {
  std::vector<TracedSchedule> groups;
  std::map<std::string, std::size_t> index;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = "trace line " + std::to_string(lineno) + ": ";
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw std::runtime_error(where + e.what());
    }
    if (!j.is_object()) throw std::runtime_error(where + "expected an object");
    if (j.contains("type") && j["type"] != "process") continue;
    std::string key;
    if (j.contains("episode")) {
      key = std::to_string(j.value("seed", std::uint64_t{0})) + "/" + j.value("phase", "") + "/" +
            std::to_string(j.at("episode").get<int>());
    }
    auto [it, fresh] = index.try_emplace(key, groups.size());
    if (fresh) groups.push_back({key, j.value("fixture", ""), {}});
    try {
      groups[it->second].intervals.push_back({j.at("task").get<int>(), j.at("process").get<int>(),
                                              j.at("start").get<int>(), j.at("end").get<int>()});
    } catch (const json::exception& e) {
      throw std::runtime_error(where + e.what());
    }
  }
  return groups;
}

}  // namespace untangle
