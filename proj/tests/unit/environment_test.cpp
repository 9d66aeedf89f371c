#include "untangle/environment.hpp"
#include "untangle/scheduler.hpp"

#include <gtest/gtest.h>

#include <random>

namespace untangle {
namespace {

std::vector<ArmAction> zero_actions(const Environment& env) {
  std::vector<ArmAction> out;
  for (const auto& a : env.arms()) out.push_back(ArmAction::zero(a.centerline.size()));
  return out;
}

std::vector<ArmAction> random_actions(const Environment& env, std::mt19937_64& rng, double scale) {
  std::normal_distribution<double> g(0.0, scale);
  std::vector<ArmAction> out;
  for (int j = 0; j < env.arm_count(); ++j) {
    Eigen::VectorXd cmd(3);
    cmd << g(rng), g(rng), g(rng);
    // Bias toward the arm's current target so the arms actually travel.
    const Vec3 to_target = env.target_of(j) - env.arms()[static_cast<std::size_t>(j)].centerline.back();
    cmd += 3.0 * to_target;
    out.push_back(env.action_from_command(j, cmd));
  }
  return out;
}

// Every target sits on arm 0's rest tip, so an arm that holds still at
// home is on target for any process.
ScenarioConfig home_targets_scenario() {
  ScenarioConfig c = make_scenario(Density::low, 5);
  const Vec3 tip = rest_centerline(c, 0).back();
  for (auto& t : c.workspace.targets) t = tip;
  c.target_jitter = 0.0;
  c.fixture = "v1";
  return c;
}

TEST(Environment, FreshResetSatisfiesAllConstraints) {
  for (Density d : {Density::low, Density::medium, Density::high}) {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      Environment env(make_scenario(d, seed), {});
      env.reset(seed);
      const auto cs = env.check_constraints();
      ASSERT_EQ(cs.size(), 8u);
      for (const auto& c : cs) EXPECT_TRUE(c.satisfied) << c.name << " margin " << c.margin;
      EXPECT_TRUE(env.braid().empty());
      EXPECT_EQ(env.current_step(), 0);
    }
  }
}

TEST(Environment, ScenarioSizes) {
  const int arms[] = {4, 6, 10};
  const int targets[] = {4, 6, 8};
  const int obstacles[] = {6, 12, 24};
  int k = 0;
  for (Density d : {Density::low, Density::medium, Density::high}) {
    const ScenarioConfig c = make_scenario(d, 7);
    EXPECT_EQ(c.arms, arms[k]);
    EXPECT_EQ(static_cast<int>(c.workspace.targets.size()), targets[k]);
    EXPECT_EQ(static_cast<int>(c.workspace.obstacles.size()), obstacles[k]);
    EXPECT_EQ(c.arm_radius, 0.05);
    EXPECT_EQ(c.limits.dt, 0.1);
    EXPECT_EQ(c.reach_radius, 0.05);
    ++k;
  }
  EXPECT_EQ(parse_density("med"), Density::medium);
  EXPECT_THROW(parse_density("dense"), std::invalid_argument);
}

TEST(Environment, ScenarioJsonRoundTrip) {
  const ScenarioConfig c = make_scenario(Density::medium, 4);
  const ScenarioConfig back = ScenarioConfig::from_json_text(c.to_json_text());
  EXPECT_EQ(back.to_json_text(), c.to_json_text());
  EXPECT_THROW(ScenarioConfig::from_json_text("{\"arms\": 1}"), std::invalid_argument);
  EXPECT_THROW(ScenarioConfig::from_json_text("{"), std::invalid_argument);
}

TEST(Environment, ZeroActionsAreAFixedPoint) {
  ScenarioConfig c = make_scenario(Density::low, 2);
  c.rewards.kappa = 0.0;
  Environment env(c, {});
  env.reset(2);
  const auto before = env.arms();
  const Eigen::VectorXd q0 = env.joints(0);
  const StepInfo info = env.step(SchedulerAction{}, zero_actions(env));
  EXPECT_EQ(env.current_step(), 1);
  for (std::size_t j = 0; j < before.size(); ++j) {
    EXPECT_EQ(env.arms()[j].centerline.points(), before[j].centerline.points());
    EXPECT_EQ(env.arms()[j].velocities, before[j].velocities);
    EXPECT_EQ(info.arms[j].decision, ScreeningDecision::pass);
    EXPECT_FALSE(info.arms[j].commanded);
    EXPECT_EQ(info.arms[j].reward, -c.rewards.step_penalty);
  }
  EXPECT_EQ(env.joints(0), q0);
  EXPECT_TRUE(env.braid().empty());
  EXPECT_TRUE(info.completed.empty());
  EXPECT_NEAR(info.scheduler_reward, -c.rewards.beta * info.topo.risk, 1e-15);

  // With the default local penalty the only other term is the arm's own risk.
  Environment env2(make_scenario(Density::low, 2), {});
  env2.reset(2);
  const StepInfo info2 = env2.step(SchedulerAction{}, zero_actions(env2));
  for (const auto& r : info2.arms) {
    EXPECT_NEAR(r.reward, -c.rewards.step_penalty - r.local_risk, 1e-15);
  }
}

TEST(Environment, TaskThreeProgressAndWait) {
  const ScenarioConfig c = home_targets_scenario();
  Environment env(c, {});
  env.reset(1);
  SchedulerAction first;
  first.assignments.push_back({0, ProcessRef{2, 0}});
  int completed_at = 0;
  double progress_prev = 0.0;
  for (int t = 1; t <= 20 && completed_at == 0; ++t) {
    SchedulerAction a = t == 1 ? first : SchedulerAction{};
    if (env.tasks().complete({2, 0}) && !env.allocation().of(0) && !env.process_started({2, 1})) {
      a.assignments.push_back({0, ProcessRef{2, 1}});
    }
    const StepInfo info = env.step(a, zero_actions(env));
    for (const auto& c6 : info.constraints) EXPECT_TRUE(c6.satisfied) << c6.name;
    if (t <= 5) {
      const double p = env.tasks().progress({2, 0});
      EXPECT_NEAR(p - progress_prev, 1.0 / 5.0, 1e-12);
      progress_prev = p;
    }
    if (t == 5) {
      ASSERT_EQ(info.completed.size(), 1u);
      const double throughput = 1.0 / c.arms;
      EXPECT_NEAR(info.scheduler_reward, 10.0 + throughput - info.topo.risk, 1e-12);
    }
    if (env.tasks().task_complete(2)) completed_at = t;
  }
  // Five steps of P1, the two-step wait of v1, three steps of P2.
  EXPECT_EQ(completed_at, 10);
  EXPECT_GE(completed_at, 8);
  ASSERT_EQ(env.process_intervals().size(), 2u);
  EXPECT_EQ(env.process_intervals()[0], (ProcessInterval{3, 1, 1, 5}));
  EXPECT_EQ(env.process_intervals()[1], (ProcessInterval{3, 2, 8, 10}));
  EXPECT_TRUE(validate_schedule_fixture(env.process_intervals(), env.fixture()).pass);
}

TEST(Environment, AssignmentsAreGated) {
  Environment env(home_targets_scenario(), {});
  env.reset(1);
  SchedulerAction a;
  a.assignments.push_back({0, ProcessRef{2, 1}});  // predecessor incomplete
  a.assignments.push_back({1, ProcessRef{2, 0}});
  a.assignments.push_back({2, ProcessRef{2, 0}});  // already held
  a.assignments.push_back({9, ProcessRef{0, 0}});  // no such arm
  const StepInfo info = env.step(a, zero_actions(env));
  EXPECT_EQ(info.rejected_assignments, 3);
  EXPECT_EQ(env.allocation().holder({2, 0}), 1);
}

TEST(Environment, ForcedViolationsAreReported) {
  ScenarioConfig c = make_scenario(Density::low, 3);
  const Polyline rest = rest_centerline(c, 0);
  c.workspace.obstacles.push_back({rest[5], 0.02});
  Environment env(c, {});
  env.reset(3);
  auto cs = env.check_constraints();
  EXPECT_FALSE(cs[0].satisfied);
  EXPECT_NEAR(cs[0].margin, -(0.02 + c.arm_radius), 1e-12);

  Environment clean(make_scenario(Density::low, 3), {});
  clean.reset(3);
  clean.force_assignment(0, ProcessRef{0, 0});
  clean.force_assignment(1, ProcessRef{0, 0});
  cs = clean.check_constraints();
  EXPECT_EQ(cs[6].name, "C7");
  EXPECT_FALSE(cs[6].satisfied);
  EXPECT_TRUE(cs[7].satisfied);
}

TEST(Environment, RandomRolloutKeepsHardConstraints) {
  for (bool safety : {true, false}) {
    Environment env(make_scenario(Density::low, 11), {safety, true});
    Scheduler sched(true);
    std::mt19937_64 rng(12);
    env.reset(4);
    sched.reset(env.arm_count());
    std::vector<double> progress = env.tasks().progress_vector();
    int steps = 0;
    while (!env.done()) {
      const StepInfo info = env.step(sched.decide(env), random_actions(env, rng, 0.5));
      ++steps;
      for (std::size_t k = 1; k < info.constraints.size(); ++k) {
        EXPECT_TRUE(info.constraints[k].satisfied) << info.constraints[k].name << " step " << steps;
      }
      for (const auto& r : info.arms) {
        if (!safety) {
          EXPECT_EQ(r.decision, ScreeningDecision::pass);
          EXPECT_FALSE(r.replan_requested);
        }
        if (r.executed_risk >= env.config().risk.theta_high) EXPECT_TRUE(r.replan_requested);
      }
      EXPECT_LE(info.topo.braid_length, static_cast<int>(env.braid().length()));
      EXPECT_EQ(info.topo.braid_length, static_cast<int>(simplified_length(env.braid())));
      const auto now = env.tasks().progress_vector();
      for (std::size_t i = 0; i < now.size(); ++i) EXPECT_GE(now[i], progress[i]);
      progress = now;
    }
    EXPECT_GT(steps, 0);
    EXPECT_TRUE(validate_schedule_fixture(env.process_intervals(), env.fixture()).pass);
  }
}

TEST(Environment, DeterministicForSeedAndActions) {
  auto run = [] {
    Environment env(make_scenario(Density::medium, 21), {});
    Scheduler sched(true);
    std::mt19937_64 rng(22);
    env.reset(9, 2);
    sched.reset(env.arm_count());
    std::vector<std::vector<Vec3>> tips;
    std::string words;
    for (int t = 0; t < 60 && !env.done(); ++t) {
      const StepInfo info = env.step(sched.decide(env), random_actions(env, rng, 1.0));
      words += info.braid_word + "|";
      for (const auto& a : env.arms()) tips.push_back(a.centerline.points());
    }
    return std::make_pair(tips, words);
  };
  const auto a = run();
  const auto b = run();
  EXPECT_EQ(a.first, b.first);
  EXPECT_EQ(a.second, b.second);
}

TEST(Environment, RejectsMalformedActions) {
  Environment env(make_scenario(Density::low, 1), {});
  env.reset(1);
  auto acts = zero_actions(env);
  acts.pop_back();
  EXPECT_THROW(env.step({}, acts), std::invalid_argument);
  acts = zero_actions(env);
  acts[0].node_velocities.pop_back();
  EXPECT_THROW(env.step({}, acts), std::invalid_argument);
  EXPECT_EQ(env.current_step(), 0);
}

TEST(Environment, ObservationShapes) {
  Environment env(make_scenario(Density::high, 1), {});
  env.reset(1);
  const auto obs = env.observations();
  const auto crit = env.critic_observations();
  ASSERT_EQ(static_cast<int>(obs.size()), env.arm_count());
  for (const auto& o : obs) {
    EXPECT_EQ(o.size(), env.obs_dim());
    EXPECT_TRUE(o.allFinite());
  }
  for (const auto& o : crit) {
    EXPECT_EQ(o.size(), env.critic_dim());
    EXPECT_TRUE(o.allFinite());
  }
  EXPECT_GT(env.critic_dim(), env.obs_dim());
}

TEST(Environment, CommandMappingAndRetraction) {
  Environment env(make_scenario(Density::low, 1), {});
  env.reset(1);
  Eigen::VectorXd cmd(3);
  cmd << 3.0, 4.0, 0.0;
  const ArmAction a = env.action_from_command(0, cmd);
  EXPECT_NEAR(a.node_velocities.back().norm(), env.config().limits.v_max, 1e-12);
  EXPECT_EQ(a.node_velocities.front(), Vec3::Zero());
  // At rest the retraction is zero.
  for (const auto& v : env.conservative_action(0).node_velocities) EXPECT_EQ(v, Vec3::Zero());
}

TEST(Scheduler, HierarchicalRespectsBudgetFlatFillsArms) {
  Environment env(make_scenario(Density::low, 1), {});
  env.reset(1);
  Scheduler flat(false);
  const SchedulerAction f = flat.decide(env);
  EXPECT_EQ(static_cast<int>(f.assignments.size()), env.arm_count());
  EXPECT_FALSE(f.adaptive_discount);

  Scheduler hier(true);
  const SchedulerAction h = hier.decide(env);
  EXPECT_EQ(h.concurrency_budget, concurrency_budget(0, 1, env.arm_count(), 0.25));
  EXPECT_LE(static_cast<int>(h.assignments.size()), h.concurrency_budget);
  EXPECT_TRUE(h.adaptive_discount);
  for (const auto& [arm, p] : h.assignments) EXPECT_TRUE(env.assignable(p));
}

}  // namespace
}  // namespace untangle
