#include "untangle/scheduler.hpp"

#include "untangle/risk.hpp"

#include <algorithm>
#include <limits>

namespace untangle {

void Scheduler::reset(int arms) {
  cooldown_until_.assign(static_cast<std::size_t>(arms), 0);
  penalty_until_ = 0;
}

double Scheduler::assignment_cost(const Environment& env, int arm, ProcessRef p) {
  const auto& cfg = env.config();
  const Vec3 tip = env.arms()[static_cast<std::size_t>(arm)].centerline.back();
  const Vec3 goal = env.process_position(p);
  const double base_x = cfg.bases[static_cast<std::size_t>(arm)].x();
  const double lo = std::min(base_x, goal.x());
  const double hi = std::max(base_x, goal.x());
  int between = 0;
  for (int k = 0; k < env.arm_count(); ++k) {
    const double x = cfg.bases[static_cast<std::size_t>(k)].x();
    if (k != arm && x > lo && x < hi) ++between;
  }
  int remaining = 0;
  const auto& task = env.tasks().tasks()[static_cast<std::size_t>(p.task)];
  for (std::size_t m = static_cast<std::size_t>(p.process); m < task.durations.size(); ++m) {
    remaining += task.durations[m];
  }
  return (goal - tip).norm() + 0.5 * between + 0.5 * env.topo().row_max_abs_linking(arm) -
         0.01 * remaining;
}

SchedulerAction Scheduler::decide(const Environment& env) {
  const int n = env.arm_count();
  if (static_cast<int>(cooldown_until_.size()) != n) reset(n);
  SchedulerAction out;
  const int now = env.current_step() + 1;
  const auto& order = env.tasks().topological_order();
  std::vector<bool> taken(env.tasks().process_count(), false);

  if (!hierarchical_) {
    out.adaptive_discount = false;
    out.concurrency_budget = n;
    for (int arm = 0; arm < n; ++arm) {
      if (env.allocation().of(arm)) continue;
      for (const auto& p : order) {
        const std::size_t idx = env.tasks().index(p);
        if (taken[idx] || !env.assignable(p)) continue;
        taken[idx] = true;
        out.assignments.emplace_back(arm, p);
        break;
      }
    }
    return out;
  }

  out.adaptive_discount = true;
  std::vector<bool> released(static_cast<std::size_t>(n), false);
  for (int arm : env.replan_requests()) {
    if (env.allocation().of(arm)) {
      out.releases.push_back(arm);
      released[static_cast<std::size_t>(arm)] = true;
    }
    cooldown_until_[static_cast<std::size_t>(arm)] = now + env.config().replan_cooldown;
    penalty_until_ = now + env.config().replan_cooldown;
  }

  int budget = concurrency_budget(env.topo().braid_length, env.config().budget_n_min, n,
                                  env.config().budget_alpha);
  if (now < penalty_until_) budget = std::max(1, budget - 1);
  out.concurrency_budget = budget;

  int active = 0;
  for (int arm = 0; arm < n; ++arm) {
    if (env.allocation().of(arm) && !released[static_cast<std::size_t>(arm)]) ++active;
  }
  while (active < budget) {
    double best = std::numeric_limits<double>::infinity();
    int best_arm = -1;
    ProcessRef best_p{};
    for (int arm = 0; arm < n; ++arm) {
      const auto a = static_cast<std::size_t>(arm);
      if (released[a] || env.allocation().of(arm) || now < cooldown_until_[a]) continue;
      for (const auto& p : order) {
        const std::size_t idx = env.tasks().index(p);
        if (taken[idx] || !env.assignable(p)) continue;
        const double c = assignment_cost(env, arm, p);
        if (c < best) {
          best = c;
          best_arm = arm;
          best_p = p;
        }
      }
    }
    if (best_arm < 0) break;
    taken[env.tasks().index(best_p)] = true;
    released[static_cast<std::size_t>(best_arm)] = true;  // no second assignment this step
    out.assignments.emplace_back(best_arm, best_p);
    ++active;
  }
  return out;
}

}  // namespace untangle
