#pragma once

#include "untangle/environment.hpp"

#include <vector>

namespace untangle {

/// Rule-based top-level controller.
///
/// Hierarchical mode caps active arms by the braid-length concurrency budget,
/// assigns by a topology-aware cost and honours replan requests (release,
/// cooldown, one-slot budget cut). Flat mode hands every idle arm the first
/// assignable process in topological order.
class Scheduler {
 public:
  explicit Scheduler(bool hierarchical = true) : hierarchical_(hierarchical) {}

  void reset(int arms);
  SchedulerAction decide(const Environment& env);

  bool hierarchical() const { return hierarchical_; }

  /// Assignment cost of `p` for `arm`: tip distance, bases in between,
  /// row linking, with a small preference for long remaining chains.
  static double assignment_cost(const Environment& env, int arm, ProcessRef p);

 private:
  bool hierarchical_;
  std::vector<int> cooldown_until_;
  int penalty_until_ = 0;
};

}  // namespace untangle
