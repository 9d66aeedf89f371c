#pragma once

#include <compare>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace untangle {

/// One process of one task, both 0-based.
struct ProcessRef {
  int task = 0;
  int process = 0;
  auto operator<=>(const ProcessRef&) const = default;
};

std::string to_string(const ProcessRef& p);  // "T<k>P<m>", 1-based

struct Task {
  int id = 0;
  std::vector<int> durations;  // timesteps per process
  std::string complexity;
};

/// The eight maintenance tasks with their process durations.
std::vector<Task> standard_tasks();

/// Tasks and a precedence DAG over their processes, with a monotone
/// completion fraction per process. Each task's processes form a chain;
/// extra edges may link processes across tasks.
class TaskGraph {
 public:
  TaskGraph() = default;
  /// Throws std::invalid_argument for empty duration lists, non-positive
  /// durations, out-of-range edge endpoints or a cyclic precedence relation.
  explicit TaskGraph(std::vector<Task> tasks,
                     std::vector<std::pair<ProcessRef, ProcessRef>> extra_edges = {});

  const std::vector<Task>& tasks() const { return tasks_; }
  std::size_t process_count() const { return order_.size(); }
  int duration(ProcessRef p) const { return tasks_[p.task].durations[p.process]; }

  const std::vector<ProcessRef>& predecessors(ProcessRef p) const;
  /// Processes in a valid topological order.
  const std::vector<ProcessRef>& topological_order() const { return order_; }

  double progress(ProcessRef p) const { return progress_[index(p)]; }
  std::vector<double> progress_vector() const { return progress_; }
  bool complete(ProcessRef p) const { return progress(p) >= 1.0; }
  bool predecessors_complete(ProcessRef p) const;
  bool task_complete(int task) const;
  int completed_tasks() const;
  bool all_complete() const;

  /// Raises progress; throws std::logic_error if it would decrease or if
  /// work starts before every predecessor is complete.
  void set_progress(ProcessRef p, double value);
  void reset_progress();

  bool contains(ProcessRef p) const;
  std::size_t index(ProcessRef p) const;
  ProcessRef ref(std::size_t index) const { return refs_[index]; }

 private:
  std::vector<Task> tasks_;
  std::vector<std::size_t> offsets_;
  std::vector<ProcessRef> refs_;
  std::vector<std::vector<ProcessRef>> preds_;
  std::vector<ProcessRef> order_;
  std::vector<double> progress_;
};

struct ConstraintResult {
  std::string name;
  bool satisfied = true;
  double margin = 0.0;  // positive slack when satisfied
  std::string detail;
};

/// Assignment of at most one process to each arm; unchecked storage so
/// violating states can be represented and diagnosed.
class Allocation {
 public:
  Allocation() = default;
  explicit Allocation(int arms) : slots_(static_cast<std::size_t>(arms)) {}

  int arms() const { return static_cast<int>(slots_.size()); }
  const std::optional<ProcessRef>& of(int arm) const { return slots_[static_cast<std::size_t>(arm)]; }
  std::optional<int> holder(ProcessRef p) const;
  int active_count() const;

  /// Checked assignment: throws std::logic_error if the arm is busy or the
  /// process is already held.
  void assign(int arm, ProcessRef p);
  /// Unchecked write, for representing arbitrary (possibly invalid) states.
  void set(int arm, std::optional<ProcessRef> p) { slots_[static_cast<std::size_t>(arm)] = p; }
  void release(int arm) { slots_[static_cast<std::size_t>(arm)].reset(); }

  const std::vector<std::optional<ProcessRef>>& slots() const { return slots_; }

 private:
  std::vector<std::optional<ProcessRef>> slots_;
};

/// Started processes must have complete predecessors. `started` flags each
/// process index that has begun accruing progress.
ConstraintResult check_precedence(const TaskGraph& g, const std::vector<bool>& started);
/// Each process held by at most one arm.
ConstraintResult check_exclusive_process(const Allocation& a);
/// Each arm holds at most one process (structural in Allocation; also
/// rejects references to processes outside the graph).
ConstraintResult check_single_assignment(const Allocation& a, const TaskGraph& g);

}  // namespace untangle
