#include "untangle/tasks.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <stdexcept>

namespace untangle {

std::string to_string(const ProcessRef& p) {
  return "T" + std::to_string(p.task + 1) + "P" + std::to_string(p.process + 1);
}

std::vector<Task> standard_tasks() {
  return {
      {1, {6, 6, 1}, "low"},
      {2, {3, 2, 4, 13, 6}, "high"},
      {3, {5, 3}, "low"},
      {4, {2, 7, 5, 4}, "medium"},
      {5, {1, 10, 8, 3}, "medium"},
      {6, {6, 5, 6, 6, 7, 5}, "high"},
      {7, {2, 5, 4}, "low"},
      {8, {7, 3, 4}, "low"},
  };
}

TaskGraph::TaskGraph(std::vector<Task> tasks,
                     std::vector<std::pair<ProcessRef, ProcessRef>> extra_edges)
    : tasks_(std::move(tasks)) {
  std::size_t n = 0;
  for (std::size_t k = 0; k < tasks_.size(); ++k) {
    if (tasks_[k].durations.empty()) throw std::invalid_argument("task without processes");
    for (int d : tasks_[k].durations) {
      if (d <= 0) throw std::invalid_argument("process durations must be positive");
    }
    offsets_.push_back(n);
    for (std::size_t m = 0; m < tasks_[k].durations.size(); ++m) {
      refs_.push_back({static_cast<int>(k), static_cast<int>(m)});
    }
    n += tasks_[k].durations.size();
  }
  preds_.assign(n, {});
  for (const auto& r : refs_) {
    if (r.process > 0) preds_[index(r)].push_back({r.task, r.process - 1});
  }
  for (const auto& [from, to] : extra_edges) {
    if (!contains(from) || !contains(to)) {
      throw std::invalid_argument("edge " + to_string(from) + " -> " + to_string(to) +
                                  " references an unknown process");
    }
    const std::size_t t = index(to);
    if (std::find(preds_[t].begin(), preds_[t].end(), from) == preds_[t].end()) {
      preds_[t].push_back(from);
    }
  }

  // Kahn's algorithm; stable on index order.
  std::vector<int> indegree(n, 0);
  std::vector<std::vector<std::size_t>> succ(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& p : preds_[i]) {
      succ[index(p)].push_back(i);
      ++indegree[i];
    }
  }
  std::deque<std::size_t> ready;
  for (std::size_t i = 0; i < n; ++i) {
    if (indegree[i] == 0) ready.push_back(i);
  }
  while (!ready.empty()) {
    const std::size_t i = ready.front();
    ready.pop_front();
    order_.push_back(refs_[i]);
    for (std::size_t s : succ[i]) {
      if (--indegree[s] == 0) ready.push_back(s);
    }
  }
  if (order_.size() != n) throw std::invalid_argument("precedence relation has a cycle");
  progress_.assign(n, 0.0);
}

bool TaskGraph::contains(ProcessRef p) const {
  return p.task >= 0 && static_cast<std::size_t>(p.task) < tasks_.size() && p.process >= 0 &&
         static_cast<std::size_t>(p.process) < tasks_[p.task].durations.size();
}

std::size_t TaskGraph::index(ProcessRef p) const {
  if (!contains(p)) {
    throw std::out_of_range("process " + to_string(p) + " is not in the task graph");
  }
  return offsets_[p.task] + static_cast<std::size_t>(p.process);
}

const std::vector<ProcessRef>& TaskGraph::predecessors(ProcessRef p) const {
  return preds_[index(p)];
}

bool TaskGraph::predecessors_complete(ProcessRef p) const {
  for (const auto& q : predecessors(p)) {
    if (!complete(q)) return false;
  }
  return true;
}

bool TaskGraph::task_complete(int task) const {
  const auto n = static_cast<int>(tasks_.at(static_cast<std::size_t>(task)).durations.size());
  for (int m = 0; m < n; ++m) {
    if (!complete({task, m})) return false;
  }
  return true;
}

int TaskGraph::completed_tasks() const {
  int n = 0;
  for (std::size_t k = 0; k < tasks_.size(); ++k) n += task_complete(static_cast<int>(k)) ? 1 : 0;
  return n;
}

bool TaskGraph::all_complete() const {
  return std::all_of(progress_.begin(), progress_.end(), [](double v) { return v >= 1.0; });
}

void TaskGraph::set_progress(ProcessRef p, double value) {
  const std::size_t i = index(p);
  value = std::min(value, 1.0);
  if (value < progress_[i]) throw std::logic_error("task progress may not decrease");
  if (value > 0.0 && !predecessors_complete(p)) {
    throw std::logic_error("process " + to_string(p) + " started before its predecessors");
  }
  progress_[i] = value;
}

void TaskGraph::reset_progress() { std::fill(progress_.begin(), progress_.end(), 0.0); }

std::optional<int> Allocation::holder(ProcessRef p) const {
  for (std::size_t a = 0; a < slots_.size(); ++a) {
    if (slots_[a] && *slots_[a] == p) return static_cast<int>(a);
  }
  return std::nullopt;
}

int Allocation::active_count() const {
  return static_cast<int>(std::count_if(slots_.begin(), slots_.end(),
                                        [](const auto& s) { return s.has_value(); }));
}

void Allocation::assign(int arm, ProcessRef p) {
  if (slots_.at(static_cast<std::size_t>(arm))) {
    throw std::logic_error("arm " + std::to_string(arm) + " already holds a process");
  }
  if (holder(p)) throw std::logic_error("process " + to_string(p) + " is already assigned");
  slots_[static_cast<std::size_t>(arm)] = p;
}

ConstraintResult check_precedence(const TaskGraph& g, const std::vector<bool>& started) {
  ConstraintResult r{"C6", true, 1.0, {}};
  for (std::size_t i = 0; i < started.size() && i < g.process_count(); ++i) {
    if (!started[i]) continue;
    const ProcessRef p = g.ref(i);
    for (const auto& q : g.predecessors(p)) {
      if (!g.complete(q)) {
        r.satisfied = false;
        r.margin = g.progress(q) - 1.0;
        r.detail = to_string(q) + " -> " + to_string(p);
        return r;
      }
    }
  }
  return r;
}

ConstraintResult check_exclusive_process(const Allocation& a) {
  ConstraintResult r{"C7", true, 1.0, {}};
  const auto& s = a.slots();
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (std::size_t j = i + 1; j < s.size(); ++j) {
      if (s[i] && s[j] && *s[i] == *s[j]) {
        r.satisfied = false;
        r.margin = -1.0;
        r.detail = to_string(*s[i]) + " held by arms " + std::to_string(i) + " and " +
                   std::to_string(j);
        return r;
      }
    }
  }
  return r;
}

ConstraintResult check_single_assignment(const Allocation& a, const TaskGraph& g) {
  ConstraintResult r{"C8", true, 1.0, {}};
  for (int arm = 0; arm < a.arms(); ++arm) {
    const auto& p = a.of(arm);
    if (!p) continue;
    try {
      (void)g.index(*p);
    } catch (const std::out_of_range&) {
      r.satisfied = false;
      r.margin = -1.0;
      r.detail = "arm " + std::to_string(arm) + " holds unknown process " + to_string(*p);
      return r;
    }
  }
  return r;
}

}  // namespace untangle
