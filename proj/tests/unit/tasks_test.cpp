#include "untangle/schedule_fixtures.hpp"
#include "untangle/tasks.hpp"

#include <gtest/gtest.h>

#include <set>
#include <sstream>

namespace untangle {
namespace {

TEST(Tasks, StandardDurations) {
  const auto tasks = standard_tasks();
  ASSERT_EQ(tasks.size(), 8u);
  const std::vector<std::vector<int>> expected{{6, 6, 1},    {3, 2, 4, 13, 6}, {5, 3},
                                               {2, 7, 5, 4}, {1, 10, 8, 3},    {6, 5, 6, 6, 7, 5},
                                               {2, 5, 4},    {7, 3, 4}};
  const std::vector<int> totals{13, 28, 8, 18, 22, 35, 11, 14};
  for (std::size_t k = 0; k < 8; ++k) {
    EXPECT_EQ(tasks[k].durations, expected[k]);
    int sum = 0;
    for (int d : tasks[k].durations) sum += d;
    EXPECT_EQ(sum, totals[k]);
  }
}

TEST(TaskGraph, ChainPrecedenceAndOrder) {
  const TaskGraph g(standard_tasks());
  EXPECT_EQ(g.process_count(), 30u);
  const auto& order = g.topological_order();
  std::vector<std::size_t> pos(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) pos[g.index(order[i])] = i;
  for (const auto& p : order) {
    for (const auto& q : g.predecessors(p)) EXPECT_LT(pos[g.index(q)], pos[g.index(p)]);
  }
  EXPECT_EQ(g.predecessors({2, 1}), (std::vector<ProcessRef>{{2, 0}}));
  EXPECT_TRUE(g.predecessors({2, 0}).empty());
  EXPECT_EQ(to_string(ProcessRef{2, 1}), "T3P2");
}

TEST(TaskGraph, ProgressIsMonotoneAndGated) {
  TaskGraph g(standard_tasks());
  EXPECT_THROW(g.set_progress({2, 1}, 0.2), std::logic_error);
  g.set_progress({2, 0}, 0.4);
  EXPECT_THROW(g.set_progress({2, 0}, 0.2), std::logic_error);
  g.set_progress({2, 0}, 1.0);
  EXPECT_TRUE(g.predecessors_complete({2, 1}));
  g.set_progress({2, 1}, 1.0);
  EXPECT_TRUE(g.task_complete(2));
  EXPECT_EQ(g.completed_tasks(), 1);
  EXPECT_FALSE(g.all_complete());
  g.reset_progress();
  EXPECT_EQ(g.completed_tasks(), 0);
}

TEST(TaskGraph, RejectsCyclesAndBadInput) {
  std::vector<Task> two{{1, {1, 1}, "low"}, {2, {1}, "low"}};
  EXPECT_NO_THROW(TaskGraph(two, {{{1, 0}, {0, 1}}}));
  EXPECT_THROW(TaskGraph(two, {{{0, 1}, {1, 0}}, {{1, 0}, {0, 0}}}), std::invalid_argument);
  EXPECT_THROW(TaskGraph({{1, {}, "low"}}), std::invalid_argument);
  EXPECT_THROW(TaskGraph({{1, {0}, "low"}}), std::invalid_argument);
  EXPECT_THROW(TaskGraph(two, {{{0, 5}, {1, 0}}}), std::invalid_argument);
}

TEST(Constraints, ExclusiveAndSingleAssignment) {
  const TaskGraph g(standard_tasks());
  Allocation a(3);
  a.assign(0, {0, 0});
  a.assign(1, {1, 0});
  EXPECT_THROW(a.assign(0, {2, 0}), std::logic_error);
  EXPECT_THROW(a.assign(2, {1, 0}), std::logic_error);
  EXPECT_TRUE(check_exclusive_process(a).satisfied);
  EXPECT_TRUE(check_single_assignment(a, g).satisfied);
  EXPECT_EQ(a.active_count(), 2);
  EXPECT_EQ(a.holder({1, 0}), 1);

  a.set(2, ProcessRef{1, 0});
  EXPECT_FALSE(check_exclusive_process(a).satisfied);
  a.set(2, ProcessRef{9, 0});
  EXPECT_FALSE(check_single_assignment(a, g).satisfied);
}

TEST(Constraints, Precedence) {
  const TaskGraph g(standard_tasks());
  std::vector<bool> started(g.process_count(), false);
  started[g.index({0, 0})] = true;
  EXPECT_TRUE(check_precedence(g, started).satisfied);
  started[g.index({0, 1})] = true;
  EXPECT_FALSE(check_precedence(g, started).satisfied);
}

TEST(Fixtures, AllSelfValidate) {
  ASSERT_EQ(schedule_fixtures().size(), 4u);
  for (const auto& f : schedule_fixtures()) {
    const ScheduleVerdict v = validate_schedule_fixture(f.intervals, f);
    EXPECT_TRUE(v.pass) << f.name;
    EXPECT_TRUE(v.violations.empty());
  }
  EXPECT_THROW(schedule_fixture("v5"), std::invalid_argument);
}

TEST(Fixtures, IntervalsMatchProcessDurationsExceptTranscribedCells) {
  // Cells where the schedule tables themselves disagree with the duration
  // table; they are kept as published.
  const std::set<std::string> published{
      "v1 T1P1", "v1 T2P4", "v1 T2P5", "v2 T1P1", "v2 T2P4", "v2 T2P5", "v3 T1P1", "v3 T2P4",
      "v3 T2P5", "v4 T1P1", "v4 T2P4", "v4 T2P5", "v4 T6P1", "v4 T8P1"};
  const auto tasks = standard_tasks();
  std::set<std::string> mismatched;
  for (const auto& f : schedule_fixtures()) {
    for (const auto& iv : f.intervals) {
      if (iv.task == 6 && iv.process == 5) continue;  // the last listed process of task 6 absorbs P6
      if (iv.end - iv.start + 1 != tasks[iv.task - 1].durations[iv.process - 1]) {
        mismatched.insert(f.name + " T" + std::to_string(iv.task) + "P" + std::to_string(iv.process));
      }
    }
  }
  EXPECT_EQ(mismatched, published);
}

TEST(Fixtures, EarlyStartFails) {
  const ScheduleFixture& f = schedule_fixture("v1");
  auto trace = f.intervals;
  for (auto& iv : trace) {
    if (iv.task == 2 && iv.process == 3) {
      iv.start = f.find(2, 2)->end;
      iv.end = iv.start + 3;
    }
  }
  const ScheduleVerdict v = validate_schedule_fixture(trace, f);
  EXPECT_FALSE(v.pass);
  ASSERT_FALSE(v.violations.empty());
  EXPECT_EQ(v.violations[0].task, 2);
  EXPECT_EQ(v.violations[0].from_process, 2);
  EXPECT_EQ(v.violations[0].to_process, 3);
}

TEST(Fixtures, WaitGapEnforced) {
  const ScheduleFixture& f = schedule_fixture("v1");
  EXPECT_EQ(f.required_gap(2, 3), 17 - 5 - 1);
  EXPECT_EQ(f.required_gap(2, 1), 0);
  // Starting after the predecessor but inside the mandated wait fails.
  std::vector<ProcessInterval> trace{{2, 1, 1, 3}, {2, 2, 4, 5}, {2, 3, 7, 10}};
  EXPECT_FALSE(validate_schedule_fixture(trace, f).pass);
  trace[2] = {2, 3, 17, 20};
  EXPECT_TRUE(validate_schedule_fixture(trace, f).pass);
  // A process the fixture does not list only needs its predecessor finished.
  trace = {{6, 1, 1, 6}, {6, 2, 10, 14}, {6, 3, 16, 21}, {6, 4, 24, 29}, {6, 5, 31, 37}, {6, 6, 38, 42}};
  EXPECT_TRUE(validate_schedule_fixture(trace, f).pass);
  trace.back().start = 37;
  EXPECT_FALSE(validate_schedule_fixture(trace, f).pass);
  // Missing predecessor and duplicates are malformed.
  EXPECT_FALSE(validate_schedule_fixture({{3, 2, 9, 11}}, f).pass);
  EXPECT_FALSE(validate_schedule_fixture({{3, 1, 2, 6}, {3, 1, 2, 6}}, f).pass);
  EXPECT_FALSE(validate_schedule_fixture({{3, 1, 6, 2}}, f).pass);
}

TEST(Fixtures, ReadProcessIntervals) {
  std::istringstream in(
      "{\"type\":\"step\",\"step\":1}\n"
      "\n"
      "{\"type\":\"process\",\"task\":3,\"process\":1,\"start\":2,\"end\":6}\n"
      "{\"task\":3,\"process\":2,\"start\":9,\"end\":11}\n");
  const auto iv = read_process_intervals(in);
  ASSERT_EQ(iv.size(), 2u);
  EXPECT_EQ(iv[1], (ProcessInterval{3, 2, 9, 11}));
  std::istringstream bad("{\"task\":3}\n");
  EXPECT_THROW(read_process_intervals(bad), std::runtime_error);
  std::istringstream junk("not json\n");
  EXPECT_THROW(read_process_intervals(junk), std::runtime_error);
}

}  // namespace
}  // namespace untangle
