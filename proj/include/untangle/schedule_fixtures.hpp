#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace untangle {

/// Inclusive interval of macro-steps during which one process runs.
/// Task, process and steps are 1-based, as in the shipped schedules.
struct ProcessInterval {
  int task = 1;
  int process = 1;
  int start = 1;
  int end = 1;
  bool operator==(const ProcessInterval&) const = default;
};

/// A reference parallel schedule. The idle columns between consecutive
/// processes of a task are mandated waits.
struct ScheduleFixture {
  std::string name;
  std::vector<ProcessInterval> intervals;

  const ProcessInterval* find(int task, int process) const;
  /// Required idle steps before `process` of `task` may start, i.e.
  /// start(P_m) - end(P_{m-1}) - 1 in the fixture; 0 for a first process or
  /// one the fixture does not list.
  int required_gap(int task, int process) const;
};

/// The four shipped schedules, named "v1" .. "v4".
const std::vector<ScheduleFixture>& schedule_fixtures();
/// Lookup by name; throws std::invalid_argument for an unknown name.
const ScheduleFixture& schedule_fixture(std::string_view name);

struct ScheduleViolation {
  int task = 0;
  int from_process = 0;  // predecessor on the violated edge (0 if none)
  int to_process = 0;
  std::string reason;
};

struct ScheduleVerdict {
  bool pass = true;
  std::vector<ScheduleViolation> violations;
};

/// Checks every interval of `trace` against the fixture: well-formed
/// (start <= end, one interval per process, task listed by the fixture),
/// predecessor present, starts strictly after the predecessor ends, and
/// waits at least the fixture's gap. Processes past the end of a fixture
/// row are checked for precedence with no mandated wait.
ScheduleVerdict validate_schedule_fixture(const std::vector<ProcessInterval>& trace,
                                          const ScheduleFixture& fixture);

/// Reads intervals from line-delimited JSON. Lines carrying a "type" field
/// other than "process" are skipped; blank lines are ignored. Throws
/// std::runtime_error naming the line on malformed input.
std::vector<ProcessInterval> read_process_intervals(std::istream& in);

}  // namespace untangle
