#include "untangle/schedule_fixtures.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <istream>
#include <map>
#include <stdexcept>

namespace untangle {

namespace {

using Rows = std::vector<std::vector<std::array<int, 3>>>;  // per task: {process, start, end}

ScheduleFixture build(std::string name, const Rows& rows) {
  ScheduleFixture f;
  f.name = std::move(name);
  for (std::size_t t = 0; t < rows.size(); ++t) {
    for (const auto& r : rows[t]) {
      f.intervals.push_back({static_cast<int>(t) + 1, r[0], r[1], r[2]});
    }
  }
  return f;
}

std::vector<ScheduleFixture> make_fixtures() {
  std::vector<ScheduleFixture> out;
  out.push_back(build("v1", {
      {{1, 2, 2}, {2, 6, 11}, {3, 13, 13}},
      {{1, 1, 3}, {2, 4, 5}, {3, 17, 20}, {4, 24, 32}, {5, 33, 33}},
      {{1, 2, 6}, {2, 9, 11}},
      {{1, 3, 4}, {2, 9, 15}, {3, 18, 22}, {4, 25, 28}},
      {{1, 4, 4}, {2, 10, 19}, {3, 23, 30}, {4, 33, 35}},
      {{1, 1, 6}, {2, 10, 14}, {3, 16, 21}, {4, 24, 29}, {5, 31, 35}},
      {{1, 2, 3}, {2, 12, 16}, {3, 24, 27}},
      {{1, 1, 7}, {2, 10, 12}, {3, 15, 18}},
  }));
  out.push_back(build("v2", {
      {{1, 3, 3}, {2, 7, 12}, {3, 14, 14}},
      {{1, 1, 3}, {2, 5, 6}, {3, 15, 18}, {4, 24, 32}, {5, 33, 33}},
      {{1, 1, 5}, {2, 9, 11}},
      {{1, 1, 2}, {2, 10, 16}, {3, 19, 23}, {4, 26, 29}},
      {{1, 2, 2}, {2, 8, 17}, {3, 21, 28}, {4, 31, 33}},
      {{1, 2, 7}, {2, 10, 14}, {3, 16, 21}, {4, 24, 29}, {5, 31, 35}},
      {{1, 1, 2}, {2, 13, 17}, {3, 25, 28}},
      {{1, 2, 8}, {2, 12, 14}, {3, 17, 20}},
  }));
  out.push_back(build("v3", {
      {{1, 4, 4}, {2, 8, 13}, {3, 15, 15}},
      {{1, 2, 4}, {2, 5, 6}, {3, 16, 19}, {4, 26, 34}, {5, 35, 35}},
      {{1, 2, 6}, {2, 9, 11}},
      {{1, 3, 4}, {2, 11, 17}, {3, 20, 24}, {4, 27, 30}},
      {{1, 1, 1}, {2, 10, 19}, {3, 23, 30}, {4, 33, 35}},
      {{1, 1, 6}, {2, 10, 14}, {3, 16, 21}, {4, 24, 29}, {5, 31, 35}},
      {{1, 3, 4}, {2, 14, 18}, {3, 27, 30}},
      {{1, 1, 7}, {2, 12, 14}, {3, 18, 21}},
  }));
  out.push_back(build("v4", {
      {{1, 1, 1}, {2, 6, 11}, {3, 13, 13}},
      {{1, 2, 4}, {2, 5, 6}, {3, 14, 17}, {4, 24, 32}, {5, 33, 33}},
      {{1, 1, 5}, {2, 8, 10}},
      {{1, 2, 3}, {2, 9, 15}, {3, 18, 22}, {4, 25, 28}},
      {{1, 3, 3}, {2, 6, 15}, {3, 19, 26}, {4, 29, 31}},
      {{1, 2, 6}, {2, 11, 15}, {3, 17, 22}, {4, 25, 30}, {5, 31, 35}},
      {{1, 1, 2}, {2, 12, 16}, {3, 23, 26}},
      {{1, 2, 7}, {2, 10, 12}, {3, 15, 18}},
  }));
  return out;
}

}  // namespace

const ProcessInterval* ScheduleFixture::find(int task, int process) const {
  for (const auto& iv : intervals) {
    if (iv.task == task && iv.process == process) return &iv;
  }
  return nullptr;
}

int ScheduleFixture::required_gap(int task, int process) const {
  const ProcessInterval* cur = find(task, process);
  const ProcessInterval* prev = find(task, process - 1);
  if (!cur || !prev) return 0;
  return std::max(0, cur->start - prev->end - 1);
}

const std::vector<ScheduleFixture>& schedule_fixtures() {
  static const std::vector<ScheduleFixture> fixtures = make_fixtures();
  return fixtures;
}

const ScheduleFixture& schedule_fixture(std::string_view name) {
  for (const auto& f : schedule_fixtures()) {
    if (f.name == name) return f;
  }
  throw std::invalid_argument("unknown schedule fixture '" + std::string(name) +
                              "' (expected v1, v2, v3 or v4)");
}

ScheduleVerdict validate_schedule_fixture(const std::vector<ProcessInterval>& trace,
                                          const ScheduleFixture& fixture) {
  ScheduleVerdict v;
  auto fail = [&](int task, int from, int to, std::string reason) {
    v.pass = false;
    v.violations.push_back({task, from, to, std::move(reason)});
  };

  std::map<std::pair<int, int>, ProcessInterval> by_key;
  for (const auto& iv : trace) {
    if (iv.start > iv.end) {
      fail(iv.task, 0, iv.process, "interval ends before it starts");
      continue;
    }
    if (!fixture.find(iv.task, 1)) {
      fail(iv.task, 0, iv.process, "task not listed by fixture " + fixture.name);
      continue;
    }
    if (!by_key.emplace(std::make_pair(iv.task, iv.process), iv).second) {
      fail(iv.task, 0, iv.process, "process appears in more than one interval");
    }
  }

  for (const auto& [key, iv] : by_key) {
    const auto [task, process] = key;
    if (process == 1) continue;
    const auto prev = by_key.find({task, process - 1});
    if (prev == by_key.end()) {
      fail(task, process - 1, process, "predecessor never ran");
      continue;
    }
    if (iv.start <= prev->second.end) {
      fail(task, process - 1, process,
           "starts at " + std::to_string(iv.start) + " before predecessor ends at " +
               std::to_string(prev->second.end));
      continue;
    }
    const int gap = iv.start - prev->second.end - 1;
    const int need = fixture.required_gap(task, process);
    if (gap < need) {
      fail(task, process - 1, process,
           "waits " + std::to_string(gap) + " steps, fixture requires " + std::to_string(need));
    }
  }
  return v;
}

std::vector<ProcessInterval> read_process_intervals(std::istream& in) {
  std::vector<ProcessInterval> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw std::runtime_error("trace line " + std::to_string(lineno) + ": " + e.what());
    }
    if (!j.is_object()) {
      throw std::runtime_error("trace line " + std::to_string(lineno) + ": expected an object");
    }
    if (j.contains("type") && j["type"] != "process") continue;
    try {
      out.push_back({j.at("task").get<int>(), j.at("process").get<int>(),
                     j.at("start").get<int>(), j.at("end").get<int>()});
    } catch (const nlohmann::json::exception& e) {
      throw std::runtime_error("trace line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace untangle
