#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "colorsched/errors.hpp"

namespace colorsched {

// Sporadic task (C_i, D_i, T_i) plus the number of program pages it spans.
// Deadlines are constrained (D <= T). wcet <= deadline is deliberately not a
// type invariant: schedulability predicates must be able to represent (and
// reject) overloaded candidates where a selected WCET exceeds the deadline.
struct sporadic_task {
  std::string id;
  std::int64_t wcet = 1;      // cycles
  std::int64_t deadline = 1;  // time units
  std::int64_t period = 1;    // time units
  int pages = 1;

  friend bool operator==(const sporadic_task&, const sporadic_task&) = default;
};

using task_set = std::vector<sporadic_task>;

inline void validate(const sporadic_task& t) {
  require(t.wcet >= 1, errc::bad_task, "task " + t.id + ": wcet must be >= 1");
  require(t.deadline >= 1, errc::bad_task,
          "task " + t.id + ": deadline must be >= 1");
  require(t.period >= 1, errc::bad_task,
          "task " + t.id + ": period must be >= 1");
  require(t.deadline <= t.period, errc::bad_task,
          "task " + t.id + ": deadline " + std::to_string(t.deadline) +
              " exceeds period " + std::to_string(t.period));
  require(t.pages >= 1, errc::bad_task,
          "task " + t.id + ": pages must be >= 1");
}

inline void validate(const task_set& ts) {
  require(!ts.empty(), errc::bad_task, "task set is empty");
  for (const auto& t : ts) validate(t);
}

}  // namespace colorsched
