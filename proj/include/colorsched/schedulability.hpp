#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "colorsched/errors.hpp"
#include "colorsched/task.hpp"

namespace colorsched {

using rational = boost::multiprecision::cpp_rational;
using bigint = boost::multiprecision::cpp_int;

// Exact total utilization Σ C_i / T_i.
inline rational utilization(const task_set& tasks) {
  require(!tasks.empty(), errc::bad_task, "task set is empty");
  rational u = 0;
  for (const auto& t : tasks) u += rational(t.wcet, t.period);
  return u;
}

namespace detail {

// Iteration/overflow guards for the busy-period recursion. The recursion
// converges whenever U <= 1, but at U = 1 the fixed point can sit at
// hyperperiod scale; rather than spin forever we give up past these limits.
constexpr std::int64_t horizon_limit = std::int64_t{1} << 60;
constexpr int busy_iteration_limit = 1'000'000;

inline std::int64_t saturate(const boost::multiprecision::int128_t& v) {
  constexpr std::int64_t hi = std::numeric_limits<std::int64_t>::max();
  if (v > hi) return hi;
  if (v < -hi) return -hi;
  return static_cast<std::int64_t>(v);
}

}  // namespace detail

// Least positive fixed point of L = Σ ⌈L/T_i⌉ · C_i, iterated from
// L₀ = Σ C_i: the first instant by which all work released before it is
// certainly finished (first definitive idle time). Diverges exactly when
// utilization exceeds 1; that is reported as nullopt rather than an error so
// callers can fall back. Throws when the fixed point exists but is beyond
// what downstream check-point machinery could use anyway.
inline std::optional<std::int64_t> definitive_idle_time(const task_set& tasks) {
  validate(tasks);
  if (utilization(tasks) > 1) return std::nullopt;
  using boost::multiprecision::int128_t;
  int128_t level = 0;
  for (const auto& t : tasks) level += t.wcet;
  for (int iter = 0; iter < detail::busy_iteration_limit; ++iter) {
    int128_t next = 0;
    for (const auto& t : tasks)
      next += ((level + t.period - 1) / t.period) * t.wcet;
    if (next == level) {
      require(level <= detail::horizon_limit, errc::coefficient_overflow,
              "definitive idle time exceeds the supported horizon");
      return static_cast<std::int64_t>(level);
    }
    require(next <= detail::horizon_limit, errc::coefficient_overflow,
            "definitive idle time exceeds the supported horizon");
    level = next;
  }
  fail(errc::coefficient_overflow,
       "definitive idle time iteration did not settle");
}

// lcm of the periods, or nullopt when it does not fit the supported horizon.
inline std::optional<std::int64_t> hyperperiod(const task_set& tasks) {
  validate(tasks);
  bigint l = 1;
  for (const auto& t : tasks) {
    l = boost::multiprecision::lcm(l, bigint(t.period));
    if (l > detail::horizon_limit) return std::nullopt;
  }
  return static_cast<std::int64_t>(l);
}

// Absolute deadlines k·T_i + D_i up to the horizon — the only instants where
// the demand bound can newly fail.
struct check_point_set {
  std::vector<std::int64_t> points;  // sorted ascending, deduplicated
  std::int64_t horizon = 0;
  bool below_first_deadline = false;  // horizon precedes every deadline
};

inline check_point_set dset(const task_set& tasks, std::int64_t horizon,
                            std::size_t cap = 100000) {
  validate(tasks);
  require(horizon >= 0, errc::bad_config, "horizon must be >= 0");
  check_point_set out;
  out.horizon = horizon;
  // Count before materializing so the cap guards the work itself.
  std::size_t count = 0;
  for (const auto& t : tasks) {
    if (t.deadline > horizon) continue;
    count += static_cast<std::size_t>((horizon - t.deadline) / t.period) + 1;
    require(count <= cap, errc::checkpoint_overflow,
            "more than " + std::to_string(cap) +
                " demand check points below horizon " +
                std::to_string(horizon) + "; coarsen the parameters");
  }
  for (const auto& t : tasks)
    for (std::int64_t p = t.deadline; p <= horizon; p += t.period)
      out.points.push_back(p);
  std::sort(out.points.begin(), out.points.end());
  out.points.erase(std::unique(out.points.begin(), out.points.end()),
                   out.points.end());
  out.below_first_deadline = out.points.empty();
  return out;
}

// Synchronous-arrival demand released and due within [0, t]:
// Σ (⌊(t−D_i)/T_i⌋ + 1) · C_i over tasks with D_i ≤ t.
inline boost::multiprecision::int128_t demand_at_wide(const task_set& tasks,
                                                      std::int64_t t) {
  boost::multiprecision::int128_t demand = 0;
  for (const auto& task : tasks) {
    if (task.deadline > t) continue;
    demand += boost::multiprecision::int128_t(
                  (t - task.deadline) / task.period + 1) *
              task.wcet;
  }
  return demand;
}

inline std::int64_t demand_at(const task_set& tasks, std::int64_t t) {
  return detail::saturate(demand_at_wide(tasks, t));
}

struct dbf_result {
  bool feasible = true;
  bool vacuous = false;        // no check points below the horizon
  std::int64_t violated_at = -1;
  std::int64_t demand = 0;     // demand at the first violated point
};

inline dbf_result dbf_feasible(const task_set& tasks,
                               const check_point_set& points) {
  validate(tasks);
  dbf_result r;
  if (points.points.empty()) {
    r.vacuous = true;
    return r;
  }
  for (std::int64_t t : points.points) {
    const auto demand = demand_at_wide(tasks, t);
    if (demand > t) {
      r.feasible = false;
      r.violated_at = t;
      r.demand = detail::saturate(demand);
      return r;
    }
  }
  return r;
}

// Horizon beyond which no first demand violation can occur for this concrete
// task set (George-style bound): the earliest violation lies within the
// synchronous busy period and below max(D_max, Σ(T_i−D_i)·U_i / (1−U)).
// Requires U ≤ 1; nullopt when the horizon machinery overflows.
inline std::optional<std::int64_t> demand_horizon(const task_set& tasks) {
  validate(tasks);
  const rational u = utilization(tasks);
  require(u <= 1, errc::bad_config,
          "demand horizon undefined for utilization > 1");
  std::optional<std::int64_t> busy;
  try {
    busy = definitive_idle_time(tasks);
  } catch (const error& e) {
    if (e.code() != errc::coefficient_overflow) throw;
    busy = std::nullopt;
  }
  std::int64_t d_max = 0;
  for (const auto& t : tasks) d_max = std::max(d_max, t.deadline);
  std::optional<std::int64_t> slack_bound;
  if (u < 1) {
    rational num = 0;
    for (const auto& t : tasks)
      num += rational(bigint(t.period - t.deadline) * t.wcet, t.period);
    const rational la = num / (1 - u);
    // ceil(la)
    bigint q = boost::multiprecision::numerator(la) /
               boost::multiprecision::denominator(la);
    if (q * boost::multiprecision::denominator(la) !=
            boost::multiprecision::numerator(la) &&
        la > 0)
      ++q;
    bigint bound = q > d_max ? q : bigint(d_max);
    if (bound <= detail::horizon_limit)
      slack_bound = static_cast<std::int64_t>(bound);
  }
  if (busy && slack_bound) return std::min(*busy, *slack_bound);
  if (busy) return busy;
  return slack_bound;
}

enum class feasibility : std::uint8_t { feasible, infeasible, resource_limit };

inline const char* feasibility_name(feasibility f) {
  switch (f) {
    case feasibility::feasible: return "feasible";
    case feasibility::infeasible: return "infeasible";
    case feasibility::resource_limit: return "resource_limit";
  }
  return "?";
}

struct feasibility_report {
  feasibility verdict = feasibility::feasible;
  rational util = 0;
  std::int64_t horizon = 0;
  dbf_result dbf;
};

// Exact EDF feasibility of a concrete task set: utilization first (necessary),
// then the demand bound at every absolute deadline up to the safe horizon.
// resource_limit means the check-point machinery hit its caps; callers must
// treat that as "not shown feasible".
inline feasibility_report edf_feasible(const task_set& tasks,
                                       std::size_t cap = 100000) {
  feasibility_report rep;
  rep.util = utilization(tasks);
  if (rep.util > 1) {
    rep.verdict = feasibility::infeasible;
    return rep;
  }
  const auto horizon = demand_horizon(tasks);
  if (!horizon) {
    rep.verdict = feasibility::resource_limit;
    return rep;
  }
  rep.horizon = *horizon;
  check_point_set points;
  try {
    points = dset(tasks, *horizon, cap);
  } catch (const error& e) {
    if (e.code() != errc::checkpoint_overflow) throw;
    rep.verdict = feasibility::resource_limit;
    return rep;
  }
  rep.dbf = dbf_feasible(tasks, points);
  rep.verdict =
      rep.dbf.feasible ? feasibility::feasible : feasibility::infeasible;
  return rep;
}

}  // namespace colorsched
