#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "colorsched/cache_config.hpp"
#include "colorsched/errors.hpp"
#include "colorsched/rng.hpp"
#include "colorsched/schedulability.hpp"
#include "colorsched/task.hpp"
#include "colorsched/wcet.hpp"

namespace colorsched {

// Macro-level instance: one WCET table per task plus the task skeletons
// (deadline/period; WCET left open — it is the decision variable).
// check_points carries the shared demand grid used by the LP export; the
// exact solver derives tighter per-candidate horizons on its own.
struct allocation_problem {
  std::vector<wcet_table> tables;
  task_set tasks;
  cache_config cache;
  check_point_set check_points;
  std::size_t point_cap = 100000;
};

inline void validate(const allocation_problem& p) {
  validate(p.cache);
  validate(p.tasks);
  require(!p.tables.empty(), errc::bad_task, "no WCET tables");
  require(p.tables.size() == p.tasks.size(), errc::inconsistent_ids,
          "have " + std::to_string(p.tables.size()) + " tables for " +
              std::to_string(p.tasks.size()) + " tasks");
  for (std::size_t i = 0; i < p.tables.size(); ++i) {
    require(p.tables[i].task_id == p.tasks[i].id, errc::inconsistent_ids,
            "table for '" + p.tables[i].task_id + "' paired with task '" +
                p.tasks[i].id + "'");
    require(p.tables[i].max_colors() >= 1, errc::bad_task,
            "empty table for task " + p.tables[i].task_id);
  }
}

namespace detail {

// Shared check-point horizon for the exported model: the busy period under
// the worst (fewest-colors) WCETs capped by the hyperperiod; when that busy
// period diverges, fall back to the hyperperiod, and failing that to the
// best-vector horizon (any candidate the LP could pick is dominated by it).
inline std::int64_t shared_horizon(const allocation_problem& p) {
  task_set worst = p.tasks;
  for (std::size_t i = 0; i < worst.size(); ++i)
    worst[i].wcet = p.tables[i].at(1);
  const auto hp = hyperperiod(worst);
  if (utilization(worst) <= 1) {
    std::optional<std::int64_t> busy;
    try {
      busy = definitive_idle_time(worst);
    } catch (const error& e) {
      if (e.code() != errc::coefficient_overflow) throw;
    }
    if (busy && hp) return std::min(*busy, *hp);
    if (busy) return *busy;
  }
  if (hp) return *hp;
  task_set best = p.tasks;
  for (std::size_t i = 0; i < best.size(); ++i)
    best[i].wcet = p.tables[i].at(p.tables[i].max_colors());
  if (utilization(best) <= 1)
    if (const auto h = demand_horizon(best)) return *h;
  // Nothing the LP could select is schedulable by utilization alone; any
  // horizon yields the same verdict, so keep the grid minimal.
  std::int64_t d_max = 0;
  for (const auto& t : p.tasks) d_max = std::max(d_max, t.deadline);
  return d_max;
}

}  // namespace detail

inline allocation_problem make_problem(std::vector<wcet_table> tables,
                                       task_set tasks, cache_config cache,
                                       std::size_t point_cap = 100000) {
  allocation_problem p;
  p.tables = std::move(tables);
  p.tasks = std::move(tasks);
  p.cache = cache;
  p.point_cap = point_cap;
  validate(p);
  // The shared demand grid is only needed by the LP export and can be very
  // large when the worst-case busy period is long; it is filled on demand
  // there. solve() bounds each candidate with its own (much tighter) horizon.
  return p;
}

// Shared check points for the exported model; memoized on the problem by
// callers that need them repeatedly.
inline check_point_set shared_check_points(const allocation_problem& p) {
  if (!p.check_points.points.empty() || p.check_points.horizon > 0)
    return p.check_points;
  return dset(p.tasks, detail::shared_horizon(p), p.point_cap);
}

enum class infeasible_cause : std::uint8_t {
  none,         // allocation is feasible
  utilization,  // every selection exceeds utilization 1
  demand,       // a demand check point fails even for the best selection
  capacity,     // schedulable selections exist but need more than K colors
  resources     // verdicts hit the check-point cap; nothing proven feasible
};

inline const char* infeasible_cause_name(infeasible_cause c) {
  switch (c) {
    case infeasible_cause::none: return "none";
    case infeasible_cause::utilization: return "utilization";
    case infeasible_cause::demand: return "demand";
    case infeasible_cause::capacity: return "capacity";
    case infeasible_cause::resources: return "resources";
  }
  return "?";
}

struct allocation {
  bool feasible = false;
  std::vector<int> colors;          // chosen j per task, task order
  std::vector<std::int64_t> wcets;  // C_i(j_i)
  int total_colors = 0;
  infeasible_cause cause = infeasible_cause::none;
  std::optional<std::int64_t> violated_at;  // demand witness when infeasible
  bool resource_limited = false;    // some candidate hit the check-point cap
};

namespace detail {

struct search_env {
  const allocation_problem* problem = nullptr;
  int budget = 0;           // K
  task_set scratch;         // wcet rewritten per candidate
  bool resource_limited = false;

  feasibility eval(const std::vector<int>& pick) {
    for (std::size_t i = 0; i < scratch.size(); ++i)
      scratch[i].wcet = problem->tables[i].at(pick[i]);
    const auto rep = edf_feasible(scratch, problem->point_cap);
    if (rep.verdict == feasibility::resource_limit) resource_limited = true;
    return rep.verdict;
  }

  // Relaxation: undecided tasks at their best (longest-grant) entry — the
  // least demand any completion of this prefix can have. Infeasible here
  // means every completion is infeasible, so the branch can be cut.
  feasibility eval_relaxed(const std::vector<int>& pick, int decided,
                           const std::vector<int>& order) {
    std::vector<int> full = pick;
    for (std::size_t r = static_cast<std::size_t>(decided); r < order.size();
         ++r) {
      const std::size_t t = static_cast<std::size_t>(order[r]);
      full[t] = problem->tables[t].max_colors();
    }
    return eval(full);
  }
};

}  // namespace detail

// Exact minimum-color selection. Branch-and-bound in two phases: first find
// the minimum total Σ j_i over schedulable selections within the color
// budget (tasks ordered by table length descending so the widest choices are
// pruned earliest), then re-search for the lexicographically smallest
// j-vector (original task order) achieving that total. Candidates are priced
// feasible/infeasible by the exact EDF demand test; the monotone-demand
// relaxation (undecided tasks at their longest grant) soundly prunes
// branches no completion of which can be schedulable.
inline allocation solve(const allocation_problem& problem) {
  validate(problem);
  const int n = static_cast<int>(problem.tasks.size());
  const int budget = num_colors(problem.cache);

  detail::search_env env;
  env.problem = &problem;
  env.budget = budget;
  env.scratch = problem.tasks;

  allocation result;

  // Fast infeasibility screen on the least-demand selection: if even every
  // task at its longest grant cannot be scheduled, nothing can.
  std::vector<int> best_pick(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    best_pick[static_cast<std::size_t>(i)] =
        problem.tables[static_cast<std::size_t>(i)].max_colors();
  {
    for (std::size_t i = 0; i < env.scratch.size(); ++i)
      env.scratch[i].wcet = problem.tables[i].at(best_pick[i]);
    const auto rep = edf_feasible(env.scratch, problem.point_cap);
    if (rep.verdict != feasibility::feasible) {
      result.resource_limited =
          rep.verdict == feasibility::resource_limit || env.resource_limited;
      if (rep.verdict == feasibility::resource_limit)
        result.cause = infeasible_cause::resources;
      else if (rep.util > 1)
        result.cause = infeasible_cause::utilization;
      else {
        result.cause = infeasible_cause::demand;
        result.violated_at = rep.dbf.violated_at;
      }
      return result;
    }
  }

  // Phase 1: minimum schedulable total within the budget.
  std::vector<int> order(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const int la = problem.tables[static_cast<std::size_t>(a)].max_colors();
    const int lb = problem.tables[static_cast<std::size_t>(b)].max_colors();
    return la != lb ? la > lb : a < b;
  });

  int best_total = budget + 1;  // sentinel: nothing found yet

  std::vector<int> pick(static_cast<std::size_t>(n), 0);
  auto search_min = [&](auto&& self, int depth, int committed) -> void {
    const int remaining = n - depth;
    if (committed + remaining >= best_total) return;  // cannot improve
    if (committed + remaining > budget) return;       // cannot fit
    if (env.eval_relaxed(pick, depth, order) != feasibility::feasible)
      return;  // no completion schedulable
    if (depth == n) {
      best_total = committed;  // relaxation at depth n is the selection itself
      return;
    }
    const std::size_t t = static_cast<std::size_t>(order[static_cast<std::size_t>(depth)]);
    const int cap = problem.tables[t].max_colors();
    for (int j = 1; j <= cap; ++j) {
      pick[t] = j;
      self(self, depth + 1, committed + j);
      pick[t] = 0;
    }
  };
  search_min(search_min, 0, 0);

  if (best_total > budget) {
    result.cause = infeasible_cause::capacity;
    result.resource_limited = env.resource_limited;
    return result;
  }

  // Phase 2: lexicographically smallest vector achieving best_total, in
  // original task order with smaller grants explored first — the first
  // schedulable leaf is the answer.
  std::fill(pick.begin(), pick.end(), 0);
  std::vector<int> id_order(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) id_order[static_cast<std::size_t>(i)] = i;
  std::vector<int> suffix_caps(static_cast<std::size_t>(n) + 1, 0);
  for (int i = n - 1; i >= 0; --i)
    suffix_caps[static_cast<std::size_t>(i)] =
        suffix_caps[static_cast<std::size_t>(i) + 1] +
        problem.tables[static_cast<std::size_t>(i)].max_colors();

  std::vector<int> found;
  auto search_lex = [&](auto&& self, int depth, int committed) -> bool {
    const int remaining = n - depth;
    if (committed + remaining > best_total) return false;
    if (committed + suffix_caps[static_cast<std::size_t>(depth)] < best_total)
      return false;
    if (env.eval_relaxed(pick, depth, id_order) != feasibility::feasible)
      return false;
    if (depth == n) {
      found = pick;
      return true;
    }
    const auto t = static_cast<std::size_t>(depth);
    for (int j = 1; j <= problem.tables[t].max_colors(); ++j) {
      pick[t] = j;
      if (self(self, depth + 1, committed + j)) return true;
      pick[t] = 0;
    }
    return false;
  };
  const bool ok = search_lex(search_lex, 0, 0);
  require(ok, errc::bad_task, "solver invariant broken: optimum vanished");

  // Independent re-verification of the returned selection — the result must
  // not rest on search bookkeeping.
  task_set concrete = problem.tasks;
  for (std::size_t i = 0; i < concrete.size(); ++i)
    concrete[i].wcet = problem.tables[i].at(found[i]);
  const auto recheck = edf_feasible(concrete, problem.point_cap);
  require(recheck.verdict == feasibility::feasible &&
              utilization(concrete) <= 1 && best_total <= budget,
          errc::bad_task, "solver invariant broken: recheck failed");

  result.feasible = true;
  result.colors = std::move(found);
  result.total_colors = best_total;
  result.resource_limited = env.resource_limited;
  for (std::size_t i = 0; i < concrete.size(); ++i)
    result.wcets.push_back(concrete[i].wcet);
  return result;
}

// Baseline distribution: one color each, then the surplus one at a time to a
// uniformly drawn task that can still use more; schedulability is whatever
// the demand test says about the outcome.
inline allocation random_allocation(const allocation_problem& problem,
                                    std::uint64_t seed) {
  validate(problem);
  const int n = static_cast<int>(problem.tasks.size());
  const int budget = num_colors(problem.cache);
  allocation result;
  if (n > budget) {
    result.cause = infeasible_cause::capacity;
    return result;
  }
  std::vector<int> pick(static_cast<std::size_t>(n), 1);
  rng gen(seed);
  for (int surplus = budget - n; surplus > 0; --surplus) {
    std::vector<int> eligible;
    for (int i = 0; i < n; ++i)
      if (pick[static_cast<std::size_t>(i)] <
          problem.tables[static_cast<std::size_t>(i)].max_colors())
        eligible.push_back(i);
    if (eligible.empty()) break;
    const auto w = eligible[static_cast<std::size_t>(
        gen.below(static_cast<std::uint64_t>(eligible.size())))];
    ++pick[static_cast<std::size_t>(w)];
  }

  task_set concrete = problem.tasks;
  int total = 0;
  for (std::size_t i = 0; i < concrete.size(); ++i) {
    concrete[i].wcet = problem.tables[i].at(pick[i]);
    total += pick[i];
  }
  const auto rep = edf_feasible(concrete, problem.point_cap);
  result.colors = std::move(pick);
  result.total_colors = total;
  for (std::size_t i = 0; i < concrete.size(); ++i)
    result.wcets.push_back(concrete[i].wcet);
  result.resource_limited = rep.verdict == feasibility::resource_limit;
  result.feasible = rep.verdict == feasibility::feasible;
  if (!result.feasible) {
    if (rep.verdict == feasibility::resource_limit)
      result.cause = infeasible_cause::resources;
    else if (rep.util > 1)
      result.cause = infeasible_cause::utilization;
    else {
      result.cause = infeasible_cause::demand;
      result.violated_at = rep.dbf.violated_at;
    }
  }
  return result;
}

// CPLEX-style LP text of the exact model: binary pick variables x_i_j, one
// selection row per task, the utilization row scaled to integers by the
// hyperperiod, one demand row per shared check point, and the color capacity
// row.
inline std::string export_lp(const allocation_problem& problem) {
  validate(problem);
  const int n = static_cast<int>(problem.tasks.size());
  const int budget = num_colors(problem.cache);

  const auto hp = hyperperiod(problem.tasks);
  require(hp.has_value(), errc::coefficient_overflow,
          "hyperperiod of the periods does not fit 64-bit integer scaling; "
          "reduce or harmonize the periods, or rely on solve() directly");
  const std::int64_t H = *hp;

  std::string out;
  out += "\\Problem name: color_allocation\n";
  out += "\\ one binary per (task, granted colors); minimize total colors\n";
  out += "Minimize\n obj:";

  auto var = [](int i, int j) {
    return "x_" + std::to_string(i + 1) + "_" + std::to_string(j);
  };
  auto append_terms = [&out](std::vector<std::string> terms) {
    int per_line = 0;
    for (std::size_t k = 0; k < terms.size(); ++k) {
      out += k == 0 ? " " : " + ";
      out += terms[k];
      if (++per_line == 8 && k + 1 < terms.size()) {
        out += "\n   ";
        per_line = 0;
      }
    }
    out += "\n";
  };

  std::vector<std::string> obj;
  for (int i = 0; i < n; ++i)
    for (int j = 1; j <= problem.tables[static_cast<std::size_t>(i)].max_colors(); ++j)
      obj.push_back(std::to_string(j) + " " + var(i, j));
  append_terms(std::move(obj));

  out += "Subject To\n";
  for (int i = 0; i < n; ++i) {
    std::vector<std::string> row;
    for (int j = 1; j <= problem.tables[static_cast<std::size_t>(i)].max_colors(); ++j)
      row.push_back(var(i, j));
    out += " select_" + std::to_string(i + 1) + ":";
    append_terms(std::move(row));
    out.insert(out.size() - 1, " = 1");
  }

  {
    std::vector<std::string> row;
    for (int i = 0; i < n; ++i) {
      const auto& table = problem.tables[static_cast<std::size_t>(i)];
      const std::int64_t scale = H / problem.tasks[static_cast<std::size_t>(i)].period;
      for (int j = 1; j <= table.max_colors(); ++j) {
        std::int64_t coeff;
        require(!__builtin_mul_overflow(table.at(j), scale, &coeff),
                errc::coefficient_overflow,
                "scaled utilization coefficient overflows 64 bits; reduce "
                "periods or WCET magnitudes, or rely on solve() directly");
        row.push_back(std::to_string(coeff) + " " + var(i, j));
      }
    }
    out += " utilization:";
    append_terms(std::move(row));
    out.insert(out.size() - 1, " <= " + std::to_string(H));
  }

  const auto check_points = shared_check_points(problem);
  for (const std::int64_t t : check_points.points) {
    std::vector<std::string> row;
    for (int i = 0; i < n; ++i) {
      const auto& task = problem.tasks[static_cast<std::size_t>(i)];
      if (task.deadline > t) continue;
      const std::int64_t jobs = (t - task.deadline) / task.period + 1;
      const auto& table = problem.tables[static_cast<std::size_t>(i)];
      for (int j = 1; j <= table.max_colors(); ++j) {
        std::int64_t coeff;
        require(!__builtin_mul_overflow(table.at(j), jobs, &coeff),
                errc::coefficient_overflow,
                "demand coefficient overflows 64 bits; shorten the horizon "
                "or rely on solve() directly");
        row.push_back(std::to_string(coeff) + " " + var(i, j));
      }
    }
    if (row.empty()) continue;
    out += " demand_" + std::to_string(t) + ":";
    append_terms(std::move(row));
    out.insert(out.size() - 1, " <= " + std::to_string(t));
  }

  {
    std::vector<std::string> row;
    for (int i = 0; i < n; ++i)
      for (int j = 1; j <= problem.tables[static_cast<std::size_t>(i)].max_colors(); ++j)
        row.push_back(std::to_string(j) + " " + var(i, j));
    out += " capacity:";
    append_terms(std::move(row));
    out.insert(out.size() - 1, " <= " + std::to_string(budget));
  }

  out += "Binaries\n";
  {
    std::string line;
    for (int i = 0; i < n; ++i)
      for (int j = 1; j <= problem.tables[static_cast<std::size_t>(i)].max_colors(); ++j) {
        line += " " + var(i, j);
        if (line.size() > 70) {
          out += line + "\n";
          line.clear();
        }
      }
    if (!line.empty()) out += line + "\n";
  }
  out += "End\n";
  return out;
}

}  // namespace colorsched
