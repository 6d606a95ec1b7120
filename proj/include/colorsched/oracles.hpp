#pragma once

// Brute-force reference implementations. Deliberately slow and simple: these
// are the independent oracles the test suite checks the analytical code
// against, so they must stay free of any machinery they are used to verify.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "colorsched/cache_analysis.hpp"
#include "colorsched/cache_config.hpp"
#include "colorsched/coloring.hpp"
#include "colorsched/errors.hpp"
#include "colorsched/program.hpp"
#include "colorsched/schedulability.hpp"
#include "colorsched/task.hpp"
#include "colorsched/wcet.hpp"

namespace colorsched {

// One bounded entry→exit path with its concrete LRU cost.
struct path_trace {
  std::vector<int> blocks;  // block indices in execution order
  std::int64_t cost = 0;    // instructions + miss penalties
  std::map<std::pair<int, int>, int> line_misses;  // (page, line) -> misses
};

// Concrete LRU replay of a block sequence: every line of a block is touched
// in order, one cycle per instruction, miss_penalty per line miss.
inline path_trace simulate_path(const program_index& idx, const coloring& col,
                                const cache_config& cache,
                                std::vector<int> blocks) {
  path_trace trace;
  // MRU-first page list per set.
  std::map<set_ref, std::vector<int>> sets;
  for (int b : blocks) {
    const basic_block& bb = idx.block(b);
    trace.cost = checked_add(trace.cost, bb.instr_count);
    for (int line = bb.first_line; line <= bb.last_line; ++line) {
      auto& stack = sets[set_of(bb.page, line, col, cache)];
      auto hit = std::find(stack.begin(), stack.end(), bb.page);
      if (hit != stack.end()) {
        stack.erase(hit);
      } else {
        trace.cost = checked_add(trace.cost, cache.miss_penalty);
        ++trace.line_misses[{bb.page, line}];
        if (static_cast<int>(stack.size()) == cache.ways) stack.pop_back();
      }
      stack.insert(stack.begin(), bb.page);
    }
  }
  trace.blocks = std::move(blocks);
  return trace;
}

// Exhaustive enumeration of entry→exit paths respecting loop bounds: a loop
// entered anew may execute its body at most `bound` times, i.e. traverse its
// back edges at most bound-1 times per entry. Paths end at the first arrival
// at the exit block. Throws once more than `limit` paths exist.
inline std::vector<path_trace> enumerate_paths(const program_index& idx,
                                               const coloring& col,
                                               const cache_config& cache,
                                               std::size_t limit) {
  validate_lines(idx.program(), cache);
  const auto& loops = idx.loops();
  std::vector<path_trace> traces;
  std::vector<int> current;
  // Iterations consumed in the currently open entry of each loop; -1 when
  // the loop is not active.
  std::vector<std::int64_t> iters(loops.size(), -1);

  auto loop_entered = [&](int from, int to) {
    // The single loop (if any) that `to` starts which `from` was outside of.
    for (std::size_t l = 0; l < loops.size(); ++l)
      if (loops[l].header == to &&
          (from < 0 || !idx.loop_contains(static_cast<int>(l), from)))
        return static_cast<int>(l);
    return -1;
  };

  // Explicit DFS. Each frame: (block, next successor cursor, loop whose entry
  // this step opened (-1), loop whose back edge this step consumed (-1),
  // loops this step deactivated).
  struct frame {
    int block;
    std::size_t cursor = 0;
    int opened = -1;
    std::vector<std::pair<int, std::int64_t>> closed;  // (loop, prior iters)
  };
  std::vector<frame> stack;

  auto push_block = [&](int from, int to) -> bool {
    frame f;
    f.block = to;
    if (from >= 0) {
      // Close entries of loops left behind.
      for (std::size_t l = 0; l < loops.size(); ++l)
        if (iters[l] >= 0 && idx.loop_contains(static_cast<int>(l), from) &&
            !idx.loop_contains(static_cast<int>(l), to)) {
          f.closed.emplace_back(static_cast<int>(l), iters[l]);
          iters[l] = -1;
        }
      // A declared back edge consumes one more body execution.
      for (std::size_t l = 0; l < loops.size(); ++l) {
        const auto& be = loops[l].back_edges;
        if (std::find(be.begin(), be.end(), std::make_pair(from, to)) !=
            be.end()) {
          if (iters[l] + 1 > loops[l].bound) {  // budget exhausted
            for (auto& [cl, prev] : f.closed) iters[cl] = prev;
            return false;
          }
          ++iters[l];
        }
      }
    }
    const int opened = loop_entered(from, to);
    if (opened >= 0) {
      f.opened = opened;
      iters[static_cast<std::size_t>(opened)] = 1;
    }
    current.push_back(to);
    stack.push_back(std::move(f));
    return true;
  };

  auto pop_block = [&]() {
    frame f = std::move(stack.back());
    stack.pop_back();
    current.pop_back();
    if (f.opened >= 0) iters[static_cast<std::size_t>(f.opened)] = -1;
    if (!stack.empty()) {
      const int from = stack.back().block;
      for (std::size_t l = 0; l < loops.size(); ++l) {
        const auto& be = loops[l].back_edges;
        if (std::find(be.begin(), be.end(),
                      std::make_pair(from, f.block)) != be.end())
          --iters[l];
      }
    }
    for (auto& [cl, prev] : f.closed) iters[cl] = prev;
  };

  push_block(-1, idx.entry());
  while (!stack.empty()) {
    frame& top = stack.back();
    if (top.block == idx.exit()) {
      require(traces.size() < limit, errc::oracle_scope,
              "more than " + std::to_string(limit) + " bounded paths");
      traces.push_back(simulate_path(idx, col, cache, current));
      pop_block();
      continue;
    }
    const auto& succs = idx.successors(top.block);
    if (top.cursor >= succs.size()) {
      pop_block();
      continue;
    }
    const int next = succs[top.cursor++];
    push_block(top.block, next);  // no-op when the loop budget is exhausted
  }
  return traces;
}

inline std::vector<path_trace> enumerate_paths(const task_program& prog,
                                               const coloring& col,
                                               const cache_config& cache,
                                               std::size_t limit) {
  program_index idx(prog);
  return enumerate_paths(idx, col, cache, limit);
}

// First deadline miss of synchronous periodic EDF, or a clean run.
struct edf_report {
  bool missed = false;
  std::int64_t miss_time = -1;
  int task = -1;
};

// Cycle-accurate preemptive EDF: all tasks release at 0 and then strictly
// every period; ties on absolute deadline go to the lower task index. Only
// deadlines up to `horizon` are checked.
inline edf_report edf_simulate(const task_set& tasks, std::int64_t horizon) {
  validate(tasks);
  require(horizon >= 0, errc::bad_config, "horizon must be >= 0");
  struct job {
    std::int64_t deadline;
    int task;
    std::int64_t remaining;
  };
  const int n = static_cast<int>(tasks.size());
  std::vector<std::int64_t> next_release(static_cast<std::size_t>(n), 0);
  std::vector<job> ready;
  std::int64_t now = 0;

  auto release_due = [&]() {
    for (int i = 0; i < n; ++i)
      while (next_release[static_cast<std::size_t>(i)] <= now &&
             next_release[static_cast<std::size_t>(i)] < horizon) {
        const auto& t = tasks[static_cast<std::size_t>(i)];
        ready.push_back({next_release[static_cast<std::size_t>(i)] + t.deadline,
                         i, t.wcet});
        next_release[static_cast<std::size_t>(i)] += t.period;
      }
  };
  auto earliest_pending_release = [&]() {
    std::int64_t best = -1;
    for (int i = 0; i < n; ++i) {
      const std::int64_t r = next_release[static_cast<std::size_t>(i)];
      if (r >= horizon) continue;
      if (best < 0 || r < best) best = r;
    }
    return best;
  };

  while (true) {
    release_due();
    // Earliest missed deadline so far, ties to lower task index.
    const job* miss = nullptr;
    for (const auto& j : ready)
      if (j.deadline <= now && j.deadline <= horizon && j.remaining > 0 &&
          (!miss || j.deadline < miss->deadline ||
           (j.deadline == miss->deadline && j.task < miss->task)))
        miss = &j;
    if (miss) return {true, miss->deadline, miss->task};

    std::erase_if(ready, [](const job& j) { return j.remaining == 0; });
    job* run = nullptr;
    for (auto& j : ready)
      if (!run || j.deadline < run->deadline ||
          (j.deadline == run->deadline && j.task < run->task))
        run = &j;

    const std::int64_t next_rel = earliest_pending_release();
    if (!run) {
      if (next_rel < 0) return {};  // idle forever: clean
      now = next_rel;
      continue;
    }
    std::int64_t until = now + run->remaining;       // completion
    if (next_rel >= 0) until = std::min(until, next_rel);
    if (run->deadline > now) until = std::min(until, run->deadline);
    run->remaining -= until - now;
    now = until;
    if (now >= horizon) {
      // Deadlines beyond the horizon are out of scope; one last miss check
      // at the boundary keeps deadlines exactly at `horizon` honest.
      const job* late = nullptr;
      for (const auto& j : ready)
        if (j.deadline <= horizon && j.remaining > 0 && j.deadline <= now &&
            (!late || j.deadline < late->deadline ||
             (j.deadline == late->deadline && j.task < late->task)))
          late = &j;
      if (late) return {true, late->deadline, late->task};
      return {};
    }
  }
}

// Exhaustive multiple-choice search over table entries: the reference for the
// branch-and-bound allocator. Enumerates j-vectors in lexicographic order
// (original task order, fewer colors first) so ties resolve to the smallest
// vector, exactly like the solver's contract.
struct brute_allocation {
  bool feasible = false;
  int total_colors = 0;
  std::vector<int> colors;
  bool resource_limited = false;  // some selection hit check-point caps
};

inline brute_allocation brute_force_allocation(
    const std::vector<wcet_table>& tables, const task_set& skeleton, int budget,
    std::size_t cap = 100000) {
  require(!tables.empty(), errc::bad_task, "no tables");
  require(tables.size() == skeleton.size(), errc::inconsistent_ids,
          "table/task count mismatch");
  std::size_t combos = 1;
  for (std::size_t i = 0; i < tables.size(); ++i) {
    require(tables[i].task_id == skeleton[i].id, errc::inconsistent_ids,
            "table for '" + tables[i].task_id + "' paired with task '" +
                skeleton[i].id + "'");
    require(tables[i].max_colors() >= 1, errc::bad_task,
            "empty table for task " + tables[i].task_id);
    combos *= static_cast<std::size_t>(tables[i].max_colors());
    require(combos <= 1000000, errc::oracle_scope,
            "selection space too large for brute force");
  }

  const int n = static_cast<int>(tables.size());
  std::vector<int> pick(static_cast<std::size_t>(n), 1);
  brute_allocation best;
  bool done = false;
  while (!done) {
    int total = 0;
    for (int j : pick) total += j;
    if (total <= budget && (!best.feasible || total < best.total_colors)) {
      task_set concrete = skeleton;
      for (int i = 0; i < n; ++i)
        concrete[static_cast<std::size_t>(i)].wcet =
            tables[static_cast<std::size_t>(i)].at(
                pick[static_cast<std::size_t>(i)]);
      const auto rep = edf_feasible(concrete, cap);
      if (rep.verdict == feasibility::resource_limit)
        best.resource_limited = true;
      if (rep.verdict == feasibility::feasible) {
        best.feasible = true;
        best.total_colors = total;
        best.colors = pick;
      }
    }
    // Odometer, last task fastest: enumerates lexicographically ascending.
    done = true;
    for (int i = n - 1; i >= 0; --i) {
      if (pick[static_cast<std::size_t>(i)] <
          tables[static_cast<std::size_t>(i)].max_colors()) {
        ++pick[static_cast<std::size_t>(i)];
        std::fill(pick.begin() + i + 1, pick.end(), 1);
        done = false;
        break;
      }
    }
  }
  return best;
}

}  // namespace colorsched
