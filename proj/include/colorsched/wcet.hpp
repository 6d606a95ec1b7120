#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "colorsched/cache_analysis.hpp"
#include "colorsched/cache_config.hpp"
#include "colorsched/coloring.hpp"
#include "colorsched/errors.hpp"
#include "colorsched/heuristics.hpp"
#include "colorsched/program.hpp"

namespace colorsched {

inline std::int64_t checked_add(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  require(!__builtin_add_overflow(a, b, &r), errc::coefficient_overflow,
          "cycle count overflows 64 bits");
  return r;
}

inline std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  require(!__builtin_mul_overflow(a, b, &r), errc::coefficient_overflow,
          "cycle count overflows 64 bits");
  return r;
}

// Per-execution cost of one block: one cycle per instruction plus the miss
// penalty for every line the analysis could not classify better than NC.
struct costed_block {
  int block = -1;
  std::int64_t base_cycles = 0;
  std::int64_t miss_cycles = 0;

  std::int64_t total() const { return base_cycles + miss_cycles; }
};

// Collapsed loop: the longest body path prices FM lines of this scope as
// hits; their one-off misses are charged once per entry via fm_charge.
struct loop_summary {
  int loop = -1;
  std::int64_t bound = 1;
  std::int64_t body_longest_cycles = 0;
  std::int64_t fm_charge = 0;

  std::int64_t total() const {
    return checked_add(checked_mul(bound, body_longest_cycles), fm_charge);
  }
};

struct wcet_details {
  std::vector<costed_block> blocks;
  std::vector<loop_summary> loops;
  std::int64_t total = 0;
};

namespace detail {

// Longest path over a contracted DAG slice. `order` must list the node ids in
// topological order; edges carry no cost, nodes do.
struct contracted_graph {
  std::vector<int> order;                        // topo order of node ids
  std::vector<std::pair<int, int>> edges;        // deduplicated
  std::vector<std::int64_t>* cost = nullptr;     // indexed by node id

  // Longest path starting at `source`, measured in node costs including both
  // endpoints; returns the maximum over all reachable nodes, or the distance
  // to `sink` when sink >= 0.
  std::int64_t longest_from(int source, int sink) const {
    constexpr std::int64_t unreached = std::numeric_limits<std::int64_t>::min();
    std::vector<std::int64_t> dist(cost->size(), unreached);
    dist[static_cast<std::size_t>(source)] =
        (*cost)[static_cast<std::size_t>(source)];
    for (int node : order) {
      if (dist[static_cast<std::size_t>(node)] == unreached) continue;
      for (const auto& [u, v] : edges) {
        if (u != node) continue;
        const std::int64_t cand = checked_add(
            dist[static_cast<std::size_t>(u)], (*cost)[static_cast<std::size_t>(v)]);
        dist[static_cast<std::size_t>(v)] =
            std::max(dist[static_cast<std::size_t>(v)], cand);
      }
    }
    if (sink >= 0) {
      require(dist[static_cast<std::size_t>(sink)] != unreached,
              errc::exit_unreachable, "exit not reachable in contracted graph");
      return dist[static_cast<std::size_t>(sink)];
    }
    std::int64_t best = unreached;
    for (int node : order)
      best = std::max(best, dist[static_cast<std::size_t>(node)]);
    return best;
  }
};

}  // namespace detail

// Safe WCET of the program under a coloring: collapse loops innermost-first
// into super-nodes costing bound × (longest body path) + fm_charge, then take
// the longest entry→exit path in the remaining DAG.
inline wcet_details wcet_with_details(const program_index& idx,
                                      const coloring& col,
                                      const cache_config& cache) {
  const classification cls = classify(idx, col, cache);
  const int n = idx.n_blocks();
  const auto& loops = idx.loops();
  const int nl = static_cast<int>(loops.size());

  wcet_details out;

  // Node ids: 0..n-1 original blocks, n..n+nl-1 loop super-nodes.
  std::vector<std::int64_t> node_cost(static_cast<std::size_t>(n + nl), 0);
  for (int b = 0; b < n; ++b) {
    const auto& bb = idx.block(b);
    costed_block cb;
    cb.block = b;
    cb.base_cycles = bb.instr_count;
    int nc_lines = 0;
    for (int line = bb.first_line; line <= bb.last_line; ++line)
      if (cls.of_line(idx, b, line).cls == access_class::not_classified)
        ++nc_lines;
    cb.miss_cycles = checked_mul(cache.miss_penalty, nc_lines);
    node_cost[static_cast<std::size_t>(b)] = cb.total();
    out.blocks.push_back(cb);
  }

  // One-off miss charge per loop scope: distinct FM lines attributed to it.
  std::vector<std::set<std::pair<int, int>>> fm_lines(
      static_cast<std::size_t>(nl));
  for (int b = 0; b < n; ++b) {
    const auto& bb = idx.block(b);
    for (int line = bb.first_line; line <= bb.last_line; ++line) {
      const line_class& lc = cls.of_line(idx, b, line);
      if (lc.cls == access_class::first_miss)
        fm_lines[static_cast<std::size_t>(lc.scope)].insert({bb.page, line});
    }
  }

  // Collapse innermost-first. owner[b] = node currently standing in for b.
  std::vector<int> owner(static_cast<std::size_t>(n));
  std::iota(owner.begin(), owner.end(), 0);
  std::vector<int> loop_order(static_cast<std::size_t>(nl));
  std::iota(loop_order.begin(), loop_order.end(), 0);
  std::sort(loop_order.begin(), loop_order.end(), [&](int a, int b) {
    return loops[static_cast<std::size_t>(a)].depth >
           loops[static_cast<std::size_t>(b)].depth;
  });

  // Builds the contracted slice over `body` (nullptr = whole graph),
  // excluding self-edges and the given back edges.
  auto build_slice = [&](const std::vector<char>* body,
                         const std::vector<std::pair<int, int>>* skip) {
    detail::contracted_graph g;
    g.cost = &node_cost;
    std::vector<char> in_order(node_cost.size(), 0);
    for (int b : idx.topo_order()) {
      const int node = owner[static_cast<std::size_t>(b)];
      if (body && !(*body)[static_cast<std::size_t>(node)]) continue;
      if (!in_order[static_cast<std::size_t>(node)]) {
        in_order[static_cast<std::size_t>(node)] = 1;
        g.order.push_back(node);
      }
    }
    for (int u = 0; u < n; ++u)
      for (int v : idx.successors(u)) {
        if (skip && std::find(skip->begin(), skip->end(),
                              std::make_pair(u, v)) != skip->end())
          continue;
        const int nu = owner[static_cast<std::size_t>(u)];
        const int nv = owner[static_cast<std::size_t>(v)];
        if (nu == nv) continue;
        if (body && (!(*body)[static_cast<std::size_t>(nu)] ||
                     !(*body)[static_cast<std::size_t>(nv)]))
          continue;
        const auto e = std::make_pair(nu, nv);
        if (std::find(g.edges.begin(), g.edges.end(), e) == g.edges.end())
          g.edges.push_back(e);
      }
    return g;
  };

  for (int l : loop_order) {
    const loop_nest& ln = loops[static_cast<std::size_t>(l)];
    std::vector<char> body(node_cost.size(), 0);
    for (int b : ln.members)
      body[static_cast<std::size_t>(owner[static_cast<std::size_t>(b)])] = 1;
    const auto slice = build_slice(&body, &ln.back_edges);
    const int header_node = owner[static_cast<std::size_t>(ln.header)];

    loop_summary summary;
    summary.loop = l;
    summary.bound = ln.bound;
    summary.body_longest_cycles = slice.longest_from(header_node, -1);
    summary.fm_charge = checked_mul(
        cache.miss_penalty,
        static_cast<std::int64_t>(fm_lines[static_cast<std::size_t>(l)].size()));
    node_cost[static_cast<std::size_t>(n + l)] = summary.total();
    out.loops.push_back(summary);

    for (int b : ln.members) owner[static_cast<std::size_t>(b)] = n + l;
  }

  const auto top = build_slice(nullptr, nullptr);
  out.total = top.longest_from(owner[static_cast<std::size_t>(idx.entry())],
                               owner[static_cast<std::size_t>(idx.exit())]);
  return out;
}

inline std::int64_t wcet(const program_index& idx, const coloring& col,
                         const cache_config& cache) {
  return wcet_with_details(idx, col, cache).total;
}

inline std::int64_t wcet(const task_program& prog, const coloring& col,
                         const cache_config& cache) {
  program_index idx(prog);
  return wcet(idx, col, cache);
}

// WCET with every page privately colored: the cache is effectively unbounded,
// only self-interference within a page's own lines remains (there is none at
// line granularity, so all that is left are cold/first misses).
inline std::int64_t infinite_cache_wcet(const program_index& idx,
                                        const cache_config& cache) {
  std::vector<int> identity(
      static_cast<std::size_t>(idx.program().page_count));
  std::iota(identity.begin(), identity.end(), 0);
  return wcet(idx, coloring(std::move(identity)), cache);
}

inline std::int64_t infinite_cache_wcet(const task_program& prog,
                                        const cache_config& cache) {
  program_index idx(prog);
  return infinite_cache_wcet(idx, cache);
}

// C_i(j) table: heuristic coloring restricted to j colors for every j up to
// the task's color share cap, forced monotone non-increasing by prefix-min
// (a task granted j colors may always fall back to a smaller grant's
// coloring, so extra colors never hurt).
struct wcet_entry {
  std::int64_t wcet_cycles = 0;
  coloring realized;
};

struct wcet_table {
  std::string task_id;
  heuristic method = heuristic::fair;
  std::vector<wcet_entry> entries;  // entries[j-1] belongs to budget j

  int max_colors() const { return static_cast<int>(entries.size()); }
  std::int64_t at(int j) const {
    require(j >= 1 && j <= max_colors(), errc::bad_budget,
            "no table entry for " + std::to_string(j) + " colors");
    return entries[static_cast<std::size_t>(j - 1)].wcet_cycles;
  }
};

inline wcet_table build_wcet_table(const program_index& idx, heuristic h,
                                   std::uint64_t seed,
                                   const cache_config& cache, int n_tasks) {
  const task_program& prog = idx.program();
  wcet_table table;
  table.task_id = prog.task_id;
  table.method = h;
  const int cap = s_max(prog.page_count, cache, n_tasks);
  for (int j = 1; j <= cap; ++j) {
    coloring col = make_coloring(h, idx, j, seed);
    wcet_entry entry{wcet(idx, col, cache), std::move(col)};
    if (!table.entries.empty() &&
        table.entries.back().wcet_cycles < entry.wcet_cycles)
      entry = table.entries.back();  // prefix-min keeps the better coloring
    table.entries.push_back(std::move(entry));
  }
  return table;
}

inline wcet_table build_wcet_table(const task_program& prog, heuristic h,
                                   std::uint64_t seed,
                                   const cache_config& cache, int n_tasks) {
  program_index idx(prog);
  return build_wcet_table(idx, h, seed, cache, n_tasks);
}

}  // namespace colorsched
