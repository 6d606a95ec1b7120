#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "colorsched/cache_config.hpp"
#include "colorsched/errors.hpp"

namespace colorsched {

// One straight-line run of instructions, pinned to a page and to an inclusive
// range of cache lines within that page.
struct basic_block {
  std::string id;
  int page = 0;
  int first_line = 0;
  int last_line = 0;
  std::int64_t instr_count = 1;

  friend bool operator==(const basic_block&, const basic_block&) = default;
};

// Loop declaration: bound is the maximum number of body executions per entry
// of the loop, so its back edges are traversed at most bound-1 times per
// entry.
struct loop_decl {
  std::string header;
  std::int64_t bound = 1;
  std::vector<std::pair<std::string, std::string>> back_edges;

  friend bool operator==(const loop_decl&, const loop_decl&) = default;
};

// A task's control flow graph with page-mapped blocks and declared,
// bounded, properly nested loops. This stands in for binary-level CFG
// reconstruction: fixtures are authored or generated directly.
struct task_program {
  std::string task_id;
  int page_count = 1;
  std::vector<basic_block> blocks;
  std::vector<std::pair<std::string, std::string>> edges;
  std::string entry;
  std::string exit;
  std::vector<loop_decl> loops;

  friend bool operator==(const task_program&, const task_program&) = default;
};

// Resolved loop: block indices instead of ids, members of the natural loop
// (header included), parent link and nesting depth (outermost = 1).
struct loop_nest {
  int header = -1;
  std::int64_t bound = 1;
  std::vector<std::pair<int, int>> back_edges;
  std::vector<int> members;  // sorted block indices
  int parent = -1;           // enclosing loop index, -1 if top level
  int depth = 1;
};

namespace detail {

// Reverse postorder from `entry` over `succ`, restricted to reachable nodes.
inline std::vector<int> reverse_postorder(
    int entry, const std::vector<std::vector<int>>& succ) {
  const int n = static_cast<int>(succ.size());
  std::vector<char> seen(n, 0);
  std::vector<int> order;
  order.reserve(n);
  // Iterative DFS carrying an explicit successor cursor per frame.
  std::vector<std::pair<int, std::size_t>> stack;
  stack.emplace_back(entry, 0);
  seen[entry] = 1;
  while (!stack.empty()) {
    auto& [node, cursor] = stack.back();
    if (cursor < succ[node].size()) {
      const int next = succ[node][cursor++];
      if (!seen[next]) {
        seen[next] = 1;
        stack.emplace_back(next, 0);
      }
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }
  std::reverse(order.begin(), order.end());
  return order;
}

}  // namespace detail

// Validated, indexed view of a task_program: integer block ids, adjacency,
// dominators-checked reducibility, topological order with back edges removed,
// and the resolved loop nest. Construction performs the full invariant check
// and throws a diagnostic-coded error on the first violation.
class program_index {
 public:
  explicit program_index(task_program p) : prog_(std::move(p)) {
    index_blocks();
    index_edges();
    check_reachability();
    resolve_loops();
    check_acyclic_without_back_edges();
    check_dominance();
    compute_loop_members();
    compute_nesting();
  }

  const task_program& program() const { return prog_; }
  int n_blocks() const { return static_cast<int>(prog_.blocks.size()); }

  int block_index(const std::string& id) const {
    auto it = by_id_.find(id);
    require(it != by_id_.end(), errc::unknown_block, "no block named " + id);
    return it->second;
  }
  const basic_block& block(int b) const { return prog_.blocks[b]; }
  int entry() const { return entry_; }
  int exit() const { return exit_; }
  const std::vector<int>& successors(int b) const { return succ_[b]; }
  const std::vector<int>& predecessors(int b) const { return pred_[b]; }

  // Block order in which every non-back edge goes forward.
  const std::vector<int>& topo_order() const { return topo_; }

  const std::vector<loop_nest>& loops() const { return loops_; }

  bool is_back_edge(int from, int to) const {
    return std::find(back_edges_.begin(), back_edges_.end(),
                     std::make_pair(from, to)) != back_edges_.end();
  }

  // Innermost loop containing block b, -1 when outside all loops.
  int innermost_loop(int b) const { return innermost_[b]; }

  // Number of declared loops containing block b.
  int nesting_level(int b) const {
    const int l = innermost_[b];
    return l < 0 ? 0 : loops_[l].depth;
  }

  bool loop_contains(int loop, int b) const {
    return member_mask_[loop][static_cast<std::size_t>(b)] != 0;
  }

 private:
  void index_blocks() {
    require(!prog_.blocks.empty(), errc::malformed_document,
            "program has no blocks");
    for (int b = 0; b < n_blocks(); ++b) {
      const basic_block& bb = prog_.blocks[b];
      require(!bb.id.empty(), errc::malformed_document, "block with empty id");
      auto [it, inserted] = by_id_.emplace(bb.id, b);
      (void)it;
      require(inserted, errc::duplicate_block, "duplicate block id " + bb.id);
      require(bb.instr_count >= 1, errc::malformed_document,
              "block " + bb.id + ": instr_count must be >= 1");
      require(bb.page >= 0 && bb.page < prog_.page_count,
              errc::page_out_of_range,
              "block " + bb.id + ": page " + std::to_string(bb.page) +
                  " outside [0, " + std::to_string(prog_.page_count) + ")");
      require(bb.first_line >= 0 && bb.first_line <= bb.last_line,
              errc::line_out_of_range,
              "block " + bb.id + ": bad line range [" +
                  std::to_string(bb.first_line) + ", " +
                  std::to_string(bb.last_line) + "]");
    }
    require(prog_.page_count >= 1, errc::bad_page_count,
            "page_count must be >= 1");
    int max_page = 0;
    for (const auto& bb : prog_.blocks) max_page = std::max(max_page, bb.page);
    require(prog_.page_count == max_page + 1, errc::bad_page_count,
            "page_count is " + std::to_string(prog_.page_count) +
                " but highest page referenced is " + std::to_string(max_page));
    entry_ = block_index(prog_.entry);
    exit_ = block_index(prog_.exit);
  }

  void index_edges() {
    succ_.assign(n_blocks(), {});
    pred_.assign(n_blocks(), {});
    std::vector<std::pair<int, int>> seen;
    for (const auto& [from, to] : prog_.edges) {
      const int u = block_index(from);
      const int v = block_index(to);
      const auto e = std::make_pair(u, v);
      if (std::find(seen.begin(), seen.end(), e) != seen.end()) continue;
      seen.push_back(e);
      succ_[u].push_back(v);
      pred_[v].push_back(u);
    }
  }

  void check_reachability() {
    // Forward from entry.
    std::vector<char> fwd(n_blocks(), 0);
    std::vector<int> stack{entry_};
    fwd[entry_] = 1;
    while (!stack.empty()) {
      const int b = stack.back();
      stack.pop_back();
      for (int s : succ_[b])
        if (!fwd[s]) {
          fwd[s] = 1;
          stack.push_back(s);
        }
    }
    for (int b = 0; b < n_blocks(); ++b)
      require(fwd[b], errc::unreachable_block,
              "block " + block(b).id + " unreachable from entry");
    // Backward from exit.
    std::vector<char> bwd(n_blocks(), 0);
    stack.assign(1, exit_);
    bwd[exit_] = 1;
    while (!stack.empty()) {
      const int b = stack.back();
      stack.pop_back();
      for (int p : pred_[b])
        if (!bwd[p]) {
          bwd[p] = 1;
          stack.push_back(p);
        }
    }
    for (int b = 0; b < n_blocks(); ++b)
      require(bwd[b], errc::exit_unreachable,
              "exit not reachable from block " + block(b).id);
  }

  void resolve_loops() {
    std::vector<char> header_seen(n_blocks(), 0);
    for (const auto& decl : prog_.loops) {
      loop_nest ln;
      ln.header = block_index(decl.header);
      require(!header_seen[ln.header], errc::bad_loop,
              "block " + decl.header + " declared as header of two loops");
      header_seen[ln.header] = 1;
      require(decl.bound >= 1, errc::bad_loop,
              "loop " + decl.header + ": bound must be >= 1");
      require(!decl.back_edges.empty(), errc::bad_loop,
              "loop " + decl.header + ": no back edges declared");
      for (const auto& [from, to] : decl.back_edges) {
        const int u = block_index(from);
        const int v = block_index(to);
        require(v == ln.header, errc::bad_loop,
                "loop " + decl.header + ": back edge " + from + "->" + to +
                    " does not target the header");
        require(std::find(succ_[u].begin(), succ_[u].end(), v) != succ_[u].end(),
                errc::bad_loop,
                "loop " + decl.header + ": back edge " + from + "->" + to +
                    " is not an edge of the graph");
        const auto e = std::make_pair(u, v);
        if (std::find(ln.back_edges.begin(), ln.back_edges.end(), e) ==
            ln.back_edges.end())
          ln.back_edges.push_back(e);
      }
      ln.bound = decl.bound;
      loops_.push_back(std::move(ln));
    }
    for (const auto& ln : loops_)
      for (const auto& e : ln.back_edges)
        if (std::find(back_edges_.begin(), back_edges_.end(), e) ==
            back_edges_.end())
          back_edges_.push_back(e);
  }

  void check_acyclic_without_back_edges() {
    // Kahn's algorithm on the graph minus declared back edges; any leftover
    // node sits on an undeclared (hence unbounded) cycle.
    std::vector<int> indeg(n_blocks(), 0);
    for (int u = 0; u < n_blocks(); ++u)
      for (int v : succ_[u])
        if (!is_back_edge(u, v)) ++indeg[v];
    std::vector<int> queue;
    for (int b = 0; b < n_blocks(); ++b)
      if (indeg[b] == 0) queue.push_back(b);
    topo_.clear();
    for (std::size_t i = 0; i < queue.size(); ++i) {
      const int u = queue[i];
      topo_.push_back(u);
      for (int v : succ_[u])
        if (!is_back_edge(u, v) && --indeg[v] == 0) queue.push_back(v);
    }
    for (int b = 0; b < n_blocks(); ++b)
      require(indeg[b] == 0, errc::unbounded_cycle,
              "block " + block(b).id +
                  " lies on a cycle not covered by any declared loop");
  }

  void check_dominance() {
    // Iterative dominator sets as bitmasks; all blocks are entry-reachable at
    // this point, so the textbook initialization applies.
    const int n = n_blocks();
    const std::size_t words = (static_cast<std::size_t>(n) + 63) / 64;
    std::vector<std::vector<std::uint64_t>> dom(
        n, std::vector<std::uint64_t>(words, ~std::uint64_t{0}));
    auto only_self = [&](int b) {
      std::vector<std::uint64_t> s(words, 0);
      s[b / 64] |= std::uint64_t{1} << (b % 64);
      return s;
    };
    dom[entry_] = only_self(entry_);
    const std::vector<int> rpo = detail::reverse_postorder(entry_, succ_);
    bool changed = true;
    while (changed) {
      changed = false;
      for (int b : rpo) {
        if (b == entry_) continue;
        std::vector<std::uint64_t> acc(words, ~std::uint64_t{0});
        for (int p : pred_[b])
          for (std::size_t w = 0; w < words; ++w) acc[w] &= dom[p][w];
        acc[b / 64] |= std::uint64_t{1} << (b % 64);
        if (acc != dom[b]) {
          dom[b] = std::move(acc);
          changed = true;
        }
      }
    }
    auto dominates = [&](int a, int b) {
      return (dom[b][a / 64] >> (a % 64)) & 1;
    };
    for (const auto& ln : loops_)
      for (const auto& [u, h] : ln.back_edges)
        require(dominates(h, u), errc::irreducible_cfg,
                "back edge " + block(u).id + "->" + block(h).id +
                    ": header does not dominate the source");
  }

  void compute_loop_members() {
    for (auto& ln : loops_) {
      std::vector<char> in(n_blocks(), 0);
      in[ln.header] = 1;
      std::vector<int> stack;
      for (const auto& [u, h] : ln.back_edges) {
        (void)h;
        if (!in[u]) {
          in[u] = 1;
          stack.push_back(u);
        }
      }
      while (!stack.empty()) {
        const int b = stack.back();
        stack.pop_back();
        for (int p : pred_[b])
          if (!in[p]) {
            in[p] = 1;
            stack.push_back(p);
          }
      }
      for (int b = 0; b < n_blocks(); ++b)
        if (in[b]) ln.members.push_back(b);
      member_mask_.push_back(std::move(in));
    }
    // Natural loops with distinct headers must be disjoint or nested.
    for (std::size_t i = 0; i < loops_.size(); ++i)
      for (std::size_t j = i + 1; j < loops_.size(); ++j) {
        const auto& a = loops_[i].members;
        const auto& b = loops_[j].members;
        std::vector<int> common;
        std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                              std::back_inserter(common));
        if (common.empty()) continue;
        const bool a_in_b = common.size() == a.size();
        const bool b_in_a = common.size() == b.size();
        require(a_in_b || b_in_a, errc::irreducible_cfg,
                "loops " + block(loops_[i].header).id + " and " +
                    block(loops_[j].header).id + " overlap without nesting");
      }
  }

  void compute_nesting() {
    // Parent = smallest strict superset.
    for (std::size_t i = 0; i < loops_.size(); ++i) {
      int best = -1;
      for (std::size_t j = 0; j < loops_.size(); ++j) {
        if (i == j) continue;
        if (loops_[j].members.size() <= loops_[i].members.size()) continue;
        if (!std::includes(loops_[j].members.begin(), loops_[j].members.end(),
                           loops_[i].members.begin(), loops_[i].members.end()))
          continue;
        if (best < 0 || loops_[j].members.size() < loops_[best].members.size())
          best = static_cast<int>(j);
      }
      loops_[i].parent = best;
    }
    for (auto& ln : loops_) {
      int d = 1;
      for (int p = ln.parent; p >= 0; p = loops_[p].parent) ++d;
      ln.depth = d;
    }
    innermost_.assign(n_blocks(), -1);
    for (int b = 0; b < n_blocks(); ++b) {
      int best = -1;
      for (std::size_t l = 0; l < loops_.size(); ++l) {
        if (!member_mask_[l][static_cast<std::size_t>(b)]) continue;
        if (best < 0 || loops_[l].members.size() < loops_[best].members.size())
          best = static_cast<int>(l);
      }
      innermost_[b] = best;
    }
  }

  task_program prog_;
  std::unordered_map<std::string, int> by_id_;
  int entry_ = -1;
  int exit_ = -1;
  std::vector<std::vector<int>> succ_, pred_;
  std::vector<std::pair<int, int>> back_edges_;
  std::vector<int> topo_;
  std::vector<loop_nest> loops_;
  std::vector<std::vector<char>> member_mask_;
  std::vector<int> innermost_;
};

// Full invariant check without keeping the index around.
inline void validate(const task_program& p) { program_index idx(p); }

// Count of declared loops containing the named block.
inline int nesting_level(const task_program& p, const std::string& block_id) {
  program_index idx(p);
  return idx.nesting_level(idx.block_index(block_id));
}

// Blocks must also fit the cache line geometry before any cache analysis.
inline void validate_lines(const task_program& p, const cache_config& cache) {
  for (const auto& bb : p.blocks)
    require(bb.last_line < cache.lines_per_page, errc::line_out_of_range,
            "block " + bb.id + ": last line " + std::to_string(bb.last_line) +
                " outside a page of " + std::to_string(cache.lines_per_page) +
                " lines");
}

}  // namespace colorsched
