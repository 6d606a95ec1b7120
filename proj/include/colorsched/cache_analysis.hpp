#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "colorsched/cache_config.hpp"
#include "colorsched/coloring.hpp"
#include "colorsched/errors.hpp"
#include "colorsched/program.hpp"

namespace colorsched {

// Cache set a (page, line) access lands in: pages of equal color share cache
// pages, so two accesses conflict iff same color and same line index.
struct set_ref {
  int color = 0;
  int line = 0;
  friend auto operator<=>(const set_ref&, const set_ref&) = default;
};

inline set_ref set_of(int page, int line, const coloring& col,
                      const cache_config& cache) {
  require(page >= 0 && page < col.pages(), errc::bad_coloring,
          "page " + std::to_string(page) + " not covered by the coloring");
  require(line >= 0 && line < cache.lines_per_page, errc::line_out_of_range,
          "line " + std::to_string(line) + " outside the page");
  return set_ref{col[page], line};
}

// AH: hit every time once guaranteed resident. FM: at most one miss per entry
// of the attributed loop scope. NC: a miss is charged on every execution.
enum class access_class : std::uint8_t { always_hit, first_miss, not_classified };

struct line_class {
  access_class cls = access_class::not_classified;
  int scope = -1;  // loop index (program declaration order) for first_miss

  friend bool operator==(const line_class&, const line_class&) = default;
};

inline const char* access_class_name(access_class c) {
  switch (c) {
    case access_class::always_hit: return "AH";
    case access_class::first_miss: return "FM";
    case access_class::not_classified: return "NC";
  }
  return "?";
}

// Per-block, per-line classification. Lines are addressed by their offset
// within the block's [first_line, last_line] range.
class classification {
 public:
  explicit classification(const program_index& idx) {
    rows_.resize(static_cast<std::size_t>(idx.n_blocks()));
    for (int b = 0; b < idx.n_blocks(); ++b) {
      const auto& bb = idx.block(b);
      rows_[static_cast<std::size_t>(b)].resize(
          static_cast<std::size_t>(bb.last_line - bb.first_line + 1));
    }
  }

  line_class& at(int block, int line_offset) {
    return rows_[static_cast<std::size_t>(block)]
                [static_cast<std::size_t>(line_offset)];
  }
  const line_class& at(int block, int line_offset) const {
    return rows_[static_cast<std::size_t>(block)]
                [static_cast<std::size_t>(line_offset)];
  }

  // Class of the access block `b` makes to absolute line `line` of its page.
  const line_class& of_line(const program_index& idx, int b, int line) const {
    return at(b, line - idx.block(b).first_line);
  }

 private:
  std::vector<std::vector<line_class>> rows_;
};

namespace detail {

// Must-cache abstraction: per set, the lines guaranteed resident together
// with an upper bound on their LRU age. Absent set entries mean "nothing
// guaranteed". Page index doubles as line identity inside a set, because a
// set already fixes the line offset.
struct must_state {
  // set -> (page, age bound) pairs sorted by page; at most `ways` per set.
  std::map<std::pair<int, int>, std::vector<std::pair<int, int>>> sets;

  friend bool operator==(const must_state&, const must_state&) = default;
};

inline void must_access(must_state& st, std::pair<int, int> set, int page,
                        int ways) {
  auto& v = st.sets[set];
  auto hit = std::find_if(v.begin(), v.end(),
                          [&](const auto& e) { return e.first == page; });
  if (hit != v.end()) {
    const int old_age = hit->second;
    for (auto& [q, age] : v) {
      if (q == page)
        age = 0;
      else if (age < old_age)
        ++age;
    }
  } else {
    for (auto& [q, age] : v) {
      (void)q;
      ++age;
    }
    std::erase_if(v, [&](const auto& e) { return e.second >= ways; });
    v.emplace_back(page, 0);
    std::sort(v.begin(), v.end());
  }
}

// Must-join: keep lines resident on both sides, at the worse (older) age.
inline must_state must_join(const must_state& a, const must_state& b) {
  must_state out;
  for (const auto& [set, va] : a.sets) {
    auto it = b.sets.find(set);
    if (it == b.sets.end()) continue;
    std::vector<std::pair<int, int>> merged;
    for (const auto& [page, age_a] : va) {
      auto match = std::find_if(it->second.begin(), it->second.end(),
                                [&](const auto& e) { return e.first == page; });
      if (match == it->second.end()) continue;
      merged.emplace_back(page, std::max(age_a, match->second));
    }
    if (!merged.empty()) out.sets.emplace(set, std::move(merged));
  }
  return out;
}

}  // namespace detail

// Classify every (block, line) access of the program under the given page
// coloring. Must analysis proves always-hits; a line that cannot be proven
// resident may still be persistent in its innermost enclosing loop (at most
// one miss per loop entry) provided that loop cannot touch more distinct
// conflicting lines than the set holds — with at most `ways` distinct lines
// in play, LRU never evicts any of them. Otherwise eviction is possible and
// the access stays not-classified.
inline classification classify(const program_index& idx, const coloring& col,
                               const cache_config& cache) {
  validate(cache);
  const task_program& prog = idx.program();
  require(col.pages() == prog.page_count, errc::bad_coloring,
          "coloring covers " + std::to_string(col.pages()) +
              " pages, program has " + std::to_string(prog.page_count));
  for (int p = 0; p < col.pages(); ++p)
    require(col[p] >= 0, errc::bad_coloring,
            "page " + std::to_string(p) + " has negative color");
  validate_lines(prog, cache);

  // Fixed point of the must analysis. nullopt = not yet reached (top),
  // the identity of the join.
  const int n = idx.n_blocks();
  std::vector<std::optional<detail::must_state>> in(n), out(n);
  std::vector<std::vector<int>> rpo_succ(static_cast<std::size_t>(n));
  for (int b = 0; b < n; ++b) rpo_succ[static_cast<std::size_t>(b)] = idx.successors(b);
  const std::vector<int> order = detail::reverse_postorder(idx.entry(), rpo_succ);

  auto transfer = [&](const detail::must_state& s, int b) {
    detail::must_state t = s;
    const auto& bb = idx.block(b);
    for (int line = bb.first_line; line <= bb.last_line; ++line)
      detail::must_access(t, {col[bb.page], line}, bb.page, cache.ways);
    return t;
  };

  bool changed = true;
  while (changed) {
    changed = false;
    for (int b : order) {
      std::optional<detail::must_state> next_in;
      if (b == idx.entry()) {
        next_in = detail::must_state{};  // cold cache on arrival
      } else {
        for (int p : idx.predecessors(b)) {
          if (!out[p]) continue;
          next_in = next_in ? detail::must_join(*next_in, *out[p]) : *out[p];
        }
      }
      if (!next_in) continue;  // no predecessor state yet
      if (in[b] != next_in) {
        in[b] = std::move(next_in);
        out[b] = transfer(*in[b], b);
        changed = true;
      }
    }
  }

  // Distinct conflicting lines each loop can touch per set: the persistence
  // footprint. A set holds `ways` lines, so a scope whose footprint fits
  // cannot evict anything it loaded.
  const auto& loops = idx.loops();
  std::vector<std::map<std::pair<int, int>, std::set<int>>> footprint(
      loops.size());
  for (std::size_t l = 0; l < loops.size(); ++l)
    for (int b : loops[l].members) {
      const auto& bb = idx.block(b);
      for (int line = bb.first_line; line <= bb.last_line; ++line)
        footprint[l][{col[bb.page], line}].insert(bb.page);
    }

  classification cls(idx);
  for (int b = 0; b < n; ++b) {
    const auto& bb = idx.block(b);
    for (int line = bb.first_line; line <= bb.last_line; ++line) {
      line_class& lc = cls.at(b, line - bb.first_line);
      const std::pair<int, int> set{col[bb.page], line};
      const auto set_it = in[b]->sets.find(set);
      const bool resident =
          set_it != in[b]->sets.end() &&
          std::any_of(set_it->second.begin(), set_it->second.end(),
                      [&](const auto& e) { return e.first == bb.page; });
      if (resident) {
        lc = {access_class::always_hit, -1};
        continue;
      }
      // Persistence in the innermost enclosing scope.
      int scope = -1;
      if (const int l = idx.innermost_loop(b); l >= 0) {
        const auto fp = footprint[static_cast<std::size_t>(l)].find(set);
        const int width =
            fp == footprint[static_cast<std::size_t>(l)].end()
                ? 0
                : static_cast<int>(fp->second.size());
        if (width <= cache.ways) scope = l;
      }
      lc = scope >= 0 ? line_class{access_class::first_miss, scope}
                      : line_class{access_class::not_classified, -1};
    }
  }
  return cls;
}

inline classification classify(const task_program& prog, const coloring& col,
                               const cache_config& cache) {
  program_index idx(prog);
  return classify(idx, col, cache);
}

}  // namespace colorsched
