#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "colorsched/coloring.hpp"
#include "colorsched/errors.hpp"
#include "colorsched/program.hpp"
#include "colorsched/rng.hpp"

namespace colorsched {

// Static access weight of one page: instructions counted with weight
// 10^nesting_level, so loop bodies dominate straight-line code.
struct page_score {
  int page = 0;
  std::uint64_t score = 0;

  friend bool operator==(const page_score&, const page_score&) = default;
};

inline std::uint64_t pow10_weight(int nesting_level) {
  require(nesting_level >= 0 && nesting_level <= 18, errc::bad_config,
          "nesting level " + std::to_string(nesting_level) +
              " out of supported range");
  std::uint64_t w = 1;
  for (int i = 0; i < nesting_level; ++i) w *= 10;
  return w;
}

inline std::vector<page_score> page_scores(const program_index& idx) {
  std::vector<page_score> scores(
      static_cast<std::size_t>(idx.program().page_count));
  for (int p = 0; p < idx.program().page_count; ++p)
    scores[static_cast<std::size_t>(p)].page = p;
  for (int b = 0; b < idx.n_blocks(); ++b) {
    const auto& bb = idx.block(b);
    scores[static_cast<std::size_t>(bb.page)].score +=
        static_cast<std::uint64_t>(bb.instr_count) *
        pow10_weight(idx.nesting_level(b));
  }
  return scores;
}

inline std::vector<page_score> page_scores(const task_program& prog) {
  program_index idx(prog);
  return page_scores(idx);
}

inline void check_budget(int pages, int budget) {
  require(pages >= 1, errc::bad_budget, "page count must be >= 1");
  require(budget >= 1 && budget <= pages, errc::bad_budget,
          "color budget " + std::to_string(budget) +
              " outside [1, " + std::to_string(pages) + "]");
}

// Spread pages evenly: consecutive groups of ⌊P/j⌋ pages share a color, and
// leftover groups wrap around modulo j.
inline coloring fair_coloring(int pages, int budget) {
  check_budget(pages, budget);
  const int group = pages / budget;
  std::vector<int> colors(static_cast<std::size_t>(pages));
  for (int p = 0; p < pages; ++p)
    colors[static_cast<std::size_t>(p)] = (p / group) % budget;
  return coloring(std::move(colors));
}

// Isolate the hottest pages: the budget-1 highest-scored pages each get a
// private color, everything else piles into the last one. Ties broken by
// ascending page index so the result is deterministic.
inline coloring federated_coloring(std::vector<page_score> scores, int budget) {
  const int pages = static_cast<int>(scores.size());
  check_budget(pages, budget);
  std::vector<char> seen(static_cast<std::size_t>(pages), 0);
  for (const auto& s : scores) {
    require(s.page >= 0 && s.page < pages, errc::bad_coloring,
            "score entry for page " + std::to_string(s.page) +
                " outside [0, " + std::to_string(pages) + ")");
    require(!seen[static_cast<std::size_t>(s.page)], errc::bad_coloring,
            "duplicate score entry for page " + std::to_string(s.page));
    seen[static_cast<std::size_t>(s.page)] = 1;
  }
  std::sort(scores.begin(), scores.end(), [](const auto& a, const auto& b) {
    return a.score != b.score ? a.score > b.score : a.page < b.page;
  });
  std::vector<int> colors(static_cast<std::size_t>(pages), budget - 1);
  for (int rank = 0; rank < budget - 1; ++rank)
    colors[static_cast<std::size_t>(scores[static_cast<std::size_t>(rank)].page)] =
        rank;
  return coloring(std::move(colors));
}

// Baseline: each page uniform over the budget, independently.
inline coloring random_coloring(int pages, int budget, std::uint64_t seed) {
  check_budget(pages, budget);
  rng gen(seed);
  std::vector<int> colors(static_cast<std::size_t>(pages));
  for (int p = 0; p < pages; ++p)
    colors[static_cast<std::size_t>(p)] =
        static_cast<int>(gen.below(static_cast<std::uint64_t>(budget)));
  return coloring(std::move(colors));
}

enum class heuristic { fair, federated, random };

inline const char* heuristic_name(heuristic h) {
  switch (h) {
    case heuristic::fair: return "fair";
    case heuristic::federated: return "federated";
    case heuristic::random: return "random";
  }
  return "?";
}

inline heuristic parse_heuristic(const std::string& name) {
  if (name == "fair") return heuristic::fair;
  if (name == "federated") return heuristic::federated;
  if (name == "random") return heuristic::random;
  fail(errc::bad_config, "unknown heuristic '" + name +
                             "' (expected fair, federated or random)");
}

// Uniform entry point used by the table builder: one coloring of `budget`
// colors for the program under heuristic h. The seed only matters for
// `random`; per-budget colorings get decorrelated streams derived from it.
inline coloring make_coloring(heuristic h, const program_index& idx,
                              int budget, std::uint64_t seed) {
  switch (h) {
    case heuristic::fair:
      return fair_coloring(idx.program().page_count, budget);
    case heuristic::federated:
      return federated_coloring(page_scores(idx), budget);
    case heuristic::random:
      return random_coloring(idx.program().page_count, budget,
                             derive_seed(seed, static_cast<std::uint64_t>(budget)));
  }
  fail(errc::bad_config, "unknown heuristic");
}

}  // namespace colorsched
