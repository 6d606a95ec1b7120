#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "colorsched/errors.hpp"

namespace colorsched {

// Assignment of each program page (index 0..P-1) to one color. Colors are
// task-local indices 0..budget-1; which physical cache colors they stand for
// is decided later by the allocator. Two pages interfere in the cache iff
// they carry the same color.
struct coloring {
  std::vector<int> color_of_page;

  coloring() = default;
  explicit coloring(std::vector<int> colors) : color_of_page(std::move(colors)) {}

  int pages() const { return static_cast<int>(color_of_page.size()); }
  int operator[](int page) const { return color_of_page[page]; }

  // Number of distinct colors actually used.
  int colors_used() const {
    std::vector<int> seen(color_of_page);
    std::sort(seen.begin(), seen.end());
    seen.erase(std::unique(seen.begin(), seen.end()), seen.end());
    return static_cast<int>(seen.size());
  }

  friend bool operator==(const coloring&, const coloring&) = default;
};

// A coloring fits a program with `pages` pages under color budget `budget`
// when it maps exactly those pages onto colors 0..budget-1. Using fewer than
// budget colors is legitimate (a grant is an upper bound, not a quota).
inline void validate(const coloring& c, int pages, int budget) {
  require(budget >= 1, errc::bad_budget, "color budget must be >= 1");
  require(c.pages() == pages, errc::bad_coloring,
          "coloring covers " + std::to_string(c.pages()) + " pages, program has " +
              std::to_string(pages));
  for (int p = 0; p < c.pages(); ++p) {
    require(c[p] >= 0 && c[p] < budget, errc::bad_coloring,
            "page " + std::to_string(p) + " mapped to color " +
                std::to_string(c[p]) + ", budget is " + std::to_string(budget));
  }
}

}  // namespace colorsched
