#pragma once

#include <string>

#include "colorsched/errors.hpp"

namespace colorsched {

// Geometry of a set-associative instruction cache described at page
// granularity: `cache_pages` distinct pages fit at once, grouped into
// cache_pages / ways colors. A memory page's color decides which cache pages
// it may occupy, so two pages conflict iff they share a color.
struct cache_config {
  int ways = 2;            // associativity
  int cache_pages = 32;    // distinct pages resident at once
  int lines_per_page = 16; // cache lines per page
  int miss_penalty = 10;   // cycles added per line miss

  friend bool operator==(const cache_config&, const cache_config&) = default;
};

inline void validate(const cache_config& c) {
  require(c.ways >= 1, errc::bad_config, "ways must be >= 1");
  require(c.cache_pages >= 1, errc::bad_config, "cache_pages must be >= 1");
  require(c.cache_pages % c.ways == 0, errc::bad_config,
          "cache_pages (" + std::to_string(c.cache_pages) +
              ") must be divisible by ways (" + std::to_string(c.ways) + ")");
  require(c.lines_per_page >= 1, errc::bad_config,
          "lines_per_page must be >= 1");
  require(c.miss_penalty >= 0, errc::bad_config,
          "miss_penalty must be >= 0");
}

// Number of page colors the cache offers.
inline int num_colors(const cache_config& c) {
  validate(c);
  return c.cache_pages / c.ways;
}

// Color a physical cache page index maps to.
inline int page_color(int cache_page_index, const cache_config& c) {
  const int k = num_colors(c);
  require(cache_page_index >= 0, errc::bad_config,
          "cache page index must be >= 0");
  return cache_page_index % k;
}

// Largest color share worth granting a task with `task_pages` pages when
// `n_tasks` tasks partition the cache: every other task needs at least one
// page of its own, and more colors than pages cannot help.
inline int s_max(int task_pages, const cache_config& c, int n_tasks) {
  validate(c);
  require(task_pages >= 1, errc::bad_config, "task_pages must be >= 1");
  require(n_tasks >= 1, errc::bad_config, "n_tasks must be >= 1");
  const int reserve = c.cache_pages - (n_tasks - 1);
  require(reserve >= 1, errc::bad_budget,
          "cache holds " + std::to_string(c.cache_pages) + " pages, too few for " +
              std::to_string(n_tasks) + " tasks");
  const int s = task_pages < reserve ? task_pages : reserve;
  return s < 1 ? 1 : s;
}

}  // namespace colorsched
