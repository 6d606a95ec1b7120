#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "colorsched/errors.hpp"
#include "colorsched/program.hpp"
#include "colorsched/rng.hpp"

namespace colorsched {

namespace detail {

// Small assembler for generated CFGs: blocks named b0, b1, ... in creation
// order, with do-while loops (latch back edge, exit from the latch).
struct program_builder {
  task_program prog;
  int next = 0;

  explicit program_builder(std::string task_id, int pages) {
    prog.task_id = std::move(task_id);
    prog.page_count = pages;
  }

  std::string add_block(int page, int first_line, int last_line,
                        std::int64_t instr) {
    basic_block bb;
    bb.id = "b" + std::to_string(next++);
    bb.page = page;
    bb.first_line = first_line;
    bb.last_line = last_line;
    bb.instr_count = instr;
    prog.blocks.push_back(bb);
    return prog.blocks.back().id;
  }

  void edge(const std::string& from, const std::string& to) {
    prog.edges.emplace_back(from, to);
  }

  // Close a do-while loop: latch -> header back edge plus the declaration.
  void close_loop(const std::string& header, const std::string& latch,
                  std::int64_t bound) {
    edge(latch, header);
    prog.loops.push_back({header, bound, {{latch, header}}});
  }

  task_program finish(const std::string& entry, const std::string& exit) {
    prog.entry = entry;
    prog.exit = exit;
    validate(prog);
    return prog;
  }
};

}  // namespace detail

enum class program_shape { straight_line, single_loop, two_nested_loops, mixed };

// Deterministic program of the requested shape covering exactly `pages`
// pages. Block sizes vary with the seed; the structure does not.
inline task_program synthetic_program(int pages, program_shape shape,
                                      std::uint64_t seed) {
  require(pages >= 1, errc::bad_page_count, "pages must be >= 1");
  rng gen(derive_seed(seed, static_cast<std::uint64_t>(shape)));
  detail::program_builder b("synthetic", pages);
  auto instr = [&] { return 5 + static_cast<std::int64_t>(gen.below(20)); };
  auto page_at = [&](int k) { return k % pages; };

  switch (shape) {
    case program_shape::straight_line: {
      const int count = pages < 3 ? 3 : pages;
      std::vector<std::string> chain;
      for (int k = 0; k < count; ++k)
        chain.push_back(b.add_block(page_at(k), 0, 1, instr()));
      for (int k = 1; k < count; ++k) b.edge(chain[k - 1], chain[k]);
      return b.finish(chain.front(), chain.back());
    }
    case program_shape::single_loop: {
      const auto head = b.add_block(page_at(0), 0, 1, instr());
      std::vector<std::string> body;
      const int body_len = pages < 2 ? 2 : pages;
      for (int k = 0; k < body_len; ++k)
        body.push_back(b.add_block(page_at(k), 2, 4, instr()));
      const auto tail = b.add_block(page_at(pages - 1), 5, 5, instr());
      b.edge(head, body.front());
      for (std::size_t k = 1; k < body.size(); ++k)
        b.edge(body[k - 1], body[k]);
      b.close_loop(body.front(), body.back(),
                   2 + static_cast<std::int64_t>(gen.below(5)));
      b.edge(body.back(), tail);
      return b.finish(head, tail);
    }
    case program_shape::two_nested_loops: {
      const auto head = b.add_block(page_at(0), 0, 0, instr());
      const auto outer = b.add_block(page_at(1 % pages), 1, 2, instr());
      std::vector<std::string> inner;
      const int inner_len = pages < 2 ? 2 : pages;
      for (int k = 0; k < inner_len; ++k)
        inner.push_back(b.add_block(page_at(k), 3, 5, instr()));
      const auto latch = b.add_block(page_at(1 % pages), 6, 6, instr());
      const auto tail = b.add_block(page_at(pages - 1), 7, 7, instr());
      b.edge(head, outer);
      b.edge(outer, inner.front());
      for (std::size_t k = 1; k < inner.size(); ++k)
        b.edge(inner[k - 1], inner[k]);
      b.close_loop(inner.front(), inner.back(),
                   2 + static_cast<std::int64_t>(gen.below(4)));
      b.edge(inner.back(), latch);
      b.close_loop(outer, latch, 2 + static_cast<std::int64_t>(gen.below(4)));
      b.edge(latch, tail);
      return b.finish(head, tail);
    }
    case program_shape::mixed: {
      const auto head = b.add_block(page_at(0), 0, 1, instr());
      const auto fork = b.add_block(page_at(1 % pages), 2, 2, instr());
      const auto left = b.add_block(page_at(2 % pages), 3, 4, instr());
      const auto right = b.add_block(page_at(3 % pages), 3, 4, instr());
      const auto join = b.add_block(page_at(0), 5, 5, instr());
      std::vector<std::string> body;
      const int body_len = pages < 2 ? 2 : pages;
      for (int k = 0; k < body_len; ++k)
        body.push_back(b.add_block(page_at(k), 6, 8, instr()));
      const auto tail = b.add_block(page_at(pages - 1), 9, 9, instr());
      b.edge(head, fork);
      b.edge(fork, left);
      b.edge(fork, right);
      b.edge(left, join);
      b.edge(right, join);
      b.edge(join, body.front());
      for (std::size_t k = 1; k < body.size(); ++k)
        b.edge(body[k - 1], body[k]);
      b.close_loop(body.front(), body.back(),
                   2 + static_cast<std::int64_t>(gen.below(5)));
      b.edge(body.back(), tail);
      return b.finish(head, tail);
    }
  }
  fail(errc::bad_config, "unknown shape");
}

// Random reducible CFG for oracle-versus-analysis testing: bounded blocks,
// bounded loop nesting/bounds, branches, optional loop early exits. The page
// cursor walks 0..pages-1 first so the page count is exact by construction.
struct random_program_params {
  int pages = 4;            // upper bound; actual count drawn in [1, pages]
  int max_blocks = 12;
  int max_bound = 4;
  int lines_per_page = 16;
};

inline task_program random_program(std::uint64_t seed,
                                   const random_program_params& params = {}) {
  rng gen(seed);
  const int pages =
      1 + static_cast<int>(gen.below(static_cast<std::uint64_t>(params.pages)));
  // Reserve room so every page gets at least one block.
  const int budget_max = params.max_blocks;
  require(budget_max >= pages + 2, errc::bad_config,
          "max_blocks too small for the page count");

  detail::program_builder b("random", pages);
  int page_cursor = 0;
  auto next_page = [&] {
    const int p = page_cursor < pages
                      ? page_cursor
                      : static_cast<int>(gen.below(static_cast<std::uint64_t>(pages)));
    ++page_cursor;
    return p;
  };
  auto make_block = [&] {
    const int first =
        static_cast<int>(gen.below(static_cast<std::uint64_t>(params.lines_per_page - 2)));
    const int len = static_cast<int>(gen.below(3));
    return b.add_block(next_page(), first, first + len,
                       1 + static_cast<std::int64_t>(gen.below(9)));
  };

  // Leave headroom: loop arms may overshoot by a couple of blocks and the
  // page-coverage padding below may add up to `pages` more.
  const int room = budget_max - pages - 6;
  int budget = 3 + static_cast<int>(gen.below(
                       static_cast<std::uint64_t>(room < 1 ? 1 : room)));

  // Emit a structured sequence; returns (first, last) of the emitted piece.
  auto gen_seq = [&](auto&& self, int depth) -> std::pair<std::string, std::string> {
    std::string first = make_block();
    --budget;
    std::string last = first;
    while (budget > 0) {
      const std::uint64_t kind = gen.below(100);
      if (kind < 45 || budget < 4) {  // plain block
        const auto blk = make_block();
        --budget;
        b.edge(last, blk);
        last = blk;
      } else if (kind < 70 && depth < 2) {  // loop
        budget -= 2;
        const auto [h, l] = self(self, depth + 1);
        const std::int64_t bound =
            1 + static_cast<std::int64_t>(
                    gen.below(static_cast<std::uint64_t>(params.max_bound)));
        b.edge(last, h);
        b.close_loop(h, l, bound);
        const auto after = make_block();
        --budget;
        b.edge(l, after);
        if (gen.below(100) < 40 && h != l) b.edge(h, after);  // early exit
        last = after;
      } else {  // diamond
        const auto fork = last;
        const auto a = make_block();
        --budget;
        const auto c = make_block();
        --budget;
        const auto join = make_block();
        --budget;
        b.edge(fork, a);
        b.edge(fork, c);
        b.edge(a, join);
        b.edge(c, join);
        last = join;
      }
      if (gen.below(100) < 30) break;  // keep pieces short
    }
    return {first, last};
  };

  // Top-level sequence; extend with plain blocks until every page is used.
  auto [first, last] = gen_seq(gen_seq, 0);
  while (page_cursor < pages) {
    const auto blk = make_block();
    b.edge(last, blk);
    last = blk;
  }
  return b.finish(first, last);
}

namespace detail {

// One deterministic sweep workload. The structure is a chain of loops over
// page windows: a wide loop touching every page (only spread-out colorings
// keep its per-set footprint within associativity), a half-window loop on
// larger programs (satisfied one color earlier), and a two-page loop that no
// coloring can thrash in a 2-way cache. The result is a WCET that falls in
// steps as the color grant grows.
inline task_program sweep_program(const std::string& id, int pages,
                                  std::uint64_t variant) {
  rng gen(derive_seed(0x5eedULL, variant));
  program_builder b(id, pages);
  auto instr = [&](int base, int spread) {
    return base + static_cast<std::int64_t>(gen.below(
                      static_cast<std::uint64_t>(spread)));
  };

  // Entry + one warm-up block per page (cold misses only).
  const auto entry = b.add_block(0, 12, 12, instr(8, 6));
  std::string last = entry;
  for (int p = 1; p < pages; ++p) {
    const auto blk = b.add_block(p, 12, 13, instr(12, 8));
    b.edge(last, blk);
    last = blk;
  }

  // Wide loop: one block per page, lines 0..2 — the main thrash driver.
  if (pages >= 3) {
    std::vector<std::string> body;
    for (int p = 0; p < pages; ++p)
      body.push_back(b.add_block(p, 0, 2, instr(16, 10)));
    b.edge(last, body.front());
    for (std::size_t k = 1; k < body.size(); ++k) b.edge(body[k - 1], body[k]);
    b.close_loop(body.front(), body.back(),
                 9 + static_cast<std::int64_t>(gen.below(4)));
    last = body.back();
  }

  // Half-window loop on 8-page programs: pages 0..3, separate line region.
  if (pages >= 6) {
    std::vector<std::string> body;
    for (int p = 0; p < 4; ++p)
      body.push_back(b.add_block(p, 4, 6, instr(14, 8)));
    b.edge(last, body.front());
    for (std::size_t k = 1; k < body.size(); ++k) b.edge(body[k - 1], body[k]);
    b.close_loop(body.front(), body.back(),
                 7 + static_cast<std::int64_t>(gen.below(4)));
    last = body.back();
  }

  // Narrow loop over the last two pages: safe under any coloring, adds base
  // load that dilutes the thrash share of the WCET.
  {
    std::vector<std::string> body;
    const int lo = pages >= 2 ? pages - 2 : 0;
    for (int p = lo; p < pages; ++p)
      body.push_back(b.add_block(p, 8, 10, instr(18, 10)));
    if (body.size() == 1) body.push_back(b.add_block(pages - 1, 8, 10, instr(18, 10)));
    b.edge(last, body.front());
    for (std::size_t k = 1; k < body.size(); ++k) b.edge(body[k - 1], body[k]);
    b.close_loop(body.front(), body.back(),
                 8 + static_cast<std::int64_t>(gen.below(5)));
    last = body.back();
  }

  const auto tail = b.add_block(pages - 1, 14, 14, instr(8, 6));
  b.edge(last, tail);
  return b.finish(entry, tail);
}

}  // namespace detail

// The eight default sweep workloads (page counts 4,2,4,3,4,2,8,8).
inline std::vector<task_program> default_sweep_programs() {
  const int page_counts[] = {4, 2, 4, 3, 4, 2, 8, 8};
  std::vector<task_program> programs;
  for (std::size_t i = 0; i < 8; ++i)
    programs.push_back(detail::sweep_program("t" + std::to_string(i + 1),
                                             page_counts[i], i));
  return programs;
}

}  // namespace colorsched
