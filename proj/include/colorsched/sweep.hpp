#pragma once

#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "colorsched/allocator.hpp"
#include "colorsched/cache_config.hpp"
#include "colorsched/errors.hpp"
#include "colorsched/heuristics.hpp"
#include "colorsched/program.hpp"
#include "colorsched/rng.hpp"
#include "colorsched/schedulability.hpp"
#include "colorsched/synthetic.hpp"
#include "colorsched/task.hpp"
#include "colorsched/wcet.hpp"

namespace colorsched {

enum class deadline_mode { implicit, constrained };

inline const char* deadline_mode_name(deadline_mode m) {
  return m == deadline_mode::implicit ? "implicit" : "constrained";
}

inline deadline_mode parse_deadline_mode(const std::string& name) {
  if (name == "implicit") return deadline_mode::implicit;
  if (name == "constrained") return deadline_mode::constrained;
  fail(errc::bad_config, "unknown deadline mode: " + name);
}

struct u_grid_spec {
  double min = 0.30;
  double max = 1.70;
  double step = 0.01;

  int points() const {
    require(step > 0 && max >= min, errc::bad_config, "bad utilization grid");
    return static_cast<int>(std::floor((max - min) / step + 1e-9)) + 1;
  }
  double at(int k) const { return min + k * step; }
};

struct sweep_config {
  std::vector<task_program> programs;  // empty -> default_sweep_programs()
  cache_config cache;
  u_grid_spec u_grid;
  int samples_per_point = 1000;
  deadline_mode deadlines = deadline_mode::implicit;
  std::uint64_t master_seed = 1;
};

enum class sweep_method {
  ilp_fair,
  ilp_federated,
  ilp_random,
  random_alloc,
  infinite_cache
};

inline constexpr int sweep_method_count = 5;

inline const char* sweep_method_name(sweep_method m) {
  switch (m) {
    case sweep_method::ilp_fair: return "ilp_fair";
    case sweep_method::ilp_federated: return "ilp_federated";
    case sweep_method::ilp_random: return "ilp_random";
    case sweep_method::random_alloc: return "random_alloc";
    case sweep_method::infinite_cache: return "infinite_cache";
  }
  return "?";
}

struct sweep_row {
  double utilization = 0;
  std::string method;
  double schedulable_pct = 0;
  std::optional<double> avg_colors_used;  // absent for infinite_cache or
                                          // when no sample was feasible
};

// Classic UUniFast: peel one share per step with a uniform power draw.
// Degenerate draws (a zero share, possible only at the very edge of the
// generator's range) are redrawn.
inline std::vector<double> uunifast(int n, double total_u, rng& gen) {
  require(n >= 1, errc::bad_config, "need at least one task");
  require(total_u > 0, errc::bad_config, "total utilization must be positive");
  for (int attempt = 0; attempt < 100; ++attempt) {
    std::vector<double> shares(static_cast<std::size_t>(n));
    double sum = total_u;
    bool ok = true;
    for (int i = 1; i < n; ++i) {
      const double next = sum * std::pow(gen.unit(), 1.0 / (n - i));
      shares[static_cast<std::size_t>(i - 1)] = sum - next;
      if (shares[static_cast<std::size_t>(i - 1)] <= 0.0) ok = false;
      sum = next;
    }
    shares[static_cast<std::size_t>(n - 1)] = sum;
    if (sum <= 0.0) ok = false;
    if (ok) return shares;
  }
  fail(errc::bad_config, "utilization draw degenerated repeatedly");
}

inline std::vector<double> uunifast(int n, double total_u, std::uint64_t seed) {
  rng gen(seed);
  return uunifast(n, total_u, gen);
}

// Build one sporadic task per program from drawn utilization shares. The
// task's WCET is its worst table value (fewest colors); the period follows
// from the share; constrained mode squeezes the deadline into the top
// quarter of the [C, T] range.
inline task_set synthesize_taskset(const std::vector<std::string>& ids,
                                   const std::vector<std::int64_t>& worst_wcets,
                                   const std::vector<int>& page_counts,
                                   const std::vector<double>& utilizations,
                                   deadline_mode mode, rng& gen) {
  require(ids.size() == utilizations.size() &&
              worst_wcets.size() == utilizations.size() &&
              page_counts.size() == utilizations.size(),
          errc::bad_config, "mismatched synthesis inputs");
  constexpr std::int64_t period_cap = 1'000'000'000'000'000LL;
  task_set tasks;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    sporadic_task t;
    t.id = ids[i];
    t.wcet = worst_wcets[i];
    t.pages = page_counts[i];
    const double raw = std::ceil(static_cast<double>(t.wcet) / utilizations[i]);
    std::int64_t period =
        raw >= static_cast<double>(period_cap) ? period_cap
                                               : static_cast<std::int64_t>(raw);
    if (period < t.wcet) period = t.wcet;  // shares above 1 saturate at U_i = 1
    t.period = period;
    if (mode == deadline_mode::implicit) {
      t.deadline = period;
    } else {
      const std::int64_t slack = period - t.wcet;
      const std::int64_t lo = t.wcet + (3 * slack + 3) / 4;  // ceil(0.75*slack)
      t.deadline = gen.between(lo, period);
    }
    tasks.push_back(std::move(t));
  }
  validate(tasks);
  return tasks;
}

// Convenience overload that derives the ingredients from analyzed programs.
inline task_set synthesize_taskset(const std::vector<task_program>& programs,
                                   const std::vector<double>& utilizations,
                                   deadline_mode mode, const cache_config& cache,
                                   std::uint64_t seed) {
  require(programs.size() == utilizations.size(), errc::bad_config,
          "one utilization share per program");
  std::vector<std::string> ids;
  std::vector<std::int64_t> worst;
  std::vector<int> pages;
  for (const auto& p : programs) {
    program_index idx(p);
    ids.push_back(p.task_id);
    worst.push_back(
        wcet(idx, fair_coloring(p.page_count, 1), cache));
    pages.push_back(p.page_count);
  }
  rng gen(seed);
  return synthesize_taskset(ids, worst, pages, utilizations, mode, gen);
}

namespace detail {

struct sample_outcome {
  bool feasible = false;
  int total_colors = 0;
};

// Everything precomputed once per sweep: indexes, tables, infinite-cache
// WCETs. Shared read-only across worker threads.
struct sweep_inputs {
  std::vector<std::string> ids;
  std::vector<int> pages;
  std::vector<std::int64_t> worst_wcet;      // C_i(1), table-independent
  std::vector<std::int64_t> infinite_wcet;   // every line always hits
  std::vector<wcet_table> fair_tables;
  std::vector<wcet_table> federated_tables;
  std::vector<wcet_table> random_tables;
};

inline sweep_inputs prepare_sweep(const std::vector<task_program>& programs,
                                  const cache_config& cache,
                                  std::uint64_t master_seed) {
  sweep_inputs in;
  const int n = static_cast<int>(programs.size());
  for (int i = 0; i < n; ++i) {
    const auto& prog = programs[static_cast<std::size_t>(i)];
    program_index idx(prog);
    validate_lines(prog, cache);
    in.ids.push_back(prog.task_id);
    in.pages.push_back(prog.page_count);
    in.infinite_wcet.push_back(infinite_cache_wcet(idx, cache));
    in.fair_tables.push_back(
        build_wcet_table(idx, heuristic::fair, 0, cache, n));
    in.federated_tables.push_back(
        build_wcet_table(idx, heuristic::federated, 0, cache, n));
    in.random_tables.push_back(build_wcet_table(
        idx, heuristic::random,
        derive_seed(master_seed, 0x7ab1e5ULL, static_cast<std::uint64_t>(i)),
        cache, n));
    in.worst_wcet.push_back(in.fair_tables.back().at(1));
  }
  return in;
}

inline void evaluate_sample(const sweep_inputs& in, const cache_config& cache,
                            deadline_mode mode, std::uint64_t sample_seed,
                            double total_u,
                            std::array<sample_outcome, sweep_method_count>& out) {
  rng gen(sample_seed);
  const int n = static_cast<int>(in.ids.size());
  const auto shares = uunifast(n, total_u, gen);
  const auto base =
      synthesize_taskset(in.ids, in.worst_wcet, in.pages, shares, mode, gen);

  const std::vector<wcet_table>* table_sets[3] = {
      &in.fair_tables, &in.federated_tables, &in.random_tables};
  for (int m = 0; m < 3; ++m) {
    const auto problem = make_problem(*table_sets[m], base, cache);
    const auto alloc = solve(problem);
    out[static_cast<std::size_t>(m)] = {alloc.feasible, alloc.total_colors};
  }

  {
    const auto problem = make_problem(in.random_tables, base, cache);
    const auto alloc =
        random_allocation(problem, derive_seed(sample_seed, 0xDA7ALL));
    out[3] = {alloc.feasible, alloc.total_colors};
  }

  {
    task_set ideal = base;
    for (int i = 0; i < n; ++i)
      ideal[static_cast<std::size_t>(i)].wcet =
          in.infinite_wcet[static_cast<std::size_t>(i)];
    const auto rep = edf_feasible(ideal);
    out[4] = {rep.verdict == feasibility::feasible, 0};
  }
}

}  // namespace detail

// Run the whole utilization sweep. Work items are (grid point, sample)
// pairs with seeds derived from (master_seed, point index, sample index)
// only, so the output is a pure function of the config regardless of how
// many worker threads process the items.
inline std::vector<sweep_row> run_sweep(const sweep_config& cfg, int jobs = 1) {
  validate(cfg.cache);
  require(cfg.samples_per_point >= 1, errc::bad_config,
          "samples_per_point must be >= 1");
  const auto programs =
      cfg.programs.empty() ? default_sweep_programs() : cfg.programs;
  require(!programs.empty(), errc::bad_config, "no programs to sweep");

  const auto inputs =
      detail::prepare_sweep(programs, cfg.cache, cfg.master_seed);
  const int points = cfg.u_grid.points();
  const int samples = cfg.samples_per_point;
  const std::size_t item_count =
      static_cast<std::size_t>(points) * static_cast<std::size_t>(samples);

  std::vector<std::array<detail::sample_outcome, sweep_method_count>> results(
      item_count);

  std::atomic<std::size_t> cursor{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;
  auto worker = [&] {
    for (;;) {
      const std::size_t item = cursor.fetch_add(1);
      if (item >= item_count) return;
      const int k = static_cast<int>(item / static_cast<std::size_t>(samples));
      const int s = static_cast<int>(item % static_cast<std::size_t>(samples));
      try {
        detail::evaluate_sample(
            inputs, cfg.cache, cfg.deadlines,
            derive_seed(cfg.master_seed, static_cast<std::uint64_t>(k),
                        static_cast<std::uint64_t>(s)),
            cfg.u_grid.at(k), results[item]);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };

  int thread_count = jobs < 1 ? 1 : jobs;
  if (static_cast<std::size_t>(thread_count) > item_count)
    thread_count = static_cast<int>(item_count);
  if (thread_count <= 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (int t = 0; t < thread_count; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  std::vector<sweep_row> rows;
  for (int k = 0; k < points; ++k) {
    for (int m = 0; m < sweep_method_count; ++m) {
      int feasible = 0;
      std::int64_t colors_sum = 0;
      for (int s = 0; s < samples; ++s) {
        const auto& o = results[static_cast<std::size_t>(k) *
                                    static_cast<std::size_t>(samples) +
                                static_cast<std::size_t>(s)]
                            [static_cast<std::size_t>(m)];
        if (o.feasible) {
          ++feasible;
          colors_sum += o.total_colors;
        }
      }
      sweep_row row;
      row.utilization = cfg.u_grid.at(k);
      row.method = sweep_method_name(static_cast<sweep_method>(m));
      row.schedulable_pct = 100.0 * feasible / samples;
      if (m != 4 && feasible > 0)
        row.avg_colors_used = static_cast<double>(colors_sum) / feasible;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

}  // namespace colorsched
