#include <gtest/gtest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "colorsched/io.hpp"

using namespace colorsched;

namespace {

struct command_result {
  int exit_code = -1;
  std::string output;  // stdout and stderr interleaved
};

command_result run_cli(const std::string& args) {
  const std::string cmd = std::string(CLI_PATH) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  EXPECT_NE(pipe, nullptr) << "popen failed for: " << cmd;
  command_result result;
  char buf[4096];
  std::size_t n = 0;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) result.output.append(buf, n);
  const int status = pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

std::size_t count_occurrences(const std::string& text, const std::string& needle) {
  std::size_t count = 0;
  for (std::size_t at = text.find(needle); at != std::string::npos;
       at = text.find(needle, at + 1))
    ++count;
  return count;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = ::testing::TempDir() + "colorsched_cli_" +
           ::testing::UnitTest::GetInstance()->current_test_info()->name();
    std::filesystem::remove_all(dir_);
    std::filesystem::create_directories(dir_);
  }

  std::string path(const std::string& name) const { return dir_ + "/" + name; }

  std::string write_default_cache() {
    const auto p = path("cache.json");
    write_text_file(p, cache_config_to_json({2, 32, 16, 10}).dump());
    return p;
  }

  // Three-page program with one bounded self-loop.
  std::string write_program() {
    task_program prog;
    prog.task_id = "demo";
    prog.page_count = 3;
    prog.blocks = {{"A", 0, 0, 1, 2}, {"B", 1, 0, 2, 3}, {"X", 2, 0, 0, 1}};
    prog.edges = {{"A", "B"}, {"B", "B"}, {"B", "X"}};
    prog.entry = "A";
    prog.exit = "X";
    prog.loops = {{"B", 4, {{"B", "B"}}}};
    const auto p = path("program.json");
    save_program(p, prog);
    return p;
  }

  std::string dir_;
};

TEST_F(CliTest, WcetTableCommandWritesTheTable) {
  const auto cache = write_default_cache();
  const auto program = write_program();
  const auto out = path("table.csv");
  const auto res =
      run_cli("wcet-table --program " + program + " --cache " + cache +
              " --heuristic fair --n-tasks 4 --out " + out);
  EXPECT_EQ(res.exit_code, 0) << res.output;

  const auto tables = wcet_tables_from_csv(read_text_file(out), out);
  ASSERT_EQ(tables.size(), 1u);
  EXPECT_EQ(tables[0].task_id, "demo");
  EXPECT_EQ(tables[0].method, heuristic::fair);
  // Table length is capped by the page count (3 < 32 - 3 shared pages).
  EXPECT_EQ(tables[0].max_colors(), 3);
  for (int j = 2; j <= 3; ++j) EXPECT_LE(tables[0].at(j), tables[0].at(j - 1));
}

TEST_F(CliTest, WcetTableCommandDumpsColoringsAndClasses) {
  const auto cache = write_default_cache();
  const auto program = write_program();
  const auto res = run_cli(
      "wcet-table --program " + program + " --cache " + cache +
      " --heuristic federated --n-tasks 2 --out " + path("t.csv") +
      " --dump-colorings " + path("col.csv") + " --dump-classes " +
      path("cls.csv") + " --classes-colors 2");
  EXPECT_EQ(res.exit_code, 0) << res.output;

  const auto colorings = read_text_file(path("col.csv"));
  EXPECT_EQ(colorings.rfind(coloring_csv_header, 0), 0u);
  // One row per (budget, page): budgets 1..3, three pages each.
  EXPECT_EQ(count_occurrences(colorings, "\ndemo,"), 9u);

  const auto classes = read_text_file(path("cls.csv"));
  EXPECT_EQ(classes.rfind(classes_csv_header, 0), 0u);
  // The looped block's lines persist in the cache: first-miss, scope B.
  EXPECT_NE(classes.find("B,0,FM,B"), std::string::npos) << classes;
}

TEST_F(CliTest, WcetTableCommandRejectsBadInputs) {
  const auto cache = write_default_cache();
  const auto program = write_program();
  EXPECT_EQ(run_cli("wcet-table --program " + program + " --cache " + cache +
                    " --heuristic greedy --n-tasks 2 --out " + path("t.csv"))
                .exit_code,
            2);
  EXPECT_EQ(run_cli("wcet-table --program " + path("missing.json") +
                    " --cache " + cache + " --heuristic fair --n-tasks 2 --out " +
                    path("t.csv"))
                .exit_code,
            2);
  EXPECT_EQ(run_cli("wcet-table --program " + program + " --cache " + cache +
                    " --heuristic fair --n-tasks 2 --out " + path("t.csv") +
                    " --dump-classes " + path("c.csv") + " --classes-colors 9")
                .exit_code,
            2);
}

// Tables + task set + tiny cache for the allocate command.
class CliAllocateTest : public CliTest {
 protected:
  void write_table(const std::string& file, const std::string& task,
                   std::vector<std::int64_t> wcets) {
    wcet_table t;
    t.task_id = task;
    t.method = heuristic::fair;
    for (const auto w : wcets) {
      wcet_entry e;
      e.wcet_cycles = w;
      t.entries.push_back(std::move(e));
    }
    std::filesystem::create_directories(path("tables"));
    write_text_file(path("tables/" + file), wcet_table_to_csv(t));
  }

  std::string write_taskset(std::int64_t deadline, std::int64_t period) {
    const task_set tasks{{"a", 1, deadline, period, 2},
                         {"b", 1, deadline, period, 2}};
    const auto p = path("taskset.json");
    write_text_file(p, taskset_to_json(tasks).dump());
    return p;
  }

  std::string write_small_cache() {
    const auto p = path("small_cache.json");
    write_text_file(p, cache_config_to_json({1, 3, 16, 10}).dump());
    return p;
  }
};

TEST_F(CliAllocateTest, FeasibleAllocationPrintsJsonAndExitsZero) {
  write_table("a.csv", "a", {10, 6});
  write_table("b.csv", "b", {8, 5});
  const auto res = run_cli("allocate --taskset " + write_taskset(20, 20) +
                           " --tables " + path("tables") + " --cache " +
                           write_small_cache());
  EXPECT_EQ(res.exit_code, 0) << res.output;
  const auto doc = json::parse(res.output);
  EXPECT_EQ(doc.at("feasible"), true);
  EXPECT_EQ(doc.at("total_colors"), 2);
  EXPECT_EQ(doc.at("colors").at("a"), 1);
  EXPECT_EQ(doc.at("colors").at("b"), 1);
}

TEST_F(CliAllocateTest, InfeasibleAllocationStillExportsTheLp) {
  write_table("a.csv", "a", {30, 30});
  write_table("b.csv", "b", {30, 30});
  const auto lp = path("model.lp");
  const auto res = run_cli("allocate --taskset " + write_taskset(20, 20) +
                           " --tables " + path("tables") + " --cache " +
                           write_small_cache() + " --export-lp " + lp);
  EXPECT_EQ(res.exit_code, 1) << res.output;
  EXPECT_EQ(json::parse(res.output).at("feasible"), false);
  const auto text = read_text_file(lp);
  EXPECT_EQ(text.rfind("\\Problem", 0), 0u);
  EXPECT_NE(text.find("Minimize"), std::string::npos);
}

TEST_F(CliAllocateTest, RejectsDuplicateAndMissingTables) {
  write_table("a.csv", "a", {10, 6});
  write_table("dup.csv", "a", {9, 5});
  EXPECT_EQ(run_cli("allocate --taskset " + write_taskset(20, 20) +
                    " --tables " + path("tables") + " --cache " +
                    write_small_cache())
                .exit_code,
            2);

  std::filesystem::remove(path("tables/dup.csv"));
  // Task b has no table.
  EXPECT_EQ(run_cli("allocate --taskset " + write_taskset(20, 20) +
                    " --tables " + path("tables") + " --cache " +
                    write_small_cache())
                .exit_code,
            2);
}

class CliSweepTest : public CliTest {
 protected:
  struct config_options {
    std::string file = "sweep.json";
    std::uint64_t master_seed = 3;
    double u_min = 0.5;
    double u_max = 1.0;
    double u_step = 0.25;
    bool constrained = false;
    bool direct_mapped = false;  // 1-way cache, so page colors matter
  };

  std::string write_config() { return write_config(config_options{}); }

  std::string write_config(const config_options& opt) {
    json grid{{"min", opt.u_min}, {"max", opt.u_max}, {"step", opt.u_step}};
    json doc{{"v", 1},
             {"u_grid", grid},
             {"samples_per_point", 5},
             {"master_seed", opt.master_seed}};
    if (opt.constrained) doc["deadline_mode"] = "constrained";
    if (opt.direct_mapped)
      doc["cache"] = json{{"v", 1},
                          {"ways", 1},
                          {"cache_pages", 16},
                          {"lines_per_page", 16},
                          {"miss_penalty", 10}};
    task_program small;
    small.task_id = "s1";
    small.page_count = 2;
    small.blocks = {{"h", 0, 0, 2, 2}, {"b", 1, 0, 2, 1}, {"x", 0, 8, 9, 1}};
    small.edges = {{"h", "b"}, {"b", "h"}, {"h", "x"}};
    small.entry = "h";
    small.exit = "x";
    small.loops = {{"h", 3, {{"b", "h"}}}};
    task_program other = small;
    other.task_id = "s2";
    doc["programs"] = json::array({program_to_json(small), program_to_json(other)});
    const auto p = path(opt.file);
    write_text_file(p, doc.dump());
    return p;
  }
};

TEST_F(CliSweepTest, OutputIsByteIdenticalAcrossRunsAndJobCounts) {
  const auto cfg = write_config();
  ASSERT_EQ(run_cli("sweep --config " + cfg + " --out " + path("a.csv") +
                    " --jobs 1")
                .exit_code,
            0);
  ASSERT_EQ(run_cli("sweep --config " + cfg + " --out " + path("b.csv") +
                    " --jobs 3")
                .exit_code,
            0);
  ASSERT_EQ(run_cli("sweep --config " + cfg + " --out " + path("c.csv") +
                    " --jobs 1")
                .exit_code,
            0);
  const auto a = read_text_file(path("a.csv"));
  EXPECT_EQ(a, read_text_file(path("b.csv")));
  EXPECT_EQ(a, read_text_file(path("c.csv")));
  // 3 grid points x 5 methods, plus the header.
  EXPECT_EQ(count_occurrences(a, "\n"), 16u);
  EXPECT_EQ(a.rfind(sweep_csv_header, 0), 0u);
}

TEST_F(CliSweepTest, EnvironmentSeedOverridesTheConfig) {
  // Overloaded grid on a direct-mapped cache: which samples survive depends
  // on the drawn task sets and random colorings, so the CSV is seed-sensitive.
  config_options opt;
  opt.u_min = 1.0;
  opt.u_max = 1.4;
  opt.u_step = 0.2;
  opt.constrained = true;
  opt.direct_mapped = true;
  opt.file = "sweep3.json";
  opt.master_seed = 3;
  const auto cfg3 = write_config(opt);
  opt.file = "sweep7.json";
  opt.master_seed = 7;
  const auto cfg7 = write_config(opt);
  ASSERT_EQ(run_cli("sweep --config " + cfg3 + " --out " + path("a.csv"))
                .exit_code,
            0);
  ASSERT_EQ(run_cli("sweep --config " + cfg7 + " --out " + path("c.csv"))
                .exit_code,
            0);
  const std::string env_cmd = "COLORSCHED_SEED=7 " + std::string(CLI_PATH) +
                              " sweep --config " + cfg3 + " --out " +
                              path("b.csv") + " 2>&1";
  FILE* pipe = popen(env_cmd.c_str(), "r");
  ASSERT_NE(pipe, nullptr);
  char buf[256];
  while (fread(buf, 1, sizeof buf, pipe) > 0) {
  }
  const int status = pclose(pipe);
  ASSERT_TRUE(WIFEXITED(status));
  ASSERT_EQ(WEXITSTATUS(status), 0);
  // The variable wins over the file, exactly as if the file had said 7.
  EXPECT_EQ(read_text_file(path("b.csv")), read_text_file(path("c.csv")));
  EXPECT_NE(read_text_file(path("a.csv")), read_text_file(path("b.csv")));

  const std::string bad_cmd = "COLORSCHED_SEED=abc " + std::string(CLI_PATH) +
                              " sweep --config " + cfg3 + " --out " +
                              path("d.csv") + " 2>&1";
  pipe = popen(bad_cmd.c_str(), "r");
  ASSERT_NE(pipe, nullptr);
  while (fread(buf, 1, sizeof buf, pipe) > 0) {
  }
  EXPECT_EQ(WEXITSTATUS(pclose(pipe)), 2);
}

TEST_F(CliTest, PlotDrawsOnePolylinePerMethodWithData) {
  std::vector<sweep_row> rows;
  for (const double u : {0.5, 1.0}) {
    rows.push_back({u, "ilp_fair", 90.0, 5.0});
    rows.push_back({u, "ilp_federated", 80.0, 5.5});
    rows.push_back({u, "ilp_random", 70.0, 6.0});
    rows.push_back({u, "random_alloc", 60.0, 6.5});
    rows.push_back({u, "infinite_cache", 100.0, std::nullopt});
  }
  const auto csv = path("sweep.csv");
  write_text_file(csv, sweep_rows_to_csv(rows));

  const auto svg_path = path("plot.svg");
  auto res = run_cli("plot --csv " + csv + " --out " + svg_path);
  EXPECT_EQ(res.exit_code, 0) << res.output;
  const auto pct_svg = read_text_file(svg_path);
  EXPECT_EQ(count_occurrences(pct_svg, "<polyline"), 5u);
  EXPECT_NE(pct_svg.find("schedulable_pct"), std::string::npos);

  // infinite_cache has no color average, so its series disappears here.
  res = run_cli("plot --csv " + csv + " --out " + svg_path +
                " --metric colors --max-colors 8");
  EXPECT_EQ(res.exit_code, 0) << res.output;
  const auto colors_svg = read_text_file(svg_path);
  EXPECT_EQ(count_occurrences(colors_svg, "<polyline"), 4u);
  EXPECT_NE(colors_svg.find("avg_colors_used"), std::string::npos);
}

TEST_F(CliTest, PlotRejectsEmptyOrBogusInput) {
  const auto csv = path("empty.csv");
  write_text_file(csv, std::string(sweep_csv_header) + "\n");
  EXPECT_EQ(run_cli("plot --csv " + csv + " --out " + path("o.svg")).exit_code,
            2);
  EXPECT_EQ(run_cli("plot --csv " + csv + " --out " + path("o.svg") +
                    " --metric volume")
                .exit_code,
            2);
}

TEST_F(CliTest, BadInvocationsAreInputErrors) {
  EXPECT_EQ(run_cli("").exit_code, 2);
  EXPECT_EQ(run_cli("frobnicate").exit_code, 2);
  EXPECT_EQ(run_cli("wcet-table --program only.json").exit_code, 2);
  EXPECT_EQ(run_cli("--help").exit_code, 0);
}

}  // namespace
