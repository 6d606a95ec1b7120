#include <gtest/gtest.h>

#include <cstring>
#include <string>
#include <vector>

#include "colorsched/io.hpp"

using namespace colorsched;

namespace {

template <typename Fn>
void expect_code(errc expected, Fn&& fn) {
  try {
    fn();
    FAIL() << "expected " << errc_name(expected);
  } catch (const error& e) {
    EXPECT_EQ(errc_name(e.code()), std::string(errc_name(expected)))
        << e.what();
  }
}

std::string temp_path(const std::string& name) {
  return ::testing::TempDir() + "colorsched_io_" + name;
}

TEST(FormatNumber, TrimsLikeAPlotAxis) {
  EXPECT_EQ(format_number(0.3), "0.3");
  EXPECT_EQ(format_number(100.0), "100");
  EXPECT_EQ(format_number(50.0), "50");
  EXPECT_EQ(format_number(0.1234567), "0.123457");
}

TEST(TextFiles, RoundTripAndFailCleanly) {
  const auto path = temp_path("roundtrip.txt");
  write_text_file(path, "two\nlines\n");
  EXPECT_EQ(read_text_file(path), "two\nlines\n");
  expect_code(errc::io_failure,
              [] { read_text_file("/nonexistent/dir/nothing.json"); });
}

TEST(CacheConfigJson, RoundTrips) {
  const cache_config cache{4, 64, 8, 25};
  EXPECT_EQ(cache_config_from_json(cache_config_to_json(cache)), cache);
}

TEST(CacheConfigJson, RejectsBadDocuments) {
  auto doc = cache_config_to_json({2, 32, 16, 10});
  doc["v"] = 2;
  expect_code(errc::malformed_document, [&] { cache_config_from_json(doc); });

  doc = cache_config_to_json({2, 32, 16, 10});
  doc.erase("ways");
  expect_code(errc::malformed_document, [&] { cache_config_from_json(doc); });

  doc = cache_config_to_json({2, 32, 16, 10});
  doc["ways"] = "two";
  expect_code(errc::malformed_document, [&] { cache_config_from_json(doc); });

  // Structurally fine, geometrically impossible.
  doc = cache_config_to_json({2, 32, 16, 10});
  doc["ways"] = 3;
  expect_code(errc::bad_config, [&] { cache_config_from_json(doc); });
}

task_program looped_program() {
  task_program p;
  p.task_id = "loopy";
  p.page_count = 3;
  p.blocks = {{"A", 0, 0, 0, 1}, {"B", 1, 0, 0, 2}, {"X", 2, 0, 0, 1}};
  p.edges = {{"A", "B"}, {"B", "B"}, {"B", "X"}};
  p.entry = "A";
  p.exit = "X";
  p.loops = {{"B", 3, {{"B", "B"}}}};
  return p;
}

TEST(ProgramJson, RoundTrips) {
  const auto prog = looped_program();
  EXPECT_EQ(program_from_json(program_to_json(prog)), prog);
}

TEST(ProgramJson, RejectsBadDocuments) {
  auto doc = program_to_json(looped_program());
  doc["v"] = 7;
  expect_code(errc::malformed_document, [&] { program_from_json(doc); });

  doc = program_to_json(looped_program());
  doc.erase("entry");
  expect_code(errc::malformed_document, [&] { program_from_json(doc); });

  doc = program_to_json(looped_program());
  doc["edges"][0] = json::array({"A"});
  expect_code(errc::malformed_document, [&] { program_from_json(doc); });

  doc = program_to_json(looped_program());
  doc["blocks"][0]["lines"] = json::array({0});
  expect_code(errc::malformed_document, [&] { program_from_json(doc); });

  // Graph-level validation runs on load too.
  doc = program_to_json(looped_program());
  doc["entry"] = "nope";
  expect_code(errc::unknown_block, [&] { program_from_json(doc); });
}

TEST(ProgramJson, SaveAndLoadThroughAFile) {
  const auto path = temp_path("program.json");
  save_program(path, looped_program());
  EXPECT_EQ(load_program(path), looped_program());
}

TEST(TasksetJson, RoundTrips) {
  const task_set tasks{{"a", 7, 40, 50, 2}, {"b", 3, 30, 30, 1}};
  EXPECT_EQ(taskset_from_json(taskset_to_json(tasks)), tasks);
}

TEST(TasksetJson, OptionalFieldsDefault) {
  const auto tasks = taskset_from_json(
      json::parse(R"({"v":1,"tasks":[{"id":"a","deadline":5,"period":10}]})"));
  ASSERT_EQ(tasks.size(), 1u);
  EXPECT_EQ(tasks[0].wcet, 1);
  EXPECT_EQ(tasks[0].pages, 1);
  EXPECT_EQ(tasks[0].deadline, 5);
  EXPECT_EQ(tasks[0].period, 10);
}

TEST(TasksetJson, RejectsBadDocuments) {
  expect_code(errc::malformed_document, [] {
    taskset_from_json(json::parse(R"({"v":1,"tasks":7})"));
  });
  expect_code(errc::bad_task, [] {
    taskset_from_json(json::parse(R"({"v":1,"tasks":[]})"));
  });
  expect_code(errc::bad_task, [] {
    taskset_from_json(json::parse(
        R"({"v":1,"tasks":[{"id":"a","deadline":11,"period":10}]})"));
  });
}

TEST(SweepConfigJson, EmptyObjectMeansDefaults) {
  const auto cfg = sweep_config_from_json(json::parse("{}"));
  EXPECT_TRUE(cfg.programs.empty());
  EXPECT_EQ(cfg.cache, (cache_config{2, 32, 16, 10}));
  EXPECT_DOUBLE_EQ(cfg.u_grid.min, 0.30);
  EXPECT_DOUBLE_EQ(cfg.u_grid.max, 1.70);
  EXPECT_DOUBLE_EQ(cfg.u_grid.step, 0.01);
  EXPECT_EQ(cfg.samples_per_point, 1000);
  EXPECT_EQ(cfg.deadlines, deadline_mode::implicit);
  EXPECT_EQ(cfg.master_seed, 1u);
}

TEST(SweepConfigJson, ReadsEveryField) {
  json doc = json::parse(R"({
    "v": 1,
    "cache": {"ways": 1, "cache_pages": 8, "lines_per_page": 4, "miss_penalty": 5},
    "u_grid": {"min": 0.5, "max": 1.0, "step": 0.25},
    "samples_per_point": 7,
    "deadline_mode": "constrained",
    "master_seed": 99
  })");
  doc["programs"] = json::array({program_to_json(looped_program())});
  const auto cfg = sweep_config_from_json(doc);
  ASSERT_EQ(cfg.programs.size(), 1u);
  EXPECT_EQ(cfg.programs[0], looped_program());
  EXPECT_EQ(cfg.cache, (cache_config{1, 8, 4, 5}));
  EXPECT_EQ(cfg.u_grid.points(), 3);
  EXPECT_EQ(cfg.samples_per_point, 7);
  EXPECT_EQ(cfg.deadlines, deadline_mode::constrained);
  EXPECT_EQ(cfg.master_seed, 99u);
}

TEST(SweepConfigJson, ValidatesTheGrid) {
  expect_code(errc::bad_config, [] {
    sweep_config_from_json(
        json::parse(R"({"u_grid":{"min":1.0,"max":0.5,"step":0.1}})"));
  });
  expect_code(errc::malformed_document, [] {
    sweep_config_from_json(json::parse(R"({"u_grid":{"min":1.0,"step":0.1}})"));
  });
}

wcet_table plain_table(std::string id, heuristic h,
                       std::vector<std::int64_t> wcets) {
  wcet_table t;
  t.task_id = std::move(id);
  t.method = h;
  for (const auto w : wcets) {
    wcet_entry e;
    e.wcet_cycles = w;
    t.entries.push_back(std::move(e));
  }
  return t;
}

TEST(WcetTableCsv, RoundTripsValues) {
  const auto a = plain_table("a", heuristic::fair, {30, 20, 10});
  const auto b = plain_table("b", heuristic::federated, {9, 8});
  std::string text = wcet_table_to_csv(a);
  const std::string b_csv = wcet_table_to_csv(b);
  text += b_csv.substr(std::strlen(wcet_table_csv_header) + 1);

  const auto tables = wcet_tables_from_csv(text, "test");
  ASSERT_EQ(tables.size(), 2u);
  EXPECT_EQ(tables[0].task_id, "a");
  EXPECT_EQ(tables[0].method, heuristic::fair);
  EXPECT_EQ(tables[0].at(1), 30);
  EXPECT_EQ(tables[0].at(2), 20);
  EXPECT_EQ(tables[0].at(3), 10);
  EXPECT_EQ(tables[1].task_id, "b");
  EXPECT_EQ(tables[1].method, heuristic::federated);
  EXPECT_EQ(tables[1].max_colors(), 2);
}

TEST(WcetTableCsv, RejectsBrokenTables) {
  const std::string header = std::string(wcet_table_csv_header) + "\n";
  expect_code(errc::malformed_document, [&] {
    wcet_tables_from_csv("wrong,header\n", "test");
  });
  expect_code(errc::malformed_document,
              [&] { wcet_tables_from_csv(header, "test"); });
  // Color counts must be 1,2,... without gaps.
  expect_code(errc::malformed_document, [&] {
    wcet_tables_from_csv(header + "a,fair,1,30\na,fair,3,10\n", "test");
  });
  // One task, two heuristics.
  expect_code(errc::malformed_document, [&] {
    wcet_tables_from_csv(header + "a,fair,1,30\na,random,2,10\n", "test");
  });
  expect_code(errc::malformed_document, [&] {
    wcet_tables_from_csv(header + "a,fair,1,0\n", "test");
  });
  expect_code(errc::malformed_document, [&] {
    wcet_tables_from_csv(header + "a,fair,1\n", "test");
  });
}

TEST(ColoringCsv, DumpsOneRowPerPagePerBudget) {
  wcet_table t = plain_table("t", heuristic::fair, {50, 40});
  t.entries[0].realized = coloring({0, 0});
  t.entries[1].realized = coloring({0, 1});
  EXPECT_EQ(coloring_dump_to_csv(t),
            "task,heuristic,colors,page,color\n"
            "t,fair,1,0,0\n"
            "t,fair,1,1,0\n"
            "t,fair,2,0,0\n"
            "t,fair,2,1,1\n");
}

TEST(ClassesCsv, NamesTheScopeLoopOfFirstMisses) {
  const program_index idx(looped_program());
  const cache_config cache{2, 32, 16, 10};
  const auto classes = classify(idx, coloring({0, 1, 2}), cache);
  EXPECT_EQ(classes_dump_to_csv(idx, classes),
            "block,line,class,scope\n"
            "A,0,NC,-\n"
            "B,0,FM,B\n"
            "X,0,NC,-\n");
}

TEST(SweepCsv, RoundTripsIncludingEmptyAverages) {
  std::vector<sweep_row> rows;
  rows.push_back({0.3, "ilp_fair", 97.5, 4.25});
  rows.push_back({0.3, "infinite_cache", 100.0, std::nullopt});
  const std::string text = sweep_rows_to_csv(rows);
  EXPECT_EQ(text,
            "utilization,method,schedulable_pct,avg_colors_used\n"
            "0.3,ilp_fair,97.5,4.25\n"
            "0.3,infinite_cache,100,\n");

  const auto parsed = sweep_rows_from_csv(text, "test");
  ASSERT_EQ(parsed.size(), 2u);
  EXPECT_DOUBLE_EQ(parsed[0].utilization, 0.3);
  EXPECT_EQ(parsed[0].method, "ilp_fair");
  EXPECT_DOUBLE_EQ(parsed[0].schedulable_pct, 97.5);
  ASSERT_TRUE(parsed[0].avg_colors_used.has_value());
  EXPECT_DOUBLE_EQ(*parsed[0].avg_colors_used, 4.25);
  EXPECT_FALSE(parsed[1].avg_colors_used.has_value());
}

TEST(SweepCsv, RejectsBrokenRows) {
  const std::string header = std::string(sweep_csv_header) + "\n";
  expect_code(errc::malformed_document,
              [&] { sweep_rows_from_csv(header, "test"); });
  expect_code(errc::malformed_document, [&] {
    sweep_rows_from_csv(header + "abc,ilp_fair,50,\n", "test");
  });
  expect_code(errc::malformed_document, [&] {
    sweep_rows_from_csv(header + "0.3,ilp_fair,50\n", "test");
  });
  expect_code(errc::malformed_document, [&] {
    sweep_rows_from_csv(header + "0.3,,50,\n", "test");
  });
}

TEST(AllocationJson, ReportsColorsByTaskId) {
  allocation alloc;
  alloc.feasible = true;
  alloc.colors = {1, 2};
  alloc.total_colors = 3;
  const auto doc = allocation_to_json(alloc, {"a", "b"});
  EXPECT_EQ(doc.at("feasible"), true);
  EXPECT_EQ(doc.at("total_colors"), 3);
  EXPECT_EQ(doc.at("colors").at("a"), 1);
  EXPECT_EQ(doc.at("colors").at("b"), 2);
}

TEST(LoadersReadFromDisk, CacheConfig) {
  const auto path = temp_path("cache.json");
  write_text_file(path, cache_config_to_json({1, 8, 4, 5}).dump());
  EXPECT_EQ(load_cache_config(path), (cache_config{1, 8, 4, 5}));
  expect_code(errc::malformed_document, [&] {
    write_text_file(path, "{not json");
    load_cache_config(path);
  });
}

}  // namespace
