#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "colorsched/colorsched.hpp"

namespace {

using namespace colorsched;

int run_wcet_table(const std::string& program_path,
                   const std::string& cache_path, const std::string& heur_name,
                   int n_tasks, const std::string& out_path,
                   std::uint64_t seed, const std::string& colorings_path,
                   const std::string& classes_path, int classes_colors) {
  const auto prog = load_program(program_path);
  const auto cache = load_cache_config(cache_path);
  validate_lines(prog, cache);
  const auto heur = parse_heuristic(heur_name);
  program_index idx(prog);
  const auto table = build_wcet_table(idx, heur, seed, cache, n_tasks);
  write_text_file(out_path, wcet_table_to_csv(table));
  if (!colorings_path.empty())
    write_text_file(colorings_path, coloring_dump_to_csv(table));
  if (!classes_path.empty()) {
    require(classes_colors >= 1 && classes_colors <= table.max_colors(),
            errc::bad_budget, "--classes-colors outside the table range");
    const auto& col =
        table.entries[static_cast<std::size_t>(classes_colors - 1)].realized;
    write_text_file(classes_path,
                    classes_dump_to_csv(idx, classify(idx, col, cache)));
  }
  return 0;
}

int run_allocate(const std::string& taskset_path, const std::string& tables_dir,
                 const std::string& cache_path, const std::string& lp_path) {
  const auto tasks = load_taskset(taskset_path);
  const auto cache = load_cache_config(cache_path);

  std::vector<std::filesystem::path> files;
  {
    std::error_code ec;
    std::filesystem::directory_iterator it(tables_dir, ec);
    require(!ec, errc::io_failure, "cannot read directory " + tables_dir);
    for (const auto& entry : it)
      if (entry.is_regular_file() && entry.path().extension() == ".csv")
        files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  require(!files.empty(), errc::io_failure,
          "no .csv table files in " + tables_dir);

  std::map<std::string, wcet_table> by_task;
  for (const auto& file : files) {
    for (auto& table :
         wcet_tables_from_csv(read_text_file(file.string()), file.string())) {
      const auto [it, fresh] = by_task.emplace(table.task_id, table);
      require(fresh, errc::inconsistent_ids,
              "duplicate table for task " + table.task_id);
      (void)it;
    }
  }

  std::vector<wcet_table> tables;
  std::vector<std::string> ids;
  for (const auto& t : tasks) {
    const auto it = by_task.find(t.id);
    require(it != by_task.end(), errc::inconsistent_ids,
            "no WCET table for task " + t.id);
    tables.push_back(it->second);
    ids.push_back(t.id);
  }

  const auto problem = make_problem(tables, tasks, cache);
  if (!lp_path.empty()) write_text_file(lp_path, export_lp(problem));
  const auto alloc = solve(problem);
  std::cout << allocation_to_json(alloc, ids).dump(2) << "\n";
  return alloc.feasible ? 0 : 1;
}

int run_sweep_cmd(const std::string& config_path, const std::string& out_path,
                  int jobs) {
  auto cfg = load_sweep_config(config_path);
  if (const char* env = std::getenv("COLORSCHED_SEED")) {
    try {
      std::size_t used = 0;
      cfg.master_seed = std::stoull(env, &used);
      require(used == std::string(env).size(), errc::bad_config, "");
    } catch (...) {
      fail(errc::bad_config,
           "COLORSCHED_SEED must be an unsigned integer, got: " +
               std::string(env));
    }
  }
  const auto rows = run_sweep(cfg, jobs);
  write_text_file(out_path, sweep_rows_to_csv(rows));
  return 0;
}

int run_plot(const std::string& csv_path, const std::string& out_path,
             const std::string& metric_name, int max_colors) {
  const auto rows =
      sweep_rows_from_csv(read_text_file(csv_path), csv_path);
  const auto metric = parse_plot_metric(metric_name);
  write_text_file(out_path, render_sweep_svg(rows, metric, max_colors));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"page-coloring WCET tables, color allocation, and EDF sweeps"};
  app.require_subcommand(1);

  std::string program_path, cache_path, heur_name, out_path;
  std::string colorings_path, classes_path;
  int n_tasks = 1, classes_colors = 1;
  std::uint64_t seed = 0;
  auto* wcet_cmd = app.add_subcommand(
      "wcet-table", "analyze one program and write its WCET-vs-colors table");
  wcet_cmd->add_option("--program", program_path, "program JSON")->required();
  wcet_cmd->add_option("--cache", cache_path, "cache config JSON")->required();
  wcet_cmd->add_option("--heuristic", heur_name,
                       "coloring heuristic: fair|federated|random")
      ->required();
  wcet_cmd->add_option("--n-tasks", n_tasks, "tasks sharing the cache")
      ->required();
  wcet_cmd->add_option("--out", out_path, "output CSV path")->required();
  wcet_cmd->add_option("--seed", seed, "seed for the random heuristic");
  wcet_cmd->add_option("--dump-colorings", colorings_path,
                       "also write the page->color maps as CSV");
  wcet_cmd->add_option("--dump-classes", classes_path,
                       "also write per-line access classes as CSV");
  wcet_cmd->add_option("--classes-colors", classes_colors,
                       "color count whose classification is dumped");

  std::string taskset_path, tables_dir, lp_path;
  auto* alloc_cmd = app.add_subcommand(
      "allocate", "pick per-task color counts minimizing total colors");
  alloc_cmd->add_option("--taskset", taskset_path, "task set JSON")->required();
  alloc_cmd->add_option("--tables", tables_dir,
                        "directory of WCET table CSV files")
      ->required();
  alloc_cmd->add_option("--cache", cache_path, "cache config JSON")->required();
  alloc_cmd->add_option("--export-lp", lp_path,
                        "also write the selection problem in LP format");

  std::string config_path;
  int jobs = 1;
  auto* sweep_cmd = app.add_subcommand(
      "sweep", "run a utilization sweep over the five methods");
  sweep_cmd->add_option("--config", config_path, "sweep config JSON")
      ->required();
  sweep_cmd->add_option("--out", out_path, "output CSV path")->required();
  sweep_cmd->add_option("--jobs", jobs, "worker threads");

  std::string csv_path, metric_name = "pct";
  int max_colors = 16;
  auto* plot_cmd =
      app.add_subcommand("plot", "render a sweep CSV as an SVG chart");
  plot_cmd->add_option("--csv", csv_path, "sweep CSV path")->required();
  plot_cmd->add_option("--out", out_path, "output SVG path")->required();
  plot_cmd->add_option("--metric", metric_name, "pct or colors");
  plot_cmd->add_option("--max-colors", max_colors,
                       "y-axis cap for --metric colors");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;  // parse failures are input errors
  }

  try {
    if (app.got_subcommand(wcet_cmd))
      return run_wcet_table(program_path, cache_path, heur_name, n_tasks,
                            out_path, seed, colorings_path, classes_path,
                            classes_colors);
    if (app.got_subcommand(alloc_cmd))
      return run_allocate(taskset_path, tables_dir, cache_path, lp_path);
    if (app.got_subcommand(sweep_cmd))
      return run_sweep_cmd(config_path, out_path, jobs);
    if (app.got_subcommand(plot_cmd))
      return run_plot(csv_path, out_path, metric_name, max_colors);
  } catch (const colorsched::error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
