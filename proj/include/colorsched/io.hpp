#pragma once

#include <cstdio>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "colorsched/allocator.hpp"
#include "colorsched/cache_analysis.hpp"
#include "colorsched/cache_config.hpp"
#include "colorsched/coloring.hpp"
#include "colorsched/errors.hpp"
#include "colorsched/program.hpp"
#include "colorsched/sweep.hpp"
#include "colorsched/task.hpp"
#include "colorsched/wcet.hpp"

namespace colorsched {

using json = nlohmann::json;

// Compact float rendering for CSV cells ("%.6g": enough for utilization
// grids and percentages, no trailing zero noise).
inline std::string format_number(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", value);
  return buf;
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), errc::io_failure, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  require(!in.bad(), errc::io_failure, "read failed: " + path);
  return buf.str();
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(out), errc::io_failure, "cannot open " + path);
  out << text;
  out.flush();
  require(!out.bad(), errc::io_failure, "write failed: " + path);
}

namespace detail {

inline json parse_json(const std::string& text, const std::string& what) {
  json doc = json::parse(text, nullptr, false);
  require(!doc.is_discarded(), errc::malformed_document,
          "invalid JSON in " + what);
  return doc;
}

inline const json& need(const json& doc, const char* key,
                        const std::string& what) {
  require(doc.is_object() && doc.contains(key), errc::malformed_document,
          what + ": missing field \"" + key + "\"");
  return doc.at(key);
}

inline void check_version(const json& doc, const std::string& what) {
  if (doc.is_object() && doc.contains("v"))
    require(doc.at("v") == 1, errc::malformed_document,
            what + ": unsupported schema version");
}

template <typename T>
T as(const json& value, const std::string& what) {
  try {
    return value.get<T>();
  } catch (const json::exception&) {
    fail(errc::malformed_document, what + ": wrong field type");
  }
}

}  // namespace detail

// ---- cache config ----------------------------------------------------------

inline cache_config cache_config_from_json(const json& doc) {
  detail::check_version(doc, "cache config");
  cache_config cache;
  cache.ways = detail::as<int>(detail::need(doc, "ways", "cache config"),
                               "ways");
  cache.cache_pages =
      detail::as<int>(detail::need(doc, "cache_pages", "cache config"),
                      "cache_pages");
  cache.lines_per_page =
      detail::as<int>(detail::need(doc, "lines_per_page", "cache config"),
                      "lines_per_page");
  cache.miss_penalty =
      detail::as<int>(detail::need(doc, "miss_penalty", "cache config"),
                      "miss_penalty");
  validate(cache);
  return cache;
}

inline json cache_config_to_json(const cache_config& cache) {
  return json{{"v", 1},
              {"ways", cache.ways},
              {"cache_pages", cache.cache_pages},
              {"lines_per_page", cache.lines_per_page},
              {"miss_penalty", cache.miss_penalty}};
}

inline cache_config load_cache_config(const std::string& path) {
  return cache_config_from_json(
      detail::parse_json(read_text_file(path), path));
}

// ---- programs --------------------------------------------------------------

inline task_program program_from_json(const json& doc) {
  detail::check_version(doc, "program");
  task_program prog;
  prog.task_id =
      detail::as<std::string>(detail::need(doc, "task_id", "program"),
                              "task_id");
  prog.page_count =
      detail::as<int>(detail::need(doc, "page_count", "program"), "page_count");
  const auto& blocks = detail::need(doc, "blocks", "program");
  require(blocks.is_array(), errc::malformed_document, "blocks must be a list");
  for (const auto& b : blocks) {
    basic_block bb;
    bb.id = detail::as<std::string>(detail::need(b, "id", "block"), "block id");
    bb.page = detail::as<int>(detail::need(b, "page", "block"), "block page");
    const auto& lines = detail::need(b, "lines", "block");
    require(lines.is_array() && lines.size() == 2, errc::malformed_document,
            "block lines must be [first, last]");
    bb.first_line = detail::as<int>(lines.at(0), "first line");
    bb.last_line = detail::as<int>(lines.at(1), "last line");
    bb.instr_count =
        detail::as<std::int64_t>(detail::need(b, "instr", "block"), "instr");
    prog.blocks.push_back(std::move(bb));
  }
  const auto& edges = detail::need(doc, "edges", "program");
  require(edges.is_array(), errc::malformed_document, "edges must be a list");
  for (const auto& e : edges) {
    require(e.is_array() && e.size() == 2, errc::malformed_document,
            "edge must be [from, to]");
    prog.edges.emplace_back(detail::as<std::string>(e.at(0), "edge from"),
                            detail::as<std::string>(e.at(1), "edge to"));
  }
  prog.entry =
      detail::as<std::string>(detail::need(doc, "entry", "program"), "entry");
  prog.exit =
      detail::as<std::string>(detail::need(doc, "exit", "program"), "exit");
  if (doc.contains("loops")) {
    const auto& loops = doc.at("loops");
    require(loops.is_array(), errc::malformed_document,
            "loops must be a list");
    for (const auto& l : loops) {
      loop_decl decl;
      decl.header =
          detail::as<std::string>(detail::need(l, "header", "loop"), "header");
      decl.bound =
          detail::as<std::int64_t>(detail::need(l, "bound", "loop"), "bound");
      const auto& backs = detail::need(l, "back_edges", "loop");
      require(backs.is_array(), errc::malformed_document,
              "back_edges must be a list");
      for (const auto& e : backs) {
        require(e.is_array() && e.size() == 2, errc::malformed_document,
                "back edge must be [from, to]");
        decl.back_edges.emplace_back(
            detail::as<std::string>(e.at(0), "back edge from"),
            detail::as<std::string>(e.at(1), "back edge to"));
      }
      prog.loops.push_back(std::move(decl));
    }
  }
  validate(prog);
  return prog;
}

inline json program_to_json(const task_program& prog) {
  json blocks = json::array();
  for (const auto& b : prog.blocks)
    blocks.push_back(json{{"id", b.id},
                          {"page", b.page},
                          {"lines", json::array({b.first_line, b.last_line})},
                          {"instr", b.instr_count}});
  json edges = json::array();
  for (const auto& [from, to] : prog.edges)
    edges.push_back(json::array({from, to}));
  json loops = json::array();
  for (const auto& l : prog.loops) {
    json backs = json::array();
    for (const auto& [from, to] : l.back_edges)
      backs.push_back(json::array({from, to}));
    loops.push_back(
        json{{"header", l.header}, {"bound", l.bound}, {"back_edges", backs}});
  }
  return json{{"v", 1},           {"task_id", prog.task_id},
              {"page_count", prog.page_count}, {"blocks", blocks},
              {"edges", edges},   {"entry", prog.entry},
              {"exit", prog.exit}, {"loops", loops}};
}

inline task_program load_program(const std::string& path) {
  return program_from_json(detail::parse_json(read_text_file(path), path));
}

inline void save_program(const std::string& path, const task_program& prog) {
  write_text_file(path, program_to_json(prog).dump(2) + "\n");
}

// ---- task sets -------------------------------------------------------------

// Task set file: {"v":1, "tasks":[{"id","deadline","period","pages","wcet"}]}.
// "wcet" and "pages" are optional (default 1): allocation replaces the WCET
// with table values, and "pages" only matters for color-budget bookkeeping.
inline task_set taskset_from_json(const json& doc) {
  detail::check_version(doc, "task set");
  const auto& tasks = detail::need(doc, "tasks", "task set");
  require(tasks.is_array(), errc::malformed_document, "tasks must be a list");
  task_set out;
  for (const auto& t : tasks) {
    sporadic_task task;
    task.id = detail::as<std::string>(detail::need(t, "id", "task"), "task id");
    task.deadline = detail::as<std::int64_t>(
        detail::need(t, "deadline", "task"), "deadline");
    task.period =
        detail::as<std::int64_t>(detail::need(t, "period", "task"), "period");
    if (t.contains("wcet"))
      task.wcet = detail::as<std::int64_t>(t.at("wcet"), "wcet");
    if (t.contains("pages"))
      task.pages = detail::as<int>(t.at("pages"), "pages");
    out.push_back(std::move(task));
  }
  validate(out);
  return out;
}

inline json taskset_to_json(const task_set& tasks) {
  json list = json::array();
  for (const auto& t : tasks)
    list.push_back(json{{"id", t.id},
                        {"wcet", t.wcet},
                        {"deadline", t.deadline},
                        {"period", t.period},
                        {"pages", t.pages}});
  return json{{"v", 1}, {"tasks", list}};
}

inline task_set load_taskset(const std::string& path) {
  return taskset_from_json(detail::parse_json(read_text_file(path), path));
}

// ---- sweep config ----------------------------------------------------------

// Mirrors sweep_config; every field is optional and falls back to the
// defaults (in particular, omitting "programs" selects the built-in eight
// synthetic workloads).
inline sweep_config sweep_config_from_json(const json& doc) {
  detail::check_version(doc, "sweep config");
  require(doc.is_object(), errc::malformed_document,
          "sweep config must be an object");
  sweep_config cfg;
  if (doc.contains("programs")) {
    const auto& programs = doc.at("programs");
    require(programs.is_array(), errc::malformed_document,
            "programs must be a list");
    for (const auto& p : programs) cfg.programs.push_back(program_from_json(p));
  }
  if (doc.contains("cache")) cfg.cache = cache_config_from_json(doc.at("cache"));
  if (doc.contains("u_grid")) {
    const auto& grid = doc.at("u_grid");
    cfg.u_grid.min =
        detail::as<double>(detail::need(grid, "min", "u_grid"), "u min");
    cfg.u_grid.max =
        detail::as<double>(detail::need(grid, "max", "u_grid"), "u max");
    cfg.u_grid.step =
        detail::as<double>(detail::need(grid, "step", "u_grid"), "u step");
  }
  if (doc.contains("samples_per_point"))
    cfg.samples_per_point =
        detail::as<int>(doc.at("samples_per_point"), "samples_per_point");
  if (doc.contains("deadline_mode"))
    cfg.deadlines = parse_deadline_mode(
        detail::as<std::string>(doc.at("deadline_mode"), "deadline_mode"));
  if (doc.contains("master_seed"))
    cfg.master_seed =
        detail::as<std::uint64_t>(doc.at("master_seed"), "master_seed");
  cfg.u_grid.points();  // validates the grid
  return cfg;
}

inline sweep_config load_sweep_config(const std::string& path) {
  return sweep_config_from_json(detail::parse_json(read_text_file(path), path));
}

// ---- allocation result -----------------------------------------------------

inline json allocation_to_json(const allocation& alloc,
                               const std::vector<std::string>& task_ids) {
  json colors = json::object();
  for (std::size_t i = 0; i < alloc.colors.size() && i < task_ids.size(); ++i)
    colors[task_ids[i]] = alloc.colors[i];
  return json{{"feasible", alloc.feasible},
              {"colors", colors},
              {"total_colors", alloc.total_colors}};
}

// ---- CSV artifacts ---------------------------------------------------------

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  for (const char c : line) {
    if (c == ',') {
      cells.push_back(cell);
      cell.clear();
    } else if (c != '\r') {
      cell.push_back(c);
    }
  }
  cells.push_back(cell);
  return cells;
}

inline std::vector<std::vector<std::string>> parse_csv(
    const std::string& text, const std::string& expected_header,
    const std::string& what) {
  std::istringstream in(text);
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), errc::malformed_document,
          what + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  require(line == expected_header, errc::malformed_document,
          what + ": expected header \"" + expected_header + "\"");
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    rows.push_back(split_csv_line(line));
  }
  return rows;
}

inline std::int64_t parse_int(const std::string& cell, const std::string& what) {
  try {
    std::size_t used = 0;
    const long long value = std::stoll(cell, &used);
    require(used == cell.size(), errc::malformed_document,
            what + ": bad integer \"" + cell + "\"");
    return value;
  } catch (const error&) {
    throw;
  } catch (const std::exception&) {
    fail(errc::malformed_document, what + ": bad integer \"" + cell + "\"");
  }
}

inline double parse_double(const std::string& cell, const std::string& what) {
  try {
    std::size_t used = 0;
    const double value = std::stod(cell, &used);
    require(used == cell.size(), errc::malformed_document,
            what + ": bad number \"" + cell + "\"");
    return value;
  } catch (const error&) {
    throw;
  } catch (const std::exception&) {
    fail(errc::malformed_document, what + ": bad number \"" + cell + "\"");
  }
}

}  // namespace detail

inline constexpr const char* wcet_table_csv_header =
    "task,heuristic,colors,wcet_cycles";

inline std::string wcet_table_to_csv(const wcet_table& table) {
  std::string out = wcet_table_csv_header;
  out.push_back('\n');
  for (std::size_t j = 1; j <= table.entries.size(); ++j) {
    out += table.task_id;
    out.push_back(',');
    out += heuristic_name(table.method);
    out.push_back(',');
    out += std::to_string(j);
    out.push_back(',');
    out += std::to_string(table.at(static_cast<int>(j)));
    out.push_back('\n');
  }
  return out;
}

// Read one or more tables back from CSV text. Colorings are not part of the
// CSV, so the parsed entries carry WCET values only — exactly what the
// allocator needs. Rows of one task must be contiguous in j starting at 1.
inline std::vector<wcet_table> wcet_tables_from_csv(const std::string& text,
                                                    const std::string& what) {
  const auto rows = detail::parse_csv(text, wcet_table_csv_header, what);
  std::vector<wcet_table> tables;
  std::map<std::string, std::size_t> index;
  for (const auto& cells : rows) {
    require(cells.size() == 4, errc::malformed_document,
            what + ": expected 4 columns");
    const auto& task = cells[0];
    const auto method = parse_heuristic(cells[1]);
    const auto colors = detail::parse_int(cells[2], what);
    const auto cycles = detail::parse_int(cells[3], what);
    auto [it, fresh] = index.emplace(task, tables.size());
    if (fresh) {
      tables.push_back({});
      tables.back().task_id = task;
      tables.back().method = method;
    }
    auto& table = tables[it->second];
    require(table.method == method, errc::malformed_document,
            what + ": task " + task + " mixes heuristics");
    require(colors == static_cast<std::int64_t>(table.entries.size()) + 1,
            errc::malformed_document,
            what + ": colors column of " + task +
                " must count up from 1 without gaps");
    require(cycles >= 1, errc::malformed_document,
            what + ": wcet_cycles must be positive");
    wcet_entry entry;
    entry.wcet_cycles = cycles;
    table.entries.push_back(std::move(entry));
  }
  require(!tables.empty(), errc::malformed_document, what + ": no table rows");
  return tables;
}

inline constexpr const char* coloring_csv_header =
    "task,heuristic,colors,page,color";

inline std::string coloring_dump_to_csv(const wcet_table& table) {
  std::string out = coloring_csv_header;
  out.push_back('\n');
  for (std::size_t j = 1; j <= table.entries.size(); ++j) {
    const auto& col = table.entries[j - 1].realized;
    for (int page = 0; page < col.pages(); ++page) {
      out += table.task_id;
      out.push_back(',');
      out += heuristic_name(table.method);
      out.push_back(',');
      out += std::to_string(j);
      out.push_back(',');
      out += std::to_string(page);
      out.push_back(',');
      out += std::to_string(col[page]);
      out.push_back('\n');
    }
  }
  return out;
}

inline constexpr const char* classes_csv_header = "block,line,class,scope";

inline std::string classes_dump_to_csv(const program_index& idx,
                                       const classification& classes) {
  std::string out = classes_csv_header;
  out.push_back('\n');
  for (int b = 0; b < idx.n_blocks(); ++b) {
    const auto& bb = idx.block(b);
    for (int line = bb.first_line; line <= bb.last_line; ++line) {
      const auto& lc = classes.of_line(idx, b, line);
      out += bb.id;
      out.push_back(',');
      out += std::to_string(line);
      out.push_back(',');
      out += access_class_name(lc.cls);
      out.push_back(',');
      out += lc.cls == access_class::first_miss
                 ? idx.block(idx.loops()[static_cast<std::size_t>(lc.scope)]
                                 .header)
                       .id
                 : std::string("-");
      out.push_back('\n');
    }
  }
  return out;
}

inline constexpr const char* sweep_csv_header =
    "utilization,method,schedulable_pct,avg_colors_used";

inline std::string sweep_rows_to_csv(const std::vector<sweep_row>& rows) {
  std::string out = sweep_csv_header;
  out.push_back('\n');
  for (const auto& row : rows) {
    out += format_number(row.utilization);
    out.push_back(',');
    out += row.method;
    out.push_back(',');
    out += format_number(row.schedulable_pct);
    out.push_back(',');
    if (row.avg_colors_used) out += format_number(*row.avg_colors_used);
    out.push_back('\n');
  }
  return out;
}

inline std::vector<sweep_row> sweep_rows_from_csv(const std::string& text,
                                                  const std::string& what) {
  const auto cells_rows = detail::parse_csv(text, sweep_csv_header, what);
  require(!cells_rows.empty(), errc::malformed_document,
          what + ": no data rows");
  std::vector<sweep_row> rows;
  for (const auto& cells : cells_rows) {
    require(cells.size() == 4, errc::malformed_document,
            what + ": expected 4 columns");
    sweep_row row;
    row.utilization = detail::parse_double(cells[0], what);
    row.method = cells[1];
    require(!row.method.empty(), errc::malformed_document,
            what + ": empty method name");
    row.schedulable_pct = detail::parse_double(cells[2], what);
    if (!cells[3].empty())
      row.avg_colors_used = detail::parse_double(cells[3], what);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace colorsched
