#pragma once

#include <algorithm>
#include <cstdio>
#include <string>
#include <vector>

#include "colorsched/errors.hpp"
#include "colorsched/sweep.hpp"

namespace colorsched {

enum class plot_metric { pct, colors };

inline plot_metric parse_plot_metric(const std::string& name) {
  if (name == "pct") return plot_metric::pct;
  if (name == "colors") return plot_metric::colors;
  fail(errc::bad_config, "unknown metric: " + name);
}

namespace detail {

inline std::string svg_num(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline std::string svg_label(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

inline const char* series_color(const std::string& method, std::size_t ord) {
  if (method == "ilp_fair") return "#1f77b4";
  if (method == "ilp_federated") return "#2ca02c";
  if (method == "ilp_random") return "#ff7f0e";
  if (method == "random_alloc") return "#d62728";
  if (method == "infinite_cache") return "#9467bd";
  static const char* palette[] = {"#8c564b", "#e377c2", "#7f7f7f", "#bcbd22"};
  return palette[ord % 4];
}

}  // namespace detail

// Render sweep rows as a standalone SVG: one polyline per method, x =
// utilization, y = the chosen metric. Rows without a value for the metric
// (infinite_cache has no color usage; points with zero feasible samples have
// no average) are simply left out of their series.
inline std::string render_sweep_svg(const std::vector<sweep_row>& rows,
                                    plot_metric metric, int max_colors = 16) {
  require(!rows.empty(), errc::bad_config, "no rows to plot");
  require(max_colors >= 1, errc::bad_config, "max_colors must be >= 1");

  std::vector<std::string> methods;
  for (const auto& row : rows)
    if (std::find(methods.begin(), methods.end(), row.method) == methods.end())
      methods.push_back(row.method);

  double x_min = rows.front().utilization, x_max = rows.front().utilization;
  for (const auto& row : rows) {
    x_min = std::min(x_min, row.utilization);
    x_max = std::max(x_max, row.utilization);
  }
  if (x_max <= x_min) x_max = x_min + 1.0;
  const double y_min = 0.0;
  const double y_max =
      metric == plot_metric::pct ? 100.0 : static_cast<double>(max_colors);

  const double left = 64, right = 200, top = 24, bottom = 48;
  const double width = 820, height = 480;
  const double plot_w = width - left - right, plot_h = height - top - bottom;
  auto sx = [&](double u) { return left + (u - x_min) / (x_max - x_min) * plot_w; };
  auto sy = [&](double v) {
    const double clamped = std::min(std::max(v, y_min), y_max);
    return top + (1.0 - (clamped - y_min) / (y_max - y_min)) * plot_h;
  };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
         detail::svg_num(width) + "\" height=\"" + detail::svg_num(height) +
         "\" viewBox=\"0 0 " + detail::svg_num(width) + " " +
         detail::svg_num(height) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  // Axes with five evenly spaced labeled ticks each.
  svg += "<g stroke=\"black\" stroke-width=\"1\">\n";
  svg += "<line x1=\"" + detail::svg_num(left) + "\" y1=\"" +
         detail::svg_num(top + plot_h) + "\" x2=\"" +
         detail::svg_num(left + plot_w) + "\" y2=\"" +
         detail::svg_num(top + plot_h) + "\"/>\n";
  svg += "<line x1=\"" + detail::svg_num(left) + "\" y1=\"" +
         detail::svg_num(top) + "\" x2=\"" + detail::svg_num(left) +
         "\" y2=\"" + detail::svg_num(top + plot_h) + "\"/>\n";
  svg += "</g>\n";
  svg += "<g font-family=\"sans-serif\" font-size=\"12\" fill=\"black\">\n";
  for (int tick = 0; tick <= 4; ++tick) {
    const double u = x_min + (x_max - x_min) * tick / 4.0;
    const double v = y_min + (y_max - y_min) * tick / 4.0;
    svg += "<line stroke=\"black\" x1=\"" + detail::svg_num(sx(u)) +
           "\" y1=\"" + detail::svg_num(top + plot_h) + "\" x2=\"" +
           detail::svg_num(sx(u)) + "\" y2=\"" +
           detail::svg_num(top + plot_h + 5) + "\"/>\n";
    svg += "<text text-anchor=\"middle\" x=\"" + detail::svg_num(sx(u)) +
           "\" y=\"" + detail::svg_num(top + plot_h + 18) + "\">" +
           detail::svg_label(u) + "</text>\n";
    svg += "<line stroke=\"black\" x1=\"" + detail::svg_num(left - 5) +
           "\" y1=\"" + detail::svg_num(sy(v)) + "\" x2=\"" +
           detail::svg_num(left) + "\" y2=\"" + detail::svg_num(sy(v)) +
           "\"/>\n";
    svg += "<text text-anchor=\"end\" x=\"" + detail::svg_num(left - 8) +
           "\" y=\"" + detail::svg_num(sy(v) + 4) + "\">" +
           detail::svg_label(v) + "</text>\n";
  }
  svg += "<text text-anchor=\"middle\" x=\"" +
         detail::svg_num(left + plot_w / 2) + "\" y=\"" +
         detail::svg_num(height - 8) + "\">utilization</text>\n";
  svg += "<text text-anchor=\"middle\" transform=\"rotate(-90 16 " +
         detail::svg_num(top + plot_h / 2) + ")\" x=\"16\" y=\"" +
         detail::svg_num(top + plot_h / 2) + "\">" +
         (metric == plot_metric::pct ? "schedulable_pct" : "avg_colors_used") +
         std::string("</text>\n");
  svg += "</g>\n";

  // One polyline per method, legend entry alongside.
  for (std::size_t m = 0; m < methods.size(); ++m) {
    const auto& method = methods[m];
    std::vector<std::pair<double, double>> pts;
    for (const auto& row : rows) {
      if (row.method != method) continue;
      if (metric == plot_metric::pct) {
        pts.emplace_back(row.utilization, row.schedulable_pct);
      } else if (row.avg_colors_used) {
        pts.emplace_back(row.utilization, *row.avg_colors_used);
      }
    }
    std::stable_sort(pts.begin(), pts.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    const char* color = detail::series_color(method, m);
    if (!pts.empty()) {
      std::string points;
      for (const auto& [u, v] : pts) {
        if (!points.empty()) points.push_back(' ');
        points += detail::svg_num(sx(u)) + "," + detail::svg_num(sy(v));
      }
      svg += "<polyline fill=\"none\" stroke=\"";
      svg += color;
      svg += "\" stroke-width=\"1.5\" points=\"" + points + "\"/>\n";
    }
    const double ly = top + 16 + 20 * static_cast<double>(m);
    svg += "<rect x=\"" + detail::svg_num(left + plot_w + 16) + "\" y=\"" +
           detail::svg_num(ly - 9) + "\" width=\"18\" height=\"4\" fill=\"";
    svg += color;
    svg += "\"/>\n";
    svg += "<text font-family=\"sans-serif\" font-size=\"12\" x=\"" +
           detail::svg_num(left + plot_w + 40) + "\" y=\"" +
           detail::svg_num(ly) + "\">" + method + "</text>\n";
  }

  svg += "</svg>\n";
  return svg;
}

}  // namespace colorsched
