#include "copa/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "copa/stats.hpp"

namespace copa {

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", x);
  return buf;
}

struct SeriesPoint {
  double x, mean, se;
  int reps;
};

}  // namespace

std::string render_chart(const CsvTable& table, const ChartOptions& options) {
  const int metric_col = table.column(options.metric);
  if (metric_col < 0) {
    std::string cols;
    for (const auto& h : table.header) cols += (cols.empty() ? "" : ", ") + h;
    throw std::invalid_argument("unknown metric '" + options.metric +
                                "'; available columns: " + cols);
  }
  const int x_col = table.column(options.x_column);
  if (x_col < 0)
    throw std::invalid_argument("missing x column '" + options.x_column + "'");
  const int group_col = table.column(options.group_by);
  if (group_col < 0)
    throw std::invalid_argument("missing group-by column '" + options.group_by + "'");

  // group -> x -> samples over repetitions
  std::map<std::string, std::map<double, std::vector<double>>> grouped;
  for (const auto& row : table.rows) {
    grouped[row[group_col]][std::stod(row[x_col])].push_back(
        std::stod(row[metric_col]));
  }
  if (grouped.empty()) throw std::invalid_argument("chart input has no rows");

  std::map<std::string, std::vector<SeriesPoint>> series;
  double x_lo = std::numeric_limits<double>::infinity(), x_hi = -x_lo;
  double y_lo = std::numeric_limits<double>::infinity(), y_hi = -y_lo;
  for (const auto& [group, by_x] : grouped) {
    auto& pts = series[group];
    for (const auto& [x, samples] : by_x) {
      const MeanSe ms = mean_and_se(samples);
      pts.push_back({x, ms.mean, ms.se, int(samples.size())});
      x_lo = std::min(x_lo, x);
      x_hi = std::max(x_hi, x);
      y_lo = std::min(y_lo, ms.mean - 2.0 * ms.se);
      y_hi = std::max(y_hi, ms.mean + 2.0 * ms.se);
    }
  }
  if (x_hi <= x_lo) {
    x_lo -= 0.5;
    x_hi += 0.5;
  }
  if (y_hi <= y_lo) {
    y_lo -= 0.5;
    y_hi += 0.5;
  }
  const double y_pad = 0.06 * (y_hi - y_lo);
  y_lo -= y_pad;
  y_hi += y_pad;

  const double ml = 70, mr = 20, mt = 40, mb = 50;
  const double pw = options.width - ml - mr;
  const double ph = options.height - mt - mb;
  auto px = [&](double x) { return ml + (x - x_lo) / (x_hi - x_lo) * pw; };
  auto py = [&](double y) { return mt + (y_hi - y) / (y_hi - y_lo) * ph; };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << options.width
      << "\" height=\"" << options.height << "\" viewBox=\"0 0 " << options.width
      << " " << options.height << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!options.title.empty())
    svg << "<text x=\"" << options.width / 2 << "\" y=\"24\" font-family=\"monospace\""
        << " font-size=\"16\" text-anchor=\"middle\">" << options.title << "</text>\n";

  // Axes with 5 ticks each.
  svg << "<g font-family=\"monospace\" font-size=\"11\" fill=\"black\">\n";
  for (int i = 0; i <= 5; ++i) {
    const double xv = x_lo + (x_hi - x_lo) * i / 5.0;
    const double yv = y_lo + (y_hi - y_lo) * i / 5.0;
    svg << "<line x1=\"" << num(px(xv)) << "\" y1=\"" << num(mt + ph) << "\" x2=\""
        << num(px(xv)) << "\" y2=\"" << num(mt + ph + 5) << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << num(px(xv)) << "\" y=\"" << num(mt + ph + 18)
        << "\" text-anchor=\"middle\">" << num(xv) << "</text>\n";
    svg << "<line x1=\"" << num(ml - 5) << "\" y1=\"" << num(py(yv)) << "\" x2=\""
        << num(ml) << "\" y2=\"" << num(py(yv)) << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << num(ml - 8) << "\" y=\"" << num(py(yv) + 4)
        << "\" text-anchor=\"end\">" << num(yv) << "</text>\n";
  }
  svg << "</g>\n";
  svg << "<rect x=\"" << num(ml) << "\" y=\"" << num(mt) << "\" width=\"" << num(pw)
      << "\" height=\"" << num(ph) << "\" fill=\"none\" stroke=\"black\"/>\n";
  svg << "<text x=\"" << options.width / 2 << "\" y=\"" << options.height - 12
      << "\" font-family=\"monospace\" font-size=\"12\" text-anchor=\"middle\">"
      << options.x_column << "</text>\n";
  svg << "<text x=\"16\" y=\"" << mt + ph / 2
      << "\" font-family=\"monospace\" font-size=\"12\" text-anchor=\"middle\""
      << " transform=\"rotate(-90 16 " << mt + ph / 2 << ")\">" << options.metric
      << "</text>\n";

  int color = 0;
  double legend_y = mt + 14;
  for (const auto& [group, pts] : series) {
    const std::string stroke = kPalette[color % 8];
    // Band first so lines draw on top.
    bool banded = false;
    for (const auto& p : pts)
      if (p.reps > 1 && p.se > 0.0) banded = true;
    if (banded && pts.size() > 1) {
      svg << "<polygon fill=\"" << stroke << "\" fill-opacity=\"0.15\" stroke=\"none\""
          << " points=\"";
      for (const auto& p : pts)
        svg << num(px(p.x)) << "," << num(py(p.mean + 2.0 * p.se)) << " ";
      for (auto it = pts.rbegin(); it != pts.rend(); ++it)
        svg << num(px(it->x)) << "," << num(py(it->mean - 2.0 * it->se)) << " ";
      svg << "\"/>\n";
    }
    if (pts.size() > 1) {
      svg << "<polyline fill=\"none\" stroke=\"" << stroke
          << "\" stroke-width=\"1.5\" points=\"";
      for (const auto& p : pts) svg << num(px(p.x)) << "," << num(py(p.mean)) << " ";
      svg << "\"/>\n";
    }
    for (const auto& p : pts)
      svg << "<circle cx=\"" << num(px(p.x)) << "\" cy=\"" << num(py(p.mean))
          << "\" r=\"2.5\" fill=\"" << stroke << "\"/>\n";
    svg << "<rect x=\"" << num(ml + pw - 150) << "\" y=\"" << num(legend_y - 9)
        << "\" width=\"12\" height=\"12\" fill=\"" << stroke << "\"/>\n";
    svg << "<text x=\"" << num(ml + pw - 132) << "\" y=\"" << num(legend_y + 1)
        << "\" font-family=\"monospace\" font-size=\"12\">" << group << "</text>\n";
    legend_y += 18;
    ++color;
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace copa
