#pragma once

#include <string>

#include "copa/csv.hpp"

namespace copa {

struct ChartOptions {
  std::string metric;          // y column
  std::string group_by = "strategy";
  std::string x_column = "rho";
  std::string repetition_column = "repetition";
  int width = 800;
  int height = 500;
  std::string title;
};

// Renders mean lines (one series per group value) with +-2 standard-error
// bands when repetitions exist. Output bytes are a pure function of the
// input table and options. Throws std::invalid_argument on an unknown
// metric, listing the available columns.
std::string render_chart(const CsvTable& table, const ChartOptions& options);

}  // namespace copa
