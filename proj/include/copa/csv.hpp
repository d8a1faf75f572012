#pragma once

#include <string>
#include <vector>

namespace copa {

// Cells are preformatted strings; doubles go through format_double so every
// writer emits the same 17-significant-digit representation.
std::string format_double(double x);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const;  // -1 when absent
};

void write_csv(const std::string& path, const CsvTable& table);
CsvTable read_csv(const std::string& path);

}  // namespace copa
