#pragma once

#include <optional>
#include <string>
#include <vector>

#include "precis/model.hpp"

namespace precis {

// Comma-separated numeric table. A single leading header row is auto-detected
// (any field that does not parse as a number). Ragged rows are an error.
struct CsvTable {
  std::vector<std::string> header;  // empty when no header row present
  Matrix values;
};

CsvTable read_csv(const std::string& path);
CsvTable parse_csv(const std::string& text);

// All numbers are written with 17 significant digits so a read-back is exact.
std::string format_double(double v, int digits = 17);

void write_matrix_csv(const std::string& path, const Matrix& m, int digits = 17);
void write_table_csv(const std::string& path, const std::vector<std::string>& header,
                     const std::vector<std::vector<std::string>>& rows);

}  // namespace precis
