#include "precis/csv.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace precis {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  fields.push_back(cur);
  return fields;
}

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

bool parse_number(const std::string& field, double* out) {
  std::string t = trim(field);
  if (t.empty()) return false;
  errno = 0;
  char* end = nullptr;
  double v = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size() || errno == ERANGE) return false;
  *out = v;
  return true;
}

}  // namespace

CsvTable parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    rows.push_back(split_fields(line));
  }
  if (rows.empty()) throw ParseError("csv: no data rows");

  CsvTable table;
  size_t start = 0;
  double tmp;
  bool first_numeric = true;
  for (const auto& f : rows[0]) {
    if (!parse_number(f, &tmp)) {
      first_numeric = false;
      break;
    }
  }
  if (!first_numeric) {
    for (const auto& f : rows[0]) table.header.push_back(trim(f));
    start = 1;
    if (rows.size() == 1) throw ParseError("csv: header row with no data");
  }

  const size_t ncols = rows[start].size();
  const size_t nrows = rows.size() - start;
  table.values.resize(static_cast<Eigen::Index>(nrows), static_cast<Eigen::Index>(ncols));
  for (size_t r = 0; r < nrows; ++r) {
    const auto& fields = rows[start + r];
    if (fields.size() != ncols) {
      throw ParseError("csv: ragged row " + std::to_string(r + start + 1) + " (" +
                       std::to_string(fields.size()) + " fields, expected " +
                       std::to_string(ncols) + ")");
    }
    for (size_t c = 0; c < ncols; ++c) {
      double v;
      if (!parse_number(fields[c], &v)) {
        throw ParseError("csv: non-numeric field '" + trim(fields[c]) + "' at row " +
                         std::to_string(r + start + 1));
      }
      table.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v;
    }
  }
  return table;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str());
}

std::string format_double(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", digits, v);
  return buf;
}

void write_matrix_csv(const std::string& path, const Matrix& m, int digits) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot open file for writing: " + path);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_double(m(i, j), digits);
    }
    out << '\n';
  }
  if (!out) throw ParseError("write failed: " + path);
}

void write_table_csv(const std::string& path, const std::vector<std::string>& header,
                     const std::vector<std::vector<std::string>>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot open file for writing: " + path);
  for (size_t j = 0; j < header.size(); ++j) {
    if (j) out << ',';
    out << header[j];
  }
  out << '\n';
  for (const auto& row : rows) {
    for (size_t j = 0; j < row.size(); ++j) {
      if (j) out << ',';
      out << row[j];
    }
    out << '\n';
  }
  if (!out) throw ParseError("write failed: " + path);
}

}  // namespace precis
