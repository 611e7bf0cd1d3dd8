#include "wide/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "wide/errors.hpp"

namespace wide {

std::string format_cell(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void emit_table(const Table& table, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path);
  const size_t cols = table.header.size();
  for (size_t c = 0; c < cols; ++c) {
    if (c) out << ',';
    out << table.header[c];
  }
  out << '\n';
  for (const auto& row : table.rows) {
    if (row.size() != cols) {
      throw ShapeMismatch("row width differs from header width");
    }
    for (size_t c = 0; c < cols; ++c) {
      if (c) out << ',';
      out << format_cell(row[c]);
    }
    out << '\n';
  }
  out.flush();
  if (!out) throw IoError("failed writing: " + path);
}

Table read_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open for reading: " + path);
  Table t;
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty table input: " + path);
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) t.header.push_back(cell);
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw IoError("non-numeric cell: " + cell);
      }
    }
    if (row.size() != t.header.size()) {
      throw ShapeMismatch("row width differs from header width");
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

}  // namespace wide
