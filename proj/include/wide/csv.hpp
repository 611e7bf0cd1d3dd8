#pragma once

#include <string>
#include <vector>

namespace wide {

// Rectangular table with a header row. Numeric cells are rendered with 17
// significant digits so round-trips are bit-exact; output is deterministic
// (byte-identical across runs on identical data).
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

std::string format_cell(double v);

// Writes comma-separated values, header first, newline-terminated.
// Throws IoError when the file cannot be written. Rows must match the
// header width (ShapeMismatch otherwise).
void emit_table(const Table& table, const std::string& path);

// Reads back a table written by emit_table (used by the round-trip checks).
Table read_table(const std::string& path);

}  // namespace wide
