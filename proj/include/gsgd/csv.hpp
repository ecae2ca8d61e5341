// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace gsgd::harness {

// Round-trip-exact float formatting: 17 significant digits.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

using CsvCell = std::variant<std::string, double, std::int64_t, std::uint64_t>;

inline std::string csv_cell_to_string(const CsvCell& c) {
  if (std::holds_alternative<std::string>(c)) return std::get<std::string>(c);
  if (std::holds_alternative<double>(c)) return format_double(std::get<double>(c));
  if (std::holds_alternative<std::int64_t>(c)) return std::to_string(std::get<std::int64_t>(c));
  return std::to_string(std::get<std::uint64_t>(c));
}

// Minimal CSV emitter: one header row, then data rows; '\n' line ends.
class CsvWriter {
 public:
  explicit CsvWriter(const std::string& path) : out_(path, std::ios::binary) {
    if (!out_) throw std::runtime_error("csv: cannot open " + path);
  }

  void header(std::initializer_list<std::string> names) { write_row_strings(names.begin(), names.end()); }
  void header(const std::vector<std::string>& names) { write_row_strings(names.begin(), names.end()); }

  void row(std::initializer_list<CsvCell> cells) {
    bool first = true;
    for (const auto& c : cells) {
      if (!first) out_ << ',';
      first = false;
      out_ << csv_cell_to_string(c);
    }
    out_ << '\n';
  }

 private:
  template <typename It>
  void write_row_strings(It begin, It end) {
    bool first = true;
    for (It it = begin; it != end; ++it) {
      if (!first) out_ << ',';
      first = false;
      out_ << *it;
    }
    out_ << '\n';
  }

  std::ofstream out_;
};

}  // namespace gsgd::harness
