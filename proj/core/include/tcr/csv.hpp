#pragma once

// Minimal comma-separated table I/O. Fields never contain commas or quotes in
// the formats this library writes, so no quoting is performed; readers reject
// quoted fields rather than guess.

#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace tcr::csv {

// Shortest decimal string that round-trips to the same double. NaN -> "".
std::string format_double(double v);

class Writer {
 public:
  explicit Writer(const std::filesystem::path& path);
  void row(const std::vector<std::string>& fields);
  template <class... Ts>
  void line(const Ts&... fields) {
    row({field(fields)...});
  }

 private:
  static std::string field(const std::string& s) { return s; }
  static std::string field(const char* s) { return s; }
  static std::string field(std::string_view s) { return std::string(s); }
  static std::string field(double v) { return format_double(v); }
  static std::string field(int v) { return std::to_string(v); }
  static std::string field(long v) { return std::to_string(v); }
  static std::string field(unsigned long v) { return std::to_string(v); }
  static std::string field(unsigned long long v) { return std::to_string(v); }
  static std::string field(long long v) { return std::to_string(v); }
  static std::string field(bool v) { return v ? "1" : "0"; }

  std::filesystem::path path_;
  std::ofstream out_;
};

struct Table {
  std::filesystem::path source;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;  // rows[i] has header.size() fields

  // Index of a column; throws DataError naming the column and file.
  std::size_t column(std::string_view name) const;
  bool has_column(std::string_view name) const;

  // Typed cell access. `row` is the 0-based data row; error messages report
  // the 1-based line number in the file (header is line 1).
  int get_int(std::size_t row, std::size_t col) const;
  double get_double(std::size_t row, std::size_t col) const;  // empty -> NaN
  const std::string& get(std::size_t row, std::size_t col) const { return rows[row][col]; }
};

Table read(const std::filesystem::path& path);

}  // namespace tcr::csv
