#include "tcr/csv.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "tcr/error.hpp"

namespace tcr::csv {

std::string format_double(double v) {
  if (std::isnan(v)) return {};
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

Writer::Writer(const std::filesystem::path& path) : path_(path), out_(path, std::ios::binary) {
  if (!out_) throw InvalidInput("cannot open " + path.string() + " for writing");
}

void Writer::row(const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out_ << ',';
    out_ << fields[i];
  }
  out_ << '\n';
  if (!out_) throw InvalidInput("write failed on " + path_.string());
}

namespace {

std::vector<std::string> split(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    auto comma = line.find(',', start);
    out.emplace_back(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

Table read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  Table t;
  t.source = path;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (lineno == 1 && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    if (line.empty()) continue;
    if (line.find('"') != std::string::npos)
      throw DataError(path.filename().string() + " line " + std::to_string(lineno) + ": quoted fields are not supported");
    auto fields = split(line);
    if (t.header.empty()) {
      t.header = std::move(fields);
      continue;
    }
    if (fields.size() != t.header.size())
      throw DataError(path.filename().string() + " line " + std::to_string(lineno) + ": expected " +
                      std::to_string(t.header.size()) + " fields, found " + std::to_string(fields.size()));
    t.rows.push_back(std::move(fields));
  }
  if (t.header.empty()) throw DataError(path.filename().string() + ": missing header row");
  return t;
}

bool Table::has_column(std::string_view name) const {
  return std::find(header.begin(), header.end(), name) != header.end();
}

std::size_t Table::column(std::string_view name) const {
  auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end())
    throw DataError(source.filename().string() + ": missing required column '" + std::string(name) + "'");
  return static_cast<std::size_t>(it - header.begin());
}

int Table::get_int(std::size_t row, std::size_t col) const {
  const auto& s = rows[row][col];
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
    throw DataError(source.filename().string() + " line " + std::to_string(row + 2) + ": column '" + header[col] +
                    "' is not an integer: '" + s + "'");
  return v;
}

double Table::get_double(std::size_t row, std::size_t col) const {
  const auto& s = rows[row][col];
  if (s.empty() || s == "NA" || s == "nan") return std::nan("");
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw DataError(source.filename().string() + " line " + std::to_string(row + 2) + ": column '" + header[col] +
                    "' is not a number: '" + s + "'");
  return v;
}

}  // namespace tcr::csv
