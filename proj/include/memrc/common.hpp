#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <fmt/format.h>

namespace memrc {

// Error taxonomy. The CLI maps each family to an exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration or parameter combination (exit code 1).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Bad numeric input to an otherwise valid call, e.g. NaN drive voltage.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Malformed or missing data on disk (exit code 2).
class DataError : public Error {
 public:
  using Error::Error;
};

/// File format violation; carries the byte offset where parsing failed.
class ParseError : public DataError {
 public:
  ParseError(const std::string& what, std::uint64_t offset)
      : DataError(fmt::format("{} (at byte offset {})", what, offset)), offset_(offset) {}
  std::uint64_t offset() const noexcept { return offset_; }

 private:
  std::uint64_t offset_;
};

/// Diverged training or non-finite simulation result (exit code 3).
class NumericalError : public Error {
 public:
  using Error::Error;
};

inline void require(bool cond, std::string_view msg) {
  if (!cond) throw ConfigError(std::string(msg));
}

inline void require_finite(double x, std::string_view what) {
  if (!std::isfinite(x)) throw InputError(fmt::format("{} must be finite, got {}", what, x));
}

/// Dense row-major matrix of doubles.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }
  std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }

  bool operator==(const Matrix&) const = default;
};

/// Shortest-round-trip-safe decimal with at least 12 significant digits.
inline std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return fmt::format("{:.12g}", x);
}

/// Writes `contents` to `path` through a sibling temp file and a rename.
inline void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open " + tmp.string() + " for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw DataError("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

/// Minimal CSV builder: one header row, then numeric or string cells.
class CsvWriter {
 public:
  explicit CsvWriter(std::initializer_list<std::string_view> header) {
    bool first = true;
    for (auto h : header) {
      if (!first) buf_ += ',';
      buf_ += h;
      first = false;
    }
    buf_ += '\n';
  }
  explicit CsvWriter(const std::vector<std::string>& header) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (i) buf_ += ',';
      buf_ += header[i];
    }
    buf_ += '\n';
  }

  CsvWriter& cell(double x) { return raw(format_number(x)); }
  CsvWriter& cell(std::int64_t x) { return raw(std::to_string(x)); }
  CsvWriter& cell(std::size_t x) { return raw(std::to_string(x)); }
  CsvWriter& cell(int x) { return raw(std::to_string(x)); }
  CsvWriter& cell(std::string_view s) { return raw(s); }
  CsvWriter& cell(const char* s) { return raw(s); }

  void end_row() {
    buf_ += '\n';
    fresh_ = true;
  }

  const std::string& str() const { return buf_; }
  void save(const std::filesystem::path& path) const { write_file_atomic(path, buf_); }

 private:
  CsvWriter& raw(std::string_view s) {
    if (!fresh_) buf_ += ',';
    buf_ += s;
    fresh_ = false;
    return *this;
  }

  std::string buf_;
  bool fresh_ = true;
};

/// Parsed CSV with a header row; all cells kept as strings.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    throw ConfigError(fmt::format("column '{}' not found", name));
  }
  std::vector<double> numeric(std::string_view name) const {
    auto c = column(name);
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(c < r.size() ? std::stod(r[c]) : std::nan(""));
    return out;
  }
};

inline std::vector<std::string> split_string(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    auto pos = s.find(sep, start);
    out.emplace_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

inline CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw DataError("empty CSV: " + path.string());
  for (auto& h : split_string(line, ',')) t.header.push_back(trim(h));
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    auto cells = split_string(line, ',');
    for (auto& c : cells) c = trim(c);
    t.rows.push_back(std::move(cells));
  }
  return t;
}

}  // namespace memrc
