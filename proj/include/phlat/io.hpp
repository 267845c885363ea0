#pragma once

#include <charconv>
#include <concepts>
#include <cstddef>
#include <ctime>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "phlat/common.hpp"

namespace phlat {

/// Fixed 17-significant-digit decimal form.  Matches printf "%.17g" in the
/// C locale but is locale-independent, and 17 digits round-trip every finite
/// double exactly, so artifacts are byte-reproducible and lossless.
inline std::string format_float(double x) {
  char buf[40];
  const auto res =
      std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

/// RFC 4180 cell escaping: quote only when the payload needs it.
inline std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string quoted;
  quoted.reserve(s.size() + 2);
  quoted += '"';
  for (const char ch : s) {
    if (ch == '"') quoted += '"';
    quoted += ch;
  }
  quoted += '"';
  return quoted;
}

inline std::string csv_cell(double v) { return format_float(v); }
inline std::string csv_cell(const std::string& s) { return csv_quote(s); }
inline std::string csv_cell(const char* s) { return csv_quote(s); }
template <std::integral T>
std::string csv_cell(T v) {
  return std::to_string(v);
}

inline std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return std::string(buf);
}

/// Ordered key/value block stamped into every artifact: the effective
/// (post-override) parameter set plus command identity.  Reusing a key
/// overwrites in place, so insertion order is stable under overrides.
class RunHeader {
 public:
  explicit RunHeader(std::string command)
      : command_(std::move(command)), timestamp_(utc_timestamp()) {}

  void set(const std::string& key, std::string value) {
    for (auto& kv : entries_) {
      if (kv.first == key) {
        kv.second = std::move(value);
        return;
      }
    }
    entries_.emplace_back(key, std::move(value));
  }
  void set(const std::string& key, double value) { set(key, format_float(value)); }
  void set(const std::string& key, const char* value) { set(key, std::string(value)); }
  template <std::integral T>
  void set(const std::string& key, T value) {
    set(key, std::to_string(value));
  }

  const std::string& command() const { return command_; }
  const std::string& timestamp() const { return timestamp_; }
  const std::vector<std::pair<std::string, std::string>>& entries() const {
    return entries_;
  }

 private:
  std::string command_;
  std::string timestamp_;
  std::vector<std::pair<std::string, std::string>> entries_;
};

/// Streaming CSV artifact writer.  Layout:
///   # phlat-csv <schema-version>
///   # command: <subcommand>
///   # code-version: <version>
///   # timestamp: <ISO-8601 UTC>
///   # <key>: <value>                 one line per header entry
///   col,col,...                      then one data row per line
/// The timestamp is the only line that may differ between identical runs;
/// everything else is a deterministic function of the configuration.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const RunHeader& header,
            std::vector<std::string> columns)
      : path_(path), out_(path), columns_(std::move(columns)) {
    if (!out_) throw config_error("cannot open output file: " + path_);
    if (columns_.empty()) throw config_error("csv needs at least one column");
    out_ << "# phlat-csv " << csv_schema_version << '\n';
    out_ << "# command: " << header.command() << '\n';
    out_ << "# code-version: " << code_version << '\n';
    out_ << "# timestamp: " << header.timestamp() << '\n';
    for (const auto& [key, value] : header.entries())
      out_ << "# " << key << ": " << value << '\n';
    for (std::size_t c = 0; c < columns_.size(); ++c) {
      if (c) out_ << ',';
      out_ << csv_quote(columns_[c]);
    }
    out_ << '\n';
  }

  template <typename... Cells>
  void row(const Cells&... cells) {
    if (sizeof...(Cells) != columns_.size())
      throw config_error("csv row width mismatch in " + path_);
    std::size_t c = 0;
    ((out_ << (c++ ? "," : "") << csv_cell(cells)), ...);
    out_ << '\n';
    ++rows_;
  }

  void row(const std::vector<std::string>& cells) {
    if (cells.size() != columns_.size())
      throw config_error("csv row width mismatch in " + path_);
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (c) out_ << ',';
      out_ << csv_quote(cells[c]);
    }
    out_ << '\n';
    ++rows_;
  }

  std::size_t rows() const { return rows_; }

  /// Flush and surface any write failure (full disk, revoked path).
  void close() {
    out_.close();
    if (!out_) throw config_error("write failed: " + path_);
  }

 private:
  std::string path_;
  std::ofstream out_;
  std::vector<std::string> columns_;
  std::size_t rows_ = 0;
};

}  // namespace phlat
