#pragma once

#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <Eigen/Dense>

#include "cvc/core.hpp"
#include "cvc/error.hpp"

namespace cvc {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t columns() const noexcept { return header.size(); }
};

/// RFC 4180 reader: comma separated, double-quoted fields with "" escapes,
/// CRLF or LF records, first record is the header. Blank trailing lines are
/// ignored. Row numbers in errors are 1-based and count the header.
inline CsvTable parse_csv(std::string_view text) {
  if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);

  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false;
  bool field_started = false;
  std::size_t i = 0;
  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    const bool blank = record.size() == 1 && record[0].empty();
    if (!blank) records.push_back(std::move(record));
    record.clear();
  };

  while (i < text.size()) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          i += 2;
          continue;
        }
        quoted = false;
        ++i;
        if (i < text.size() && text[i] != ',' && text[i] != '\n' && text[i] != '\r')
          throw ParseError(records.size() + 1, record.size() + 1,
                           "unexpected character after closing quote");
        continue;
      }
      field.push_back(c);
      ++i;
      continue;
    }
    if (c == '"' && !field_started && field.empty()) {
      quoted = true;
      field_started = true;
      ++i;
    } else if (c == ',') {
      end_field();
      ++i;
    } else if (c == '\r' || c == '\n') {
      end_record();
      i += (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ? 2 : 1;
    } else {
      field.push_back(c);
      field_started = true;
      ++i;
    }
  }
  if (quoted) throw ParseError(records.size() + 1, record.size() + 1, "unterminated quote");
  if (field_started || !field.empty() || !record.empty()) end_record();

  if (records.empty()) throw DataError("CSV input is empty");
  CsvTable table;
  table.header = std::move(records.front());
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != table.header.size())
      throw ParseError(r + 1, std::min(records[r].size(), table.header.size()) + 1,
                       "expected " + std::to_string(table.header.size()) +
                           " fields, found " + std::to_string(records[r].size()));
    table.rows.push_back(std::move(records[r]));
  }
  return table;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Locale-independent number parsing; surrounding spaces are allowed.
inline double parse_number(std::string_view s, std::size_t row, std::size_t column) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v))
    throw ParseError(row, column, "not a finite number: '" + std::string(s) + "'");
  return v;
}

/// Resolves a response given as a header name or, failing that, a 0-based
/// column index.
inline std::size_t resolve_column(const CsvTable& table, const std::string& key) {
  for (std::size_t c = 0; c < table.header.size(); ++c)
    if (table.header[c] == key) return c;
  std::size_t idx = 0;
  const auto [ptr, ec] = std::from_chars(key.data(), key.data() + key.size(), idx);
  if (!key.empty() && ec == std::errc() && ptr == key.data() + key.size() &&
      idx < table.header.size())
    return idx;
  throw ConfigError("unknown response column '" + key + "'");
}

/// All non-response columns become features.
inline Dataset dataset_from_csv(const CsvTable& table, const std::string& response) {
  const auto yc = resolve_column(table, response);
  if (table.rows.empty()) throw DataError("CSV has a header but no data rows");
  const auto n = static_cast<Eigen::Index>(table.rows.size());
  const auto p = static_cast<Eigen::Index>(table.columns() - 1);
  Eigen::MatrixXd X(n, p);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = table.rows[static_cast<std::size_t>(i)];
    Eigen::Index j = 0;
    for (std::size_t c = 0; c < row.size(); ++c) {
      const double v = parse_number(row[c], static_cast<std::size_t>(i) + 2, c + 1);
      if (c == yc) y(i) = v;
      else X(i, j++) = v;
    }
  }
  Dataset d = Dataset::from(std::move(X), std::move(y));
  for (std::size_t c = 0; c < table.columns(); ++c)
    if (c != yc) d.feature_names.push_back(table.header[c]);
  d.response_name = table.header[yc];
  return d;
}

/// Shortest round-trip decimal representation; never locale dependent.
inline std::string format_number(double v) {
  if (std::isnan(v)) return "NA";
  if (std::isinf(v)) return v > 0 ? "Inf" : "-Inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

/// Minimal RFC 4180 writer with LF line endings.
class CsvWriter {
public:
  explicit CsvWriter(std::ostream& out) : out_(out) {}

  void row(const std::vector<std::string>& fields) {
    for (std::size_t k = 0; k < fields.size(); ++k) {
      if (k) out_ << ',';
      write_field(fields[k]);
    }
    out_ << '\n';
  }

private:
  void write_field(const std::string& f) {
    if (f.find_first_of(",\"\r\n") == std::string::npos) {
      out_ << f;
      return;
    }
    out_ << '"';
    for (char c : f) {
      if (c == '"') out_ << '"';
      out_ << c;
    }
    out_ << '"';
  }

  std::ostream& out_;
};

}  // namespace cvc
