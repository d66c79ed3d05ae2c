#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "rulekit/arff.hpp"
#include "rulekit/dataset.hpp"

namespace rulekit {

namespace detail {

// RFC-4180 style: fields may be wrapped in double quotes, "" escapes a quote,
// quoted fields may contain commas and newlines are handled by the caller.
inline std::vector<std::string> split_csv_row(std::string_view s, std::size_t line) {
  std::vector<std::string> cells;
  std::size_t pos = 0;
  std::string cur;
  bool done = false;
  while (!done) {
    cur.clear();
    if (pos < s.size() && s[pos] == '"') {
      ++pos;
      bool closed = false;
      while (pos < s.size()) {
        char c = s[pos++];
        if (c == '"') {
          if (pos < s.size() && s[pos] == '"') {
            cur.push_back('"');
            ++pos;
          } else {
            closed = true;
            break;
          }
        } else {
          cur.push_back(c);
        }
      }
      if (!closed) throw ParseError("unterminated quoted field", line);
      if (pos < s.size() && s[pos] != ',')
        throw ParseError("unexpected character after quoted field", line);
    } else {
      while (pos < s.size() && s[pos] != ',') cur.push_back(s[pos++]);
      cur = std::string(trim(cur));
    }
    cells.push_back(cur);
    if (pos >= s.size()) {
      done = true;
    } else {
      ++pos;  // comma
    }
  }
  return cells;
}

}  // namespace detail

/// Parses comma-separated data. Column types are inferred: a column is
/// numeric iff every non-missing cell parses as a real number; otherwise it
/// is nominal with levels in first-appearance order. '?' and empty cells
/// denote missing values.
inline DataSet parse_csv(std::string_view text, bool header) {
  std::vector<std::vector<std::string>> rows;
  std::size_t line_no = 0;
  std::size_t start = 0;
  std::size_t width = 0;
  std::vector<std::string> names;

  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    std::string_view raw = text.substr(
        start, end == std::string_view::npos ? text.size() - start : end - start);
    start = end == std::string_view::npos ? text.size() : end + 1;
    ++line_no;
    if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
    if (detail::trim(raw).empty()) continue;

    auto cells = detail::split_csv_row(raw, line_no);
    if (width == 0) {
      width = cells.size();
      if (header) {
        names = std::move(cells);
        continue;
      }
    }
    if (cells.size() != width)
      throw ParseError("row has " + std::to_string(cells.size()) + " values, expected " +
                           std::to_string(width),
                       line_no);
    rows.push_back(std::move(cells));
  }

  if (width == 0) throw ParseError("empty input", line_no == 0 ? 1 : line_no);
  if (rows.empty()) throw ParseError("no data rows", line_no);

  auto is_missing = [](const std::string& v) { return v.empty() || v == "?"; };

  std::vector<Attribute> attributes(width);
  for (std::size_t c = 0; c < width; ++c) {
    Attribute& a = attributes[c];
    a.name = header ? names[c] : "c" + std::to_string(c + 1);
    bool all_numeric = true;
    for (const auto& row : rows) {
      if (is_missing(row[c])) continue;
      double tmp;
      if (!detail::parse_real(row[c], tmp)) {
        all_numeric = false;
        break;
      }
    }
    a.kind = all_numeric ? AttributeKind::numeric : AttributeKind::nominal;
    if (!all_numeric) {
      for (const auto& row : rows)
        if (!is_missing(row[c]) && a.level_index(row[c]) < 0) a.levels.push_back(row[c]);
    }
  }

  std::vector<double> cells;
  cells.reserve(rows.size() * width);
  for (const auto& row : rows)
    for (std::size_t c = 0; c < width; ++c) {
      if (is_missing(row[c])) {
        cells.push_back(DataSet::missing_cell);
      } else if (attributes[c].kind == AttributeKind::numeric) {
        double v;
        detail::parse_real(row[c], v);
        cells.push_back(v);
      } else {
        cells.push_back(static_cast<double>(attributes[c].level_index(row[c])));
      }
    }

  return DataSet(std::move(attributes), std::move(cells));
}

}  // namespace rulekit
