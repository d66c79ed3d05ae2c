#pragma once

#include <cctype>
#include <charconv>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "rulekit/dataset.hpp"

namespace rulekit {

class ParseError : public std::runtime_error {
public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

private:
  std::size_t line_;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

inline bool iequals(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (std::tolower(static_cast<unsigned char>(a[i])) !=
        std::tolower(static_cast<unsigned char>(b[i])))
      return false;
  return true;
}

inline bool parse_real(std::string_view s, double& out) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);  // from_chars rejects '+'
  if (s.empty()) return false;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc{} && ptr == last;
}

// Reads a possibly quoted token starting at pos; advances pos past it.
// Quotes may be ' or "; backslash escapes the next character.
inline std::string read_token(std::string_view s, std::size_t& pos, std::string_view stoppers,
                              std::size_t line) {
  while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t')) ++pos;
  std::string out;
  if (pos < s.size() && (s[pos] == '\'' || s[pos] == '"')) {
    char quote = s[pos++];
    bool closed = false;
    while (pos < s.size()) {
      char c = s[pos++];
      if (c == '\\' && pos < s.size()) {
        out.push_back(s[pos++]);
      } else if (c == quote) {
        closed = true;
        break;
      } else {
        out.push_back(c);
      }
    }
    if (!closed) throw ParseError("unterminated quoted token", line);
    return out;
  }
  while (pos < s.size() && stoppers.find(s[pos]) == std::string_view::npos) out.push_back(s[pos++]);
  return std::string(trim(out));
}

// Splits a data row on commas, honoring quotes. ARFF and CSV cell syntax.
inline std::vector<std::string> split_row(std::string_view s, std::size_t line) {
  std::vector<std::string> cells;
  std::size_t pos = 0;
  while (true) {
    cells.push_back(read_token(s, pos, ",", line));
    while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t')) ++pos;
    if (pos >= s.size()) break;
    if (s[pos] != ',') throw ParseError("unexpected character after value", line);
    ++pos;
  }
  return cells;
}

inline bool needs_quoting(std::string_view s) {
  if (s.empty()) return true;
  for (char c : s)
    if (c == ' ' || c == '\t' || c == ',' || c == '\'' || c == '"' || c == '{' || c == '}' ||
        c == '%')
      return true;
  return false;
}

inline std::string quote_if_needed(std::string_view s) {
  if (!needs_quoting(s)) return std::string(s);
  std::string out = "'";
  for (char c : s) {
    if (c == '\'' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  out.push_back('\'');
  return out;
}

inline std::string format_double(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

}  // namespace detail

/// Parses the ARFF subset used for input data: @relation, @attribute
/// declarations (nominal level lists or numeric/real), @data with CSV rows,
/// '?' for missing. Role assignment is left to set_roles.
inline DataSet parse_arff(std::string_view text) {
  std::vector<Attribute> attributes;
  std::vector<double> cells;
  std::string relation;
  bool saw_relation = false;
  bool in_data = false;
  std::size_t line_no = 0;
  std::size_t start = 0;

  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    std::string_view raw = text.substr(
        start, end == std::string_view::npos ? text.size() - start : end - start);
    start = end == std::string_view::npos ? text.size() + 1 : end + 1;
    ++line_no;
    if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
    std::string_view stripped = detail::trim(raw);
    if (stripped.empty() || stripped.front() == '%') continue;

    if (!in_data && stripped.front() == '@') {
      std::size_t pos = 1;
      std::string keyword = detail::read_token(stripped, pos, " \t", line_no);
      if (detail::iequals(keyword, "relation")) {
        relation = detail::read_token(stripped, pos, " \t", line_no);
        saw_relation = true;
      } else if (detail::iequals(keyword, "attribute")) {
        Attribute attr;
        attr.name = detail::read_token(stripped, pos, " \t", line_no);
        if (attr.name.empty()) throw ParseError("attribute declaration without a name", line_no);
        while (pos < stripped.size() && (stripped[pos] == ' ' || stripped[pos] == '\t')) ++pos;
        if (pos >= stripped.size())
          throw ParseError("attribute " + attr.name + " has no type", line_no);
        if (stripped[pos] == '{') {
          ++pos;
          attr.kind = AttributeKind::nominal;
          while (true) {
            std::string level = detail::read_token(stripped, pos, ",}", line_no);
            while (pos < stripped.size() && (stripped[pos] == ' ' || stripped[pos] == '\t')) ++pos;
            if (pos >= stripped.size())
              throw ParseError("unterminated level list for attribute " + attr.name, line_no);
            if (level.empty()) throw ParseError("empty nominal level", line_no);
            if (attr.level_index(level) >= 0)
              throw ParseError("duplicate nominal level '" + level + "'", line_no);
            attr.levels.push_back(std::move(level));
            if (stripped[pos] == '}') break;
            ++pos;  // skip comma
          }
        } else {
          std::string type = detail::read_token(stripped, pos, " \t", line_no);
          if (detail::iequals(type, "numeric") || detail::iequals(type, "real") ||
              detail::iequals(type, "integer")) {
            attr.kind = AttributeKind::numeric;
          } else {
            throw ParseError("unsupported attribute type '" + type + "'", line_no);
          }
        }
        attributes.push_back(std::move(attr));
      } else if (detail::iequals(keyword, "data")) {
        if (attributes.empty()) throw ParseError("@data before any @attribute", line_no);
        in_data = true;
      } else {
        throw ParseError("unknown declaration @" + keyword, line_no);
      }
      continue;
    }

    if (!in_data) throw ParseError("data row before @data", line_no);

    auto values = detail::split_row(stripped, line_no);
    if (values.size() != attributes.size())
      throw ParseError("row has " + std::to_string(values.size()) + " values, expected " +
                           std::to_string(attributes.size()),
                       line_no);
    for (std::size_t c = 0; c < values.size(); ++c) {
      const std::string& v = values[c];
      if (v == "?") {
        cells.push_back(DataSet::missing_cell);
        continue;
      }
      if (attributes[c].kind == AttributeKind::numeric) {
        double num;
        if (!detail::parse_real(v, num))
          throw ParseError("value '" + v + "' is not numeric for attribute " +
                               attributes[c].name,
                           line_no);
        cells.push_back(num);
      } else {
        int idx = attributes[c].level_index(v);
        if (idx < 0)
          throw ParseError("value '" + v + "' is outside the declared levels of attribute " +
                               attributes[c].name,
                           line_no);
        cells.push_back(static_cast<double>(idx));
      }
    }
  }

  if (!saw_relation) throw ParseError("missing @relation declaration", line_no);
  if (!in_data) throw ParseError("missing @data section", line_no);
  return DataSet(std::move(attributes), std::move(cells));
}

/// Writes a DataSet back out as ARFF; parse_arff(write_arff(ds)) == ds.
inline void write_arff(const DataSet& ds, std::ostream& os,
                       std::string_view relation = "data") {
  os << "@relation " << detail::quote_if_needed(relation) << "\n";
  for (const auto& a : ds.attributes()) {
    os << "@attribute " << detail::quote_if_needed(a.name) << ' ';
    if (a.kind == AttributeKind::numeric) {
      os << "numeric";
    } else {
      os << '{';
      for (std::size_t i = 0; i < a.levels.size(); ++i) {
        if (i) os << ',';
        os << detail::quote_if_needed(a.levels[i]);
      }
      os << '}';
    }
    os << "\n";
  }
  os << "@data\n";
  for (std::size_t r = 0; r < ds.row_count(); ++r) {
    for (std::size_t c = 0; c < ds.attribute_count(); ++c) {
      if (c) os << ',';
      if (ds.is_missing(r, c)) {
        os << '?';
      } else if (ds.attribute(c).kind == AttributeKind::numeric) {
        os << detail::format_double(ds.cell(r, c));
      } else {
        os << detail::quote_if_needed(ds.level_at(r, c));
      }
    }
    os << "\n";
  }
}

inline std::string write_arff_string(const DataSet& ds, std::string_view relation = "data") {
  std::ostringstream os;
  write_arff(ds, os, relation);
  return os.str();
}

}  // namespace rulekit
