#pragma once

#include <charconv>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <string>

#include "rulekit/prediction.hpp"
#include "rulekit/rule.hpp"

namespace rulekit {

// Report number formats are part of the output contract: contingency
// counts with one decimal, weights with two, p-values with two significant
// digits in E-notation, and metrics as shortest round-trip decimals with a
// forced ".0" on integral values.

inline std::string fmt_quad_value(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.1f", v);
  return buf;
}

inline std::string fmt_weight(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline std::string fmt_pvalue(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.1E", v);
  return buf;
}

inline std::string fmt_metric(double v) {
  if (std::isnan(v)) return "NaN";
  if (std::isinf(v)) return v > 0 ? "Infinity" : "-Infinity";
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  std::string out(buf, r.ptr);
  if (out.find('.') == std::string::npos && out.find('e') == std::string::npos &&
      out.find("inf") == std::string::npos)
    out += ".0";
  return out;
}

inline std::string premise_to_string(const std::vector<Condition>& premise) {
  if (premise.empty()) return "TRUE";
  std::string out;
  for (std::size_t i = 0; i < premise.size(); ++i) {
    if (i) out += " AND ";
    out += condition_to_string(premise[i]);
  }
  return out;
}

/// One training-report rule line, e.g.
/// "r1: IF Gender = {male} AND Age = (-inf, 34.5) THEN Future Customer =
/// {yes} (p=176.0, n=0.0, P=473.0, N=527.0, weight=0.69, pval=3.8E-67)".
inline std::string rule_to_string(const Rule& rule, std::size_t one_based_index,
                                  const std::string& label_name) {
  std::string out = "r" + std::to_string(one_based_index) + ": IF " +
                    premise_to_string(rule.premise) + " THEN ";
  switch (rule.consequence.task) {
    case Task::classification:
      out += label_name + " = {" + rule.consequence.class_level + "}";
      break;
    case Task::regression: {
      double v = rule.consequence.value, s = rule.consequence.spread;
      out += label_name + " = {" + fmt_metric(v) + " [" + fmt_metric(v - s) + ", " +
             fmt_metric(v + s) + "]}";
      break;
    }
    case Task::survival: out += "(survival estimate attached)"; break;
  }
  out += " (p=" + fmt_quad_value(rule.stats.p) + ", n=" + fmt_quad_value(rule.stats.n) +
         ", P=" + fmt_quad_value(rule.stats.P) + ", N=" + fmt_quad_value(rule.stats.N) +
         ", weight=" + fmt_weight(rule.weight) + ", pval=" + fmt_pvalue(rule.p_value) + ")";
  return out;
}

/// Coverage tokens: per example the comma-separated 1-based indices of its
/// covering rules with '*' on the max-weight one, examples joined by ';'.
/// An uncovered example contributes the sentinel '-'.
inline std::string coverage_to_string(const std::vector<std::vector<std::size_t>>& covering,
                                      const std::vector<int>& best) {
  std::string out;
  for (std::size_t r = 0; r < covering.size(); ++r) {
    if (r) out += ';';
    if (covering[r].empty()) {
      out += '-';
      continue;
    }
    for (std::size_t i = 0; i < covering[r].size(); ++i) {
      if (i) out += ',';
      out += std::to_string(covering[r][i] + 1);
      if (best[r] >= 0 && static_cast<std::size_t>(best[r]) == covering[r][i]) out += '*';
    }
  }
  return out;
}

namespace detail {

inline void write_report_section(std::ostream& os, const char* heading,
                                 const PerformanceReport& report) {
  os << heading << "\n";
  for (const auto& [key, value] : report.entries) os << key << ": " << fmt_metric(value) << "\n";
  for (const auto& note : report.notes) os << "note: " << note << "\n";
}

}  // namespace detail

/// The full training report: the rule list, the per-example coverage
/// section, model characteristics and training-set performance, with keys
/// spelled exactly as documented.
inline void write_training_report(const RuleSet& rs, const PerformanceReport& train_metrics,
                                  std::ostream& os) {
  std::string label_name;
  for (const auto& attr : rs.schema)
    if (attr.role == AttributeRole::label) label_name = attr.name;

  os << "Rules:\n";
  for (std::size_t i = 0; i < rs.rules.size(); ++i)
    os << rule_to_string(rs.rules[i], i + 1, label_name) << "\n";
  os << "\n";

  os << "Best rules covering examples from training set (1-based):\n";
  os << coverage_to_string(rs.training_coverage, rs.training_best) << "\n\n";

  detail::write_report_section(os, "Model characteristics:",
                               rs.rules.empty() ? PerformanceReport{}
                                                : model_characteristics(rs));
  os << "\n";
  detail::write_report_section(os, "Training set performance:", train_metrics);
}

}  // namespace rulekit
