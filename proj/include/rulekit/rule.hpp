#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rulekit/arff.hpp"
#include "rulekit/dataset.hpp"
#include "rulekit/measures.hpp"
#include "rulekit/stats.hpp"

namespace rulekit {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// One premise conjunct. Numeric relations are half-open: less_than covers
/// v < hi, at_least covers v >= lo, in_interval covers lo <= v < hi. A
/// missing value is never covered. Wildcard bounds only appear in expert
/// knowledge declarations and mark thresholds the search may refine.
struct Condition {
  enum class Kind { equals, less_than, at_least, in_interval };

  std::string attribute;
  Kind kind = Kind::equals;
  std::string level;  // equals only
  double lo = -kInf;
  double hi = kInf;
  bool lo_wildcard = false;
  bool hi_wildcard = false;

  static Condition equals(std::string attribute, std::string level) {
    Condition c;
    c.attribute = std::move(attribute);
    c.kind = Kind::equals;
    c.level = std::move(level);
    return c;
  }
  static Condition less_than(std::string attribute, double threshold) {
    Condition c;
    c.attribute = std::move(attribute);
    c.kind = Kind::less_than;
    c.hi = threshold;
    return c;
  }
  static Condition at_least(std::string attribute, double threshold) {
    Condition c;
    c.attribute = std::move(attribute);
    c.kind = Kind::at_least;
    c.lo = threshold;
    return c;
  }
  static Condition in_interval(std::string attribute, double lo, double hi) {
    if (!(lo < hi)) throw std::invalid_argument("interval needs lo < hi");
    Condition c;
    c.attribute = std::move(attribute);
    c.kind = Kind::in_interval;
    c.lo = lo;
    c.hi = hi;
    return c;
  }

  bool has_wildcard() const { return lo_wildcard || hi_wildcard; }

  // Direction bits: which bounds of an attribute this condition constrains.
  // Used by the replace-never-duplicate rule for premise conjuncts.
  static constexpr int kDirEquals = 1, kDirLower = 2, kDirUpper = 4;
  int directions() const {
    switch (kind) {
      case Kind::equals: return kDirEquals;
      case Kind::less_than: return kDirUpper;
      case Kind::at_least: return kDirLower;
      case Kind::in_interval: return kDirLower | kDirUpper;
    }
    return 0;
  }

  bool operator==(const Condition& o) const {
    return attribute == o.attribute && kind == o.kind && level == o.level && lo == o.lo &&
           hi == o.hi && lo_wildcard == o.lo_wildcard && hi_wildcard == o.hi_wildcard;
  }
  bool operator<(const Condition& o) const {
    auto key = [](const Condition& c) {
      return std::tie(c.attribute, c.kind, c.level, c.lo, c.hi);
    };
    return key(*this) < key(o);
  }
};

namespace detail {

inline std::string format_threshold(double v, bool wildcard) {
  if (wildcard) return "*";
  if (v == kInf) return "inf";
  if (v == -kInf) return "-inf";
  return format_double(v);
}

}  // namespace detail

/// Renders a condition in the report premise syntax, e.g.
/// "Gender = {male}", "Age = (-inf, 34.5)", "Age = <34.5, inf)".
inline std::string condition_to_string(const Condition& c) {
  switch (c.kind) {
    case Condition::Kind::equals: return c.attribute + " = {" + c.level + "}";
    case Condition::Kind::less_than:
      return c.attribute + " = (-inf, " + detail::format_threshold(c.hi, c.hi_wildcard) + ")";
    case Condition::Kind::at_least:
      return c.attribute + " = <" + detail::format_threshold(c.lo, c.lo_wildcard) + ", inf)";
    case Condition::Kind::in_interval:
      return c.attribute + " = <" + detail::format_threshold(c.lo, c.lo_wildcard) + ", " +
             detail::format_threshold(c.hi, c.hi_wildcard) + ")";
  }
  return {};
}

/// Parses the premise syntax emitted by condition_to_string. Wildcard '*'
/// thresholds are accepted for expert knowledge declarations.
inline Condition parse_condition(std::string_view text) {
  auto fail = [&](const std::string& why) {
    throw std::invalid_argument("bad condition '" + std::string(text) + "': " + why);
  };
  std::size_t eq = text.find(" = ");
  if (eq == std::string_view::npos) fail("expected '<attribute> = <relation>'");
  std::string attribute(detail::trim(text.substr(0, eq)));
  if (attribute.empty()) fail("empty attribute name");
  std::string_view rhs = detail::trim(text.substr(eq + 3));
  if (rhs.empty()) fail("empty relation");

  if (rhs.front() == '{') {
    if (rhs.back() != '}') fail("unterminated level");
    std::string level(detail::trim(rhs.substr(1, rhs.size() - 2)));
    if (level.empty()) fail("empty level");
    return Condition::equals(std::move(attribute), std::move(level));
  }

  if ((rhs.front() == '(' || rhs.front() == '<') && rhs.back() == ')') {
    bool closed_lo = rhs.front() == '<';
    std::string_view body = rhs.substr(1, rhs.size() - 2);
    std::size_t comma = body.find(',');
    if (comma == std::string_view::npos) fail("expected two interval bounds");
    std::string_view lo_s = detail::trim(body.substr(0, comma));
    std::string_view hi_s = detail::trim(body.substr(comma + 1));

    auto parse_bound = [&](std::string_view s, double& out, bool& wildcard) {
      wildcard = false;
      if (s == "*") {
        wildcard = true;
        out = std::numeric_limits<double>::quiet_NaN();
      } else if (s == "inf" || s == "+inf") {
        out = kInf;
      } else if (s == "-inf") {
        out = -kInf;
      } else if (!detail::parse_real(s, out)) {
        fail("bad bound '" + std::string(s) + "'");
      }
    };

    Condition c;
    c.attribute = std::move(attribute);
    parse_bound(lo_s, c.lo, c.lo_wildcard);
    parse_bound(hi_s, c.hi, c.hi_wildcard);
    bool lo_open = !closed_lo && !c.lo_wildcard && c.lo == -kInf;
    bool hi_open = !c.hi_wildcard && c.hi == kInf;
    if (lo_open && hi_open) fail("unbounded interval");
    if (lo_open)
      c.kind = Condition::Kind::less_than;
    else if (hi_open)
      c.kind = Condition::Kind::at_least;
    else
      c.kind = Condition::Kind::in_interval;
    if (!closed_lo && c.kind != Condition::Kind::less_than)
      fail("a bounded lower end must use '<'");
    if (c.kind == Condition::Kind::in_interval && !c.lo_wildcard && !c.hi_wildcard &&
        !(c.lo < c.hi))
      fail("interval needs lo < hi");
    return c;
  }
  fail("expected {level}, (-inf, x), <x, inf) or <x, y)");
  return {};
}

/// A condition resolved against a concrete data set: attribute column and
/// nominal level index. An unknown level never covers anything (rules built
/// on one data set may meet fewer levels in another).
struct BoundCondition {
  std::size_t column = 0;
  Condition::Kind kind = Condition::Kind::equals;
  int level_index = -1;
  double lo = -kInf;
  double hi = kInf;
};

inline BoundCondition bind_condition(const DataSet& ds, const Condition& c) {
  int col = ds.find_attribute(c.attribute);
  if (col < 0) throw std::invalid_argument("unknown attribute in condition: " + c.attribute);
  const Attribute& attr = ds.attribute(static_cast<std::size_t>(col));
  BoundCondition b;
  b.column = static_cast<std::size_t>(col);
  b.kind = c.kind;
  if (c.kind == Condition::Kind::equals) {
    if (attr.kind != AttributeKind::nominal)
      throw std::invalid_argument("equality condition on numeric attribute " + c.attribute);
    b.level_index = attr.level_index(c.level);
  } else {
    if (attr.kind != AttributeKind::numeric)
      throw std::invalid_argument("interval condition on nominal attribute " + c.attribute);
    if (c.has_wildcard())
      throw std::invalid_argument("wildcard condition cannot be evaluated: " +
                                  condition_to_string(c));
    b.lo = c.lo;
    b.hi = c.hi;
  }
  return b;
}

inline bool covers_row(const DataSet& ds, std::size_t row, const BoundCondition& b) {
  if (ds.is_missing(row, b.column)) return false;
  double v = ds.cell(row, b.column);
  switch (b.kind) {
    case Condition::Kind::equals:
      return b.level_index >= 0 && static_cast<int>(v) == b.level_index;
    case Condition::Kind::less_than: return v < b.hi;
    case Condition::Kind::at_least: return v >= b.lo;
    case Condition::Kind::in_interval: return v >= b.lo && v < b.hi;
  }
  return false;
}

inline CoverageMask condition_mask(const DataSet& ds, const Condition& c) {
  BoundCondition b = bind_condition(ds, c);
  CoverageMask mask(ds.row_count());
  for (std::size_t r = 0; r < ds.row_count(); ++r)
    if (covers_row(ds, r, b)) mask.set(r);
  return mask;
}

inline CoverageMask premise_mask(const DataSet& ds, const std::vector<Condition>& premise) {
  CoverageMask mask = CoverageMask::all(ds.row_count());
  for (const auto& c : premise) mask = mask & condition_mask(ds, c);
  return mask;
}

/// Adds a condition to a premise under the replace-never-duplicate rule:
/// a second condition on the same attribute and direction replaces the old
/// one. An interval overlapped on one side only keeps its other bound.
inline void add_condition(std::vector<Condition>& premise, const Condition& cond) {
  int dirs = cond.directions();
  for (auto it = premise.begin(); it != premise.end();) {
    if (it->attribute != cond.attribute || (it->directions() & dirs) == 0) {
      ++it;
      continue;
    }
    if (it->kind == Condition::Kind::in_interval &&
        (it->directions() & dirs) != it->directions()) {
      if (dirs & Condition::kDirUpper)
        *it = Condition::at_least(it->attribute, it->lo);
      else
        *it = Condition::less_than(it->attribute, it->hi);
      ++it;
    } else {
      it = premise.erase(it);
    }
  }
  premise.push_back(cond);
}

inline bool same_premise(const std::vector<Condition>& a, const std::vector<Condition>& b) {
  if (a.size() != b.size()) return false;
  auto sa = a, sb = b;
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  return sa == sb;
}

/// Rule consequence, one variant per task.
struct RuleConsequence {
  Task task = Task::classification;
  std::string class_level;         // classification
  double value = 0;                // regression center (median of covered labels)
  double spread = 0;               // regression spread (std dev of covered labels)
  SurvivalEstimate survival;       // survival estimate of covered examples

  static RuleConsequence for_class(std::string level) {
    RuleConsequence c;
    c.task = Task::classification;
    c.class_level = std::move(level);
    return c;
  }
  static RuleConsequence for_value(double v, double s) {
    RuleConsequence c;
    c.task = Task::regression;
    c.value = v;
    c.spread = s;
    return c;
  }
  static RuleConsequence for_survival(SurvivalEstimate est) {
    RuleConsequence c;
    c.task = Task::survival;
    c.survival = std::move(est);
    return c;
  }

  bool operator==(const RuleConsequence&) const = default;
};

struct Rule {
  std::vector<Condition> premise;
  // Leading premise conditions pinned by an expert seed; never pruned.
  std::size_t fixed_conditions = 0;
  RuleConsequence consequence;
  ContingencyQuad stats;
  double weight = 0;    // voting measure value
  double p_value = 1;
  // Conditions present when growing finished, before pruning.
  std::size_t grown_condition_count = 0;

  bool operator==(const Rule&) const = default;
};

struct InductionParams {
  double min_rule_covered = 5.0;
  QualityMeasure induction_measure = QualityMeasure(MeasureKind::C2);
  QualityMeasure pruning_measure = QualityMeasure(MeasureKind::C2);
  QualityMeasure voting_measure = QualityMeasure(MeasureKind::C2);
  bool pruning_enabled = true;
  std::optional<std::size_t> max_growing_conditions;
  // Worker threads for candidate evaluation; 0 = hardware concurrency.
  unsigned threads = 1;

  void validate() const {
    if (min_rule_covered < 1) throw std::invalid_argument("min_rule_covered must be >= 1");
    if (max_growing_conditions && *max_growing_conditions == 0)
      throw std::invalid_argument("max_growing_conditions must be positive");
  }
};

/// An induced model: ordered rules, the default response for uncovered
/// examples, the training schema, per-example training coverage and timings.
struct RuleSet {
  Task task = Task::classification;
  std::vector<Rule> rules;
  InductionParams params;
  std::vector<Attribute> schema;

  std::string default_class;          // classification: training majority class
  double default_value = 0;           // regression: training label mean
  SurvivalEstimate default_survival;  // survival: training Kaplan-Meier
  SurvivalEstimate censoring_km;      // survival: training censoring estimate

  // Covering rule indices per training example; best_rule holds the index
  // of the max-weight covering rule, -1 when uncovered.
  std::vector<std::vector<std::size_t>> training_coverage;
  std::vector<int> training_best;

  double time_total_s = 0;
  double time_growing_s = 0;
  double time_pruning_s = 0;
};

}  // namespace rulekit
