#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rulekit/rule.hpp"

namespace rulekit {

constexpr int kUnlimited = -1;

struct PreferredCondition {
  Condition condition;
  int multiplicity = kUnlimited;  // rule-set-wide budget; kUnlimited = no cap
};

struct PreferredAttribute {
  std::string attribute;
  int multiplicity = kUnlimited;
};

struct ExpertRule {
  std::vector<Condition> premise;
  std::optional<std::string> consequence_class;  // pins the class when given
};

/// User-guided induction inputs: initial rules used as fixed seeds,
/// preferred conditions/attributes with rule-set-wide budgets, and
/// forbidden conditions/attributes excluded from the search.
struct ExpertKnowledge {
  std::vector<ExpertRule> initial_rules;
  std::vector<PreferredCondition> preferred_conditions;
  std::vector<PreferredAttribute> preferred_attributes;
  std::vector<Condition> forbidden_conditions;
  std::vector<std::string> forbidden_attributes;
  bool extend_with_automatic = true;
  bool induce_automatic_rules = true;

  bool empty() const {
    return initial_rules.empty() && preferred_conditions.empty() &&
           preferred_attributes.empty() && forbidden_conditions.empty() &&
           forbidden_attributes.empty();
  }

  bool attribute_forbidden(std::string_view name) const {
    for (const auto& a : forbidden_attributes)
      if (a == name) return true;
    return false;
  }

  void validate() const {
    for (const auto& pc : preferred_conditions) {
      if (pc.multiplicity != kUnlimited && pc.multiplicity < 1)
        throw std::invalid_argument("preferred condition multiplicity must be positive");
      if (pc.condition.has_wildcard() && pc.condition.kind == Condition::Kind::in_interval)
        throw std::invalid_argument(
            "wildcard thresholds are supported on one-sided conditions only: " +
            condition_to_string(pc.condition));
      for (const auto& fc : forbidden_conditions)
        if (pc.condition == fc)
          throw std::invalid_argument("condition both preferred and forbidden: " +
                                      condition_to_string(fc));
      if (attribute_forbidden(pc.condition.attribute))
        throw std::invalid_argument("preferred condition on forbidden attribute: " +
                                    pc.condition.attribute);
    }
    for (const auto& pa : preferred_attributes) {
      if (pa.multiplicity != kUnlimited && pa.multiplicity < 1)
        throw std::invalid_argument("preferred attribute multiplicity must be positive");
      if (attribute_forbidden(pa.attribute))
        throw std::invalid_argument("attribute both preferred and forbidden: " + pa.attribute);
    }
    for (const auto& er : initial_rules)
      for (const auto& c : er.premise) {
        if (attribute_forbidden(c.attribute))
          throw std::invalid_argument("initial rule uses forbidden attribute: " + c.attribute);
        if (c.has_wildcard())
          throw std::invalid_argument("initial rule conditions must be concrete: " +
                                      condition_to_string(c));
      }
  }
};

/// True when every example satisfying `inner` also satisfies `outer`.
/// Decidable syntactically for same-attribute conditions.
inline bool condition_subsumed_by(const Condition& inner, const Condition& outer) {
  if (inner.attribute != outer.attribute) return false;
  if (outer.kind == Condition::Kind::equals || inner.kind == Condition::Kind::equals)
    return inner.kind == outer.kind && inner.level == outer.level;
  if (inner.has_wildcard() || outer.has_wildcard()) return false;
  // Numeric: [inner.lo, inner.hi) subset of [outer.lo, outer.hi).
  return inner.lo >= outer.lo && inner.hi <= outer.hi;
}

/// Drops candidates on forbidden attributes and candidates whose covered set
/// is contained in a forbidden condition's.
inline std::vector<Condition> filter_candidates(const std::vector<Condition>& candidates,
                                                const ExpertKnowledge& knowledge) {
  std::vector<Condition> kept;
  kept.reserve(candidates.size());
  for (const auto& c : candidates) {
    if (knowledge.attribute_forbidden(c.attribute)) continue;
    bool subsumed = false;
    for (const auto& f : knowledge.forbidden_conditions)
      if (condition_subsumed_by(c, f)) {
        subsumed = true;
        break;
      }
    if (!subsumed) kept.push_back(c);
  }
  return kept;
}

/// Mutable budget counters for one induction run; decremented only between
/// growing steps on the covering thread.
struct KnowledgeBudget {
  std::vector<int> condition_remaining;  // parallel to preferred_conditions
  std::vector<int> attribute_remaining;  // parallel to preferred_attributes

  explicit KnowledgeBudget(const ExpertKnowledge& k) {
    condition_remaining.reserve(k.preferred_conditions.size());
    for (const auto& pc : k.preferred_conditions)
      condition_remaining.push_back(pc.multiplicity);
    attribute_remaining.reserve(k.preferred_attributes.size());
    for (const auto& pa : k.preferred_attributes)
      attribute_remaining.push_back(pa.multiplicity);
  }

  bool condition_available(std::size_t i) const {
    return condition_remaining[i] == kUnlimited || condition_remaining[i] > 0;
  }
  bool attribute_available(std::size_t i) const {
    return attribute_remaining[i] == kUnlimited || attribute_remaining[i] > 0;
  }
  void consume_condition(std::size_t i) {
    if (condition_remaining[i] != kUnlimited) --condition_remaining[i];
  }
  void consume_attribute(std::size_t i) {
    if (attribute_remaining[i] != kUnlimited) --attribute_remaining[i];
  }
};

namespace detail {

inline std::vector<std::string> split_on(std::string_view text, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find(sep, start);
    std::string_view part = text.substr(
        start, end == std::string_view::npos ? text.size() - start : end - start);
    part = trim(part);
    if (!part.empty()) parts.emplace_back(part);
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  return parts;
}

// Splits an optional trailing integer multiplicity off an item like
// "Gender = {male} 2". Returns kUnlimited when absent.
inline int split_trailing_multiplicity(std::string& item) {
  std::string_view s = trim(item);
  std::size_t end = s.size();
  std::size_t digits = 0;
  while (digits < end && std::isdigit(static_cast<unsigned char>(s[end - 1 - digits]))) ++digits;
  if (digits == 0 || digits == end) return kUnlimited;
  char before = s[end - 1 - digits];
  if (before != ' ' && before != '\t') return kUnlimited;
  int value = std::stoi(std::string(s.substr(end - digits)));
  item = std::string(trim(s.substr(0, end - digits)));
  return value;
}

}  // namespace detail

/// Parses "cond; cond; ..." items, each with an optional trailing
/// multiplicity, e.g. "Gender = {male} 2; Age = (-inf, *)".
inline std::vector<PreferredCondition> parse_preferred_conditions(std::string_view text) {
  std::vector<PreferredCondition> out;
  for (auto& item : detail::split_on(text, ';')) {
    PreferredCondition pc;
    pc.multiplicity = detail::split_trailing_multiplicity(item);
    pc.condition = parse_condition(item);
    out.push_back(std::move(pc));
  }
  return out;
}

inline std::vector<Condition> parse_condition_list(std::string_view text) {
  std::vector<Condition> out;
  for (const auto& item : detail::split_on(text, ';')) out.push_back(parse_condition(item));
  return out;
}

inline std::vector<PreferredAttribute> parse_preferred_attributes(std::string_view text) {
  std::vector<PreferredAttribute> out;
  for (auto& item : detail::split_on(text, ';')) {
    PreferredAttribute pa;
    pa.multiplicity = detail::split_trailing_multiplicity(item);
    pa.attribute = item;
    out.push_back(std::move(pa));
  }
  return out;
}

inline std::vector<std::string> parse_attribute_list(std::string_view text) {
  return detail::split_on(text, ';');
}

/// Parses an expert rule: either a bare premise "cond AND cond" or a full
/// "IF cond AND cond THEN attr = {level}" statement.
inline ExpertRule parse_expert_rule(std::string_view text) {
  ExpertRule rule;
  std::string_view body = detail::trim(text);
  if (body.substr(0, 3) == "IF ") {
    body.remove_prefix(3);
    std::size_t then_pos = body.find(" THEN");
    if (then_pos == std::string_view::npos)
      throw std::invalid_argument("expert rule missing THEN: " + std::string(text));
    std::string_view conseq = detail::trim(body.substr(then_pos + 5));
    body = detail::trim(body.substr(0, then_pos));
    if (!conseq.empty()) {
      Condition c = parse_condition(conseq);
      if (c.kind != Condition::Kind::equals)
        throw std::invalid_argument("expert rule consequence must be 'attr = {level}'");
      rule.consequence_class = c.level;
    }
  }
  std::size_t start = 0;
  while (start < body.size()) {
    std::size_t and_pos = body.find(" AND ", start);
    std::string_view part =
        body.substr(start, and_pos == std::string_view::npos ? body.size() - start
                                                             : and_pos - start);
    part = detail::trim(part);
    if (!part.empty()) rule.premise.push_back(parse_condition(part));
    if (and_pos == std::string_view::npos) break;
    start = and_pos + 5;
  }
  if (rule.premise.empty())
    throw std::invalid_argument("expert rule has an empty premise: " + std::string(text));
  return rule;
}

inline std::vector<ExpertRule> parse_expert_rules(std::string_view text) {
  std::vector<ExpertRule> out;
  for (const auto& item : detail::split_on(text, ';')) out.push_back(parse_expert_rule(item));
  return out;
}

}  // namespace rulekit
