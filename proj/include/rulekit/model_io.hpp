#pragma once

#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "rulekit/arff.hpp"
#include "rulekit/rule.hpp"

namespace rulekit {

constexpr int kModelFormatVersion = 1;

namespace detail {

inline std::string quoted(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

// Tokenizes one model line: whitespace-separated tokens, double-quoted
// strings with backslash escapes form a single token.
inline std::vector<std::string> model_tokens(const std::string& line, std::size_t line_no) {
  std::vector<std::string> tokens;
  std::size_t pos = 0;
  while (pos < line.size()) {
    while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t')) ++pos;
    if (pos >= line.size()) break;
    std::string token;
    if (line[pos] == '"') {
      ++pos;
      bool closed = false;
      while (pos < line.size()) {
        char c = line[pos++];
        if (c == '\\' && pos < line.size()) {
          token.push_back(line[pos++]);
        } else if (c == '"') {
          closed = true;
          break;
        } else {
          token.push_back(c);
        }
      }
      if (!closed) throw ParseError("unterminated quoted token", line_no);
    } else {
      while (pos < line.size() && line[pos] != ' ' && line[pos] != '\t')
        token.push_back(line[pos++]);
    }
    tokens.push_back(std::move(token));
  }
  return tokens;
}

inline double parse_model_number(const std::string& token, std::size_t line_no) {
  if (token == "inf") return kInf;
  if (token == "-inf") return -kInf;
  double v;
  if (!parse_real(token, v)) throw ParseError("bad number '" + token + "'", line_no);
  return v;
}

inline std::string format_model_number(double v) {
  if (v == kInf) return "inf";
  if (v == -kInf) return "-inf";
  return format_double(v);
}

inline void write_estimate(std::ostream& os, const SurvivalEstimate& est) {
  os << est.points.size();
  for (const auto& pt : est.points)
    os << ' ' << format_model_number(pt.time) << ' ' << format_model_number(pt.probability);
}

inline SurvivalEstimate read_estimate(const std::vector<std::string>& tokens, std::size_t from,
                                      std::size_t line_no) {
  if (from >= tokens.size()) throw ParseError("missing survival point count", line_no);
  auto count = static_cast<std::size_t>(parse_model_number(tokens[from], line_no));
  if (tokens.size() != from + 1 + 2 * count)
    throw ParseError("survival estimate token count mismatch", line_no);
  SurvivalEstimate est;
  for (std::size_t i = 0; i < count; ++i)
    est.points.push_back({parse_model_number(tokens[from + 1 + 2 * i], line_no),
                          parse_model_number(tokens[from + 2 + 2 * i], line_no)});
  return est;
}

inline void write_measure_param(std::ostream& os, const char* name, const QualityMeasure& m) {
  os << "param " << name << ' ' << m.name();
  if (m.kind() == MeasureKind::UserDefined) os << ' ' << quoted(m.expression().unparse());
  os << '\n';
}

inline QualityMeasure read_measure(const std::vector<std::string>& tokens, std::size_t line_no) {
  if (tokens[2] == "UserDefined") {
    if (tokens.size() != 4) throw ParseError("UserDefined measure needs a formula", line_no);
    return QualityMeasure::user_defined(tokens[3]);
  }
  if (tokens.size() != 3) throw ParseError("malformed measure parameter", line_no);
  return QualityMeasure::from_name(tokens[2]);
}

inline const char* role_name(AttributeRole role) {
  switch (role) {
    case AttributeRole::regular: return "regular";
    case AttributeRole::label: return "label";
    case AttributeRole::survival_time: return "survival_time";
    case AttributeRole::survival_status: return "survival_status";
  }
  return "?";
}

inline AttributeRole parse_role(const std::string& s, std::size_t line_no) {
  if (s == "regular") return AttributeRole::regular;
  if (s == "label") return AttributeRole::label;
  if (s == "survival_time") return AttributeRole::survival_time;
  if (s == "survival_status") return AttributeRole::survival_status;
  throw ParseError("unknown attribute role '" + s + "'", line_no);
}

}  // namespace detail

/// Writes a rule set in the versioned, line-oriented text model format.
/// The format is authoritative: numbers round-trip at full precision and a
/// hand-edited file predicts per its edited contents.
inline void serialize_model(const RuleSet& rs, std::ostream& os) {
  os << "rulekit-model " << kModelFormatVersion << '\n';
  os << "task " << task_name(rs.task) << '\n';
  os << "param min_rule_covered " << detail::format_model_number(rs.params.min_rule_covered)
     << '\n';
  detail::write_measure_param(os, "induction_measure", rs.params.induction_measure);
  detail::write_measure_param(os, "pruning_measure", rs.params.pruning_measure);
  detail::write_measure_param(os, "voting_measure", rs.params.voting_measure);
  os << "param pruning_enabled " << (rs.params.pruning_enabled ? 1 : 0) << '\n';
  if (rs.params.max_growing_conditions)
    os << "param max_growing_conditions " << *rs.params.max_growing_conditions << '\n';

  os << "attributes " << rs.schema.size() << '\n';
  for (const auto& attr : rs.schema) {
    os << "attribute " << detail::quoted(attr.name) << ' '
       << (attr.kind == AttributeKind::numeric ? "numeric" : "nominal") << ' '
       << detail::role_name(attr.role);
    if (attr.kind == AttributeKind::nominal) {
      os << " levels " << attr.levels.size();
      for (const auto& level : attr.levels) os << ' ' << detail::quoted(level);
    }
    os << '\n';
  }

  os << "rules " << rs.rules.size() << '\n';
  for (const auto& rule : rs.rules) {
    os << "rule grown " << rule.grown_condition_count << " fixed " << rule.fixed_conditions
       << '\n';
    for (const auto& c : rule.premise) {
      os << "condition " << detail::quoted(c.attribute) << ' ';
      switch (c.kind) {
        case Condition::Kind::equals: os << "equals " << detail::quoted(c.level); break;
        case Condition::Kind::less_than:
          os << "less_than " << detail::format_model_number(c.hi);
          break;
        case Condition::Kind::at_least:
          os << "at_least " << detail::format_model_number(c.lo);
          break;
        case Condition::Kind::in_interval:
          os << "in_interval " << detail::format_model_number(c.lo) << ' '
             << detail::format_model_number(c.hi);
          break;
      }
      os << '\n';
    }
    switch (rule.consequence.task) {
      case Task::classification:
        os << "then class " << detail::quoted(rule.consequence.class_level) << '\n';
        break;
      case Task::regression:
        os << "then value " << detail::format_model_number(rule.consequence.value) << ' '
           << detail::format_model_number(rule.consequence.spread) << '\n';
        break;
      case Task::survival:
        os << "then survival ";
        detail::write_estimate(os, rule.consequence.survival);
        os << '\n';
        break;
    }
    os << "stats " << detail::format_model_number(rule.stats.p) << ' '
       << detail::format_model_number(rule.stats.n) << ' '
       << detail::format_model_number(rule.stats.P) << ' '
       << detail::format_model_number(rule.stats.N) << '\n';
    os << "weight " << detail::format_model_number(rule.weight) << '\n';
    os << "pval " << detail::format_model_number(rule.p_value) << '\n';
    os << "end\n";
  }

  switch (rs.task) {
    case Task::classification:
      os << "default class " << detail::quoted(rs.default_class) << '\n';
      break;
    case Task::regression:
      os << "default value " << detail::format_model_number(rs.default_value) << '\n';
      break;
    case Task::survival:
      os << "default survival ";
      detail::write_estimate(os, rs.default_survival);
      os << '\n';
      os << "censoring_km ";
      detail::write_estimate(os, rs.censoring_km);
      os << '\n';
      break;
  }
}

inline std::string serialize_model_string(const RuleSet& rs) {
  std::ostringstream os;
  serialize_model(rs, os);
  return os.str();
}

/// Reads the text model format back; rejects unknown versions, truncated
/// files and malformed lines with their line number.
inline RuleSet deserialize_model(std::istream& is) {
  RuleSet rs;
  rs.params.pruning_enabled = true;
  std::string line;
  std::size_t line_no = 0;

  auto next_tokens = [&](const char* what) {
    while (std::getline(is, line)) {
      ++line_no;
      auto tokens = detail::model_tokens(line, line_no);
      if (!tokens.empty()) return tokens;
    }
    throw ParseError(std::string("unexpected end of model file, expected ") + what, line_no);
  };

  auto header = next_tokens("version header");
  if (header.size() != 2 || header[0] != "rulekit-model")
    throw ParseError("not a rulekit model file", line_no);
  if (header[1] != std::to_string(kModelFormatVersion))
    throw ParseError("unsupported model format version " + header[1], line_no);

  auto task_line = next_tokens("task");
  if (task_line.size() != 2 || task_line[0] != "task")
    throw ParseError("expected the task line", line_no);
  if (task_line[1] == "classification")
    rs.task = Task::classification;
  else if (task_line[1] == "regression")
    rs.task = Task::regression;
  else if (task_line[1] == "survival")
    rs.task = Task::survival;
  else
    throw ParseError("unknown task '" + task_line[1] + "'", line_no);

  auto tokens = next_tokens("parameters");
  while (tokens[0] == "param") {
    if (tokens.size() < 3) throw ParseError("malformed parameter line", line_no);
    const std::string& name = tokens[1];
    if (name == "min_rule_covered")
      rs.params.min_rule_covered = detail::parse_model_number(tokens[2], line_no);
    else if (name == "induction_measure")
      rs.params.induction_measure = detail::read_measure(tokens, line_no);
    else if (name == "pruning_measure")
      rs.params.pruning_measure = detail::read_measure(tokens, line_no);
    else if (name == "voting_measure")
      rs.params.voting_measure = detail::read_measure(tokens, line_no);
    else if (name == "pruning_enabled")
      rs.params.pruning_enabled = tokens[2] != "0";
    else if (name == "max_growing_conditions")
      rs.params.max_growing_conditions =
          static_cast<std::size_t>(detail::parse_model_number(tokens[2], line_no));
    else
      throw ParseError("unknown parameter '" + name + "'", line_no);
    tokens = next_tokens("attributes");
  }

  if (tokens[0] != "attributes" || tokens.size() != 2)
    throw ParseError("expected the attributes header", line_no);
  auto attr_count = static_cast<std::size_t>(detail::parse_model_number(tokens[1], line_no));
  for (std::size_t i = 0; i < attr_count; ++i) {
    auto at = next_tokens("attribute");
    if (at.size() < 4 || at[0] != "attribute")
      throw ParseError("expected an attribute line", line_no);
    Attribute attr;
    attr.name = at[1];
    if (at[2] == "numeric")
      attr.kind = AttributeKind::numeric;
    else if (at[2] == "nominal")
      attr.kind = AttributeKind::nominal;
    else
      throw ParseError("unknown attribute kind '" + at[2] + "'", line_no);
    attr.role = detail::parse_role(at[3], line_no);
    if (attr.kind == AttributeKind::nominal) {
      if (at.size() < 6 || at[4] != "levels")
        throw ParseError("nominal attribute without levels", line_no);
      auto level_count = static_cast<std::size_t>(detail::parse_model_number(at[5], line_no));
      if (at.size() != 6 + level_count)
        throw ParseError("level count mismatch", line_no);
      for (std::size_t l = 0; l < level_count; ++l) attr.levels.push_back(at[6 + l]);
    }
    rs.schema.push_back(std::move(attr));
  }

  auto rules_header = next_tokens("rules header");
  if (rules_header[0] != "rules" || rules_header.size() != 2)
    throw ParseError("expected the rules header", line_no);
  auto rule_count = static_cast<std::size_t>(
      detail::parse_model_number(rules_header[1], line_no));

  for (std::size_t i = 0; i < rule_count; ++i) {
    auto rule_line = next_tokens("rule");
    if (rule_line.size() != 5 || rule_line[0] != "rule" || rule_line[1] != "grown" ||
        rule_line[3] != "fixed")
      throw ParseError("expected a rule header", line_no);
    Rule rule;
    rule.grown_condition_count =
        static_cast<std::size_t>(detail::parse_model_number(rule_line[2], line_no));
    rule.fixed_conditions =
        static_cast<std::size_t>(detail::parse_model_number(rule_line[4], line_no));

    for (auto body = next_tokens("rule body"); body[0] != "end";
         body = next_tokens("rule body")) {
      if (body[0] == "condition") {
        if (body.size() < 4) throw ParseError("malformed condition", line_no);
        Condition c;
        c.attribute = body[1];
        if (body[2] == "equals") {
          c = Condition::equals(body[1], body[3]);
        } else if (body[2] == "less_than") {
          c = Condition::less_than(body[1], detail::parse_model_number(body[3], line_no));
        } else if (body[2] == "at_least") {
          c = Condition::at_least(body[1], detail::parse_model_number(body[3], line_no));
        } else if (body[2] == "in_interval") {
          if (body.size() != 5) throw ParseError("malformed interval condition", line_no);
          c = Condition::in_interval(body[1], detail::parse_model_number(body[3], line_no),
                                     detail::parse_model_number(body[4], line_no));
        } else {
          throw ParseError("unknown condition kind '" + body[2] + "'", line_no);
        }
        rule.premise.push_back(std::move(c));
      } else if (body[0] == "then") {
        if (body[1] == "class" && body.size() == 3) {
          rule.consequence = RuleConsequence::for_class(body[2]);
        } else if (body[1] == "value" && body.size() == 4) {
          rule.consequence =
              RuleConsequence::for_value(detail::parse_model_number(body[2], line_no),
                                         detail::parse_model_number(body[3], line_no));
        } else if (body[1] == "survival") {
          rule.consequence =
              RuleConsequence::for_survival(detail::read_estimate(body, 2, line_no));
        } else {
          throw ParseError("malformed consequence", line_no);
        }
      } else if (body[0] == "stats" && body.size() == 5) {
        rule.stats = {detail::parse_model_number(body[1], line_no),
                      detail::parse_model_number(body[2], line_no),
                      detail::parse_model_number(body[3], line_no),
                      detail::parse_model_number(body[4], line_no)};
      } else if (body[0] == "weight" && body.size() == 2) {
        rule.weight = detail::parse_model_number(body[1], line_no);
      } else if (body[0] == "pval" && body.size() == 2) {
        rule.p_value = detail::parse_model_number(body[1], line_no);
      } else {
        throw ParseError("unknown rule line '" + body[0] + "'", line_no);
      }
    }
    rs.rules.push_back(std::move(rule));
  }

  auto def = next_tokens("default response");
  if (def[0] != "default" || def.size() < 2)
    throw ParseError("expected the default response", line_no);
  if (def[1] == "class" && def.size() == 3) {
    rs.default_class = def[2];
  } else if (def[1] == "value" && def.size() == 3) {
    rs.default_value = detail::parse_model_number(def[2], line_no);
  } else if (def[1] == "survival") {
    rs.default_survival = detail::read_estimate(def, 2, line_no);
    auto cens = next_tokens("censoring estimate");
    if (cens[0] != "censoring_km") throw ParseError("expected the censoring estimate", line_no);
    rs.censoring_km = detail::read_estimate(cens, 1, line_no);
  } else {
    throw ParseError("malformed default response", line_no);
  }
  return rs;
}

inline RuleSet deserialize_model_string(const std::string& text) {
  std::istringstream is(text);
  return deserialize_model(is);
}

/// Structural equality over the persisted surface of a model (training
/// coverage, timings and thread settings are runtime artifacts, not model
/// content).
inline bool models_structurally_equal(const RuleSet& a, const RuleSet& b) {
  return a.task == b.task && a.rules == b.rules && a.schema == b.schema &&
         a.default_class == b.default_class && a.default_value == b.default_value &&
         a.default_survival == b.default_survival && a.censoring_km == b.censoring_km &&
         a.params.min_rule_covered == b.params.min_rule_covered &&
         a.params.induction_measure == b.params.induction_measure &&
         a.params.pruning_measure == b.params.pruning_measure &&
         a.params.voting_measure == b.params.voting_measure &&
         a.params.pruning_enabled == b.params.pruning_enabled &&
         a.params.max_growing_conditions == b.params.max_growing_conditions;
}

}  // namespace rulekit
