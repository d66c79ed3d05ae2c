#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "rulekit/csv.hpp"
#include "rulekit/induction.hpp"
#include "rulekit/model_io.hpp"
#include "rulekit/prediction.hpp"

using namespace rulekit;

namespace {

RuleSet random_model(std::mt19937_64& rng) {
  RuleSet rs;
  std::size_t task_pick = rng() % 3;
  rs.task = task_pick == 0   ? Task::classification
            : task_pick == 1 ? Task::regression
                             : Task::survival;

  Attribute num{"measurement value", AttributeKind::numeric, AttributeRole::regular, {}};
  Attribute nom{"group \"quoted\"", AttributeKind::nominal, AttributeRole::regular,
                {"one two", "three"}};
  rs.schema = {num, nom};
  if (rs.task == Task::classification) {
    rs.schema.push_back(
        {"label", AttributeKind::nominal, AttributeRole::label, {"yes", "no"}});
    rs.default_class = rng() % 2 ? "yes" : "no";
  } else if (rs.task == Task::regression) {
    rs.schema.push_back({"y", AttributeKind::numeric, AttributeRole::label, {}});
    rs.default_value = static_cast<double>(rng() % 1000) / 7.0;
  } else {
    rs.schema.push_back({"t", AttributeKind::numeric, AttributeRole::survival_time, {}});
    rs.schema.push_back({"s", AttributeKind::numeric, AttributeRole::survival_status, {}});
    rs.default_survival.points = {{1.5, 0.75}, {4.0, 0.25}};
    rs.censoring_km.points = {{2.0, 0.5}};
  }

  if (rng() % 2) {
    rs.params.min_rule_covered = 1 + static_cast<double>(rng() % 9);
    rs.params.pruning_measure = QualityMeasure::user_defined("2 * p / (n + 1)");
    rs.params.pruning_enabled = rng() % 2;
    if (rng() % 2) rs.params.max_growing_conditions = 1 + rng() % 9;
  }

  std::size_t rules = rng() % 5;
  for (std::size_t i = 0; i < rules; ++i) {
    Rule r;
    if (rng() % 2)
      r.premise.push_back(Condition::less_than("measurement value",
                                               static_cast<double>(rng() % 100) / 3.0));
    if (rng() % 2)
      r.premise.push_back(Condition::equals("group \"quoted\"", "one two"));
    if (rng() % 4 == 0)
      r.premise.push_back(Condition::in_interval("measurement value",
                                                 -static_cast<double>(rng() % 10) - 1,
                                                 static_cast<double>(rng() % 10) + 1));
    r.fixed_conditions = r.premise.empty() ? 0 : rng() % r.premise.size();
    r.grown_condition_count = r.premise.size() + rng() % 3;
    r.stats = quad(static_cast<double>(rng() % 10), static_cast<double>(rng() % 10), 10, 10);
    r.weight = static_cast<double>(rng() % 1000) / 999.0;
    r.p_value = static_cast<double>(rng() % 1000) / 999.0;
    if (rs.task == Task::classification)
      r.consequence = RuleConsequence::for_class(rng() % 2 ? "yes" : "no");
    else if (rs.task == Task::regression)
      r.consequence = RuleConsequence::for_value(static_cast<double>(rng() % 100) / 7.0,
                                                 static_cast<double>(rng() % 10) / 3.0);
    else
      r.consequence = RuleConsequence::for_survival(
          {{{1.0, 0.9}, {2.5, static_cast<double>(rng() % 9) / 10.0}}});
    rs.rules.push_back(std::move(r));
  }
  return rs;
}

}  // namespace

TEST_CASE("model round-trip: randomized rule sets over randomized schemas") {
  std::mt19937_64 rng(404);
  for (int iter = 0; iter < 300; ++iter) {
    RuleSet rs = random_model(rng);
    std::string text = serialize_model_string(rs);
    RuleSet back = deserialize_model_string(text);
    INFO(text);
    REQUIRE(models_structurally_equal(rs, back));
    // Idempotent: a second round trip yields the same text.
    CHECK(serialize_model_string(back) == text);
  }
}

TEST_CASE("model round-trip: an induced classifier") {
  std::string text = "x,g,c\n";
  std::mt19937_64 rng(7);
  for (int i = 0; i < 40; ++i)
    text += std::to_string(rng() % 12) + "," + (rng() % 2 ? "u" : "v") + "," +
            (rng() % 3 ? "yes" : "no") + "\n";
  auto ds = set_roles(parse_csv(text, true), "c");
  InductionParams params;
  params.min_rule_covered = 2;
  params.pruning_measure = QualityMeasure::user_defined("p / (n + 1)");
  auto rs = induce_classification(ds, params);
  auto back = deserialize_model_string(serialize_model_string(rs));
  REQUIRE(models_structurally_equal(rs, back));

  // The reloaded model predicts identically.
  auto a = predict(rs, ds);
  auto b = predict(back, ds);
  CHECK(a.class_predictions == b.class_predictions);
}

TEST_CASE("model round-trip: an induced survival model keeps its estimates") {
  std::string text = "g,survival_time,survival_status\n";
  for (int i = 0; i < 10; ++i) text += "early," + std::to_string(1 + i) + ",1\n";
  for (int i = 0; i < 10; ++i) text += "late," + std::to_string(50 + i) + ",0\n";
  auto ds = set_roles(parse_csv(text, true), std::nullopt, "survival_time", "survival_status");
  InductionParams params;
  params.min_rule_covered = 3;
  auto rs = induce_survival(ds, params);
  auto back = deserialize_model_string(serialize_model_string(rs));
  REQUIRE(models_structurally_equal(rs, back));
  CHECK(back.censoring_km == rs.censoring_km);
}

TEST_CASE("model format: future version tag is rejected") {
  std::mt19937_64 rng(5);
  auto rs = random_model(rng);
  auto text = serialize_model_string(rs);
  auto bumped = text;
  bumped.replace(bumped.find("rulekit-model 1"), 15, "rulekit-model 2");
  CHECK_THROWS_WITH(deserialize_model_string(bumped),
                    Catch::Matchers::ContainsSubstring("version"));
  CHECK_THROWS_AS(deserialize_model_string("not a model\n"), ParseError);
}

TEST_CASE("model format: truncated file is rejected") {
  std::mt19937_64 rng(6);
  RuleSet rs;
  while (rs.rules.empty()) rs = random_model(rng);
  auto text = serialize_model_string(rs);
  auto truncated = text.substr(0, text.size() / 2);
  CHECK_THROWS_AS(deserialize_model_string(truncated), ParseError);
}

TEST_CASE("model format: a hand-edited threshold drives prediction") {
  RuleSet rs;
  rs.task = Task::classification;
  rs.schema = {{"x", AttributeKind::numeric, AttributeRole::regular, {}},
               {"c", AttributeKind::nominal, AttributeRole::label, {"lo", "hi"}}};
  rs.default_class = "hi";
  Rule r;
  r.premise = {Condition::less_than("x", 10)};
  r.consequence = RuleConsequence::for_class("lo");
  r.weight = 1;
  rs.rules = {r};

  auto ds = set_roles(parse_csv("x,c\n15,lo\n", true), "c");
  CHECK(predict(rs, ds).class_predictions[0] == "hi");  // 15 >= 10

  auto text = serialize_model_string(rs);
  auto pos = text.find("less_than 10");
  REQUIRE(pos != std::string::npos);
  text.replace(pos, 12, "less_than 20");
  auto edited = deserialize_model_string(text);
  CHECK(predict(edited, ds).class_predictions[0] == "lo");  // 15 < 20 now
}
