#include <catch2/catch_amalgamated.hpp>

#include "rulekit/knowledge.hpp"

using namespace rulekit;

TEST_CASE("condition syntax round trip") {
  for (const char* text : {"Gender = {male}", "Payment Method = {credit card}",
                           "Age = (-inf, 34.5)", "Age = <34.5, inf)", "Age = <30, 40)"}) {
    auto c = parse_condition(text);
    CHECK(condition_to_string(c) == text);
  }
  auto lt = parse_condition("Age = (-inf, 34.5)");
  CHECK(lt.kind == Condition::Kind::less_than);
  CHECK(lt.hi == 34.5);
  auto ge = parse_condition("Age = <34.5, inf)");
  CHECK(ge.kind == Condition::Kind::at_least);
  CHECK(ge.lo == 34.5);
  auto in = parse_condition("Age = <30, 40)");
  CHECK(in.kind == Condition::Kind::in_interval);

  CHECK_THROWS_AS(parse_condition("Age < 30"), std::invalid_argument);
  CHECK_THROWS_AS(parse_condition("Age = <40, 30)"), std::invalid_argument);
  CHECK_THROWS_AS(parse_condition("Age = (30, 40)"), std::invalid_argument);
}

TEST_CASE("wildcard thresholds parse for knowledge declarations") {
  auto c = parse_condition("Age = (-inf, *)");
  CHECK(c.kind == Condition::Kind::less_than);
  CHECK(c.hi_wildcard);
  auto c2 = parse_condition("Age = <*, inf)");
  CHECK(c2.kind == Condition::Kind::at_least);
  CHECK(c2.lo_wildcard);
}

TEST_CASE("expert rule parsing") {
  auto r = parse_expert_rule("IF Gender = {male} AND Age = (-inf, 34.5) THEN Future Customer = {yes}");
  REQUIRE(r.premise.size() == 2);
  CHECK(r.premise[0].attribute == "Gender");
  CHECK(r.premise[1].kind == Condition::Kind::less_than);
  REQUIRE(r.consequence_class.has_value());
  CHECK(*r.consequence_class == "yes");

  auto bare = parse_expert_rule("Gender = {male}");
  CHECK(bare.premise.size() == 1);
  CHECK(!bare.consequence_class.has_value());

  CHECK_THROWS_AS(parse_expert_rule("IF Gender = {male}"), std::invalid_argument);
}

TEST_CASE("knowledge list parsing with trailing multiplicities") {
  auto prefs = parse_preferred_conditions("Gender = {male} 2; Age = (-inf, *)");
  REQUIRE(prefs.size() == 2);
  CHECK(prefs[0].multiplicity == 2);
  CHECK(prefs[0].condition.level == "male");
  CHECK(prefs[1].multiplicity == kUnlimited);
  CHECK(prefs[1].condition.hi_wildcard);

  auto attrs = parse_preferred_attributes("Age 3; Payment Method");
  REQUIRE(attrs.size() == 2);
  CHECK(attrs[0].attribute == "Age");
  CHECK(attrs[0].multiplicity == 3);
  CHECK(attrs[1].attribute == "Payment Method");
  CHECK(attrs[1].multiplicity == kUnlimited);

  auto names = parse_attribute_list("Gender; Age");
  CHECK(names == std::vector<std::string>{"Gender", "Age"});
}

TEST_CASE("forbidden attribute removes all its candidates") {
  std::vector<Condition> candidates = {
      Condition::equals("Gender", "male"), Condition::equals("Gender", "female"),
      Condition::less_than("Age", 30)};
  ExpertKnowledge k;
  k.forbidden_attributes = {"Gender"};
  auto kept = filter_candidates(candidates, k);
  REQUIRE(kept.size() == 1);
  CHECK(kept[0].attribute == "Age");
}

TEST_CASE("forbidden condition removes subsumed candidates only") {
  ExpertKnowledge k;
  k.forbidden_conditions = {Condition::at_least("Age", 30)};
  std::vector<Condition> candidates = {Condition::at_least("Age", 35),
                                       Condition::less_than("Age", 20),
                                       Condition::at_least("Age", 25)};
  auto kept = filter_candidates(candidates, k);
  REQUIRE(kept.size() == 2);
  CHECK(kept[0] == Condition::less_than("Age", 20));
  CHECK(kept[1] == Condition::at_least("Age", 25));
}

TEST_CASE("empty knowledge keeps candidates unchanged") {
  std::vector<Condition> candidates = {Condition::equals("Gender", "male"),
                                       Condition::less_than("Age", 30)};
  auto kept = filter_candidates(candidates, ExpertKnowledge{});
  CHECK(kept == candidates);
}

TEST_CASE("subsumption for intervals and levels") {
  CHECK(condition_subsumed_by(Condition::at_least("Age", 35), Condition::at_least("Age", 30)));
  CHECK(!condition_subsumed_by(Condition::at_least("Age", 25), Condition::at_least("Age", 30)));
  CHECK(condition_subsumed_by(Condition::less_than("Age", 20), Condition::less_than("Age", 30)));
  CHECK(condition_subsumed_by(Condition::in_interval("Age", 10, 20),
                              Condition::less_than("Age", 30)));
  CHECK(!condition_subsumed_by(Condition::less_than("Age", 20), Condition::at_least("Age", 10)));
  CHECK(condition_subsumed_by(Condition::equals("G", "m"), Condition::equals("G", "m")));
  CHECK(!condition_subsumed_by(Condition::equals("G", "m"), Condition::equals("G", "f")));
  CHECK(!condition_subsumed_by(Condition::less_than("Age", 20), Condition::less_than("Bge", 30)));
}

TEST_CASE("knowledge validation rejects contradictions") {
  ExpertKnowledge k;
  k.preferred_conditions.push_back({Condition::equals("G", "m"), 1});
  k.forbidden_conditions.push_back(Condition::equals("G", "m"));
  CHECK_THROWS_AS(k.validate(), std::invalid_argument);

  ExpertKnowledge k2;
  k2.forbidden_attributes = {"G"};
  ExpertRule er;
  er.premise.push_back(Condition::equals("G", "m"));
  k2.initial_rules.push_back(er);
  CHECK_THROWS_AS(k2.validate(), std::invalid_argument);

  ExpertKnowledge k3;
  k3.preferred_conditions.push_back({Condition::equals("G", "m"), 0});
  CHECK_THROWS_AS(k3.validate(), std::invalid_argument);
}

TEST_CASE("premise helpers: replace never duplicate") {
  std::vector<Condition> premise;
  add_condition(premise, Condition::less_than("Age", 40));
  add_condition(premise, Condition::equals("Gender", "male"));
  add_condition(premise, Condition::less_than("Age", 30));
  REQUIRE(premise.size() == 2);
  CHECK(premise[0] == Condition::equals("Gender", "male"));
  CHECK(premise[1] == Condition::less_than("Age", 30));

  add_condition(premise, Condition::at_least("Age", 10));
  REQUIRE(premise.size() == 3);

  // An interval replaces both numeric directions.
  add_condition(premise, Condition::in_interval("Age", 15, 25));
  REQUIRE(premise.size() == 2);
  CHECK(premise[1] == Condition::in_interval("Age", 15, 25));

  // A one-sided condition keeps the other side of an interval.
  add_condition(premise, Condition::less_than("Age", 20));
  REQUIRE(premise.size() == 3);
  CHECK(premise[1] == Condition::at_least("Age", 15));
  CHECK(premise[2] == Condition::less_than("Age", 20));
}
