#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "rulekit/csv.hpp"
#include "rulekit/induction.hpp"
#include "rulekit/prediction.hpp"

using namespace rulekit;
using Catch::Approx;

namespace {

// A two-attribute classification schema: numeric x, nominal label c{a,b}.
RuleSet toy_classifier() {
  RuleSet rs;
  rs.task = Task::classification;
  Attribute x{"x", AttributeKind::numeric, AttributeRole::regular, {}};
  Attribute c{"c", AttributeKind::nominal, AttributeRole::label, {"a", "b"}};
  rs.schema = {x, c};
  rs.default_class = "b";
  return rs;
}

Rule class_rule(std::vector<Condition> premise, const std::string& level, double weight) {
  Rule r;
  r.premise = std::move(premise);
  r.consequence = RuleConsequence::for_class(level);
  r.weight = weight;
  r.stats = quad(1, 0, 1, 1);
  return r;
}

DataSet xs(std::initializer_list<double> values) {
  std::string text = "x,c\n";
  for (double v : values) text += std::to_string(v) + ",a\n";
  return set_roles(parse_csv(text, true), "c");
}

}  // namespace

TEST_CASE("predict: a single covering rule decides the class") {
  auto rs = toy_classifier();
  rs.rules.push_back(class_rule({Condition::less_than("x", 10)}, "a", 0.9));
  auto pred = predict(rs, xs({5}));
  REQUIRE(pred.class_predictions.size() == 1);
  CHECK(pred.class_predictions[0] == "a");
  CHECK(pred.covering_rules[0] == std::vector<std::size_t>{0});
  CHECK(!pred.default_used[0]);
}

TEST_CASE("predict: the heavier vote wins") {
  auto rs = toy_classifier();
  rs.rules.push_back(class_rule({Condition::less_than("x", 10)}, "a", 0.7));
  rs.rules.push_back(class_rule({Condition::less_than("x", 20)}, "b", 0.3));
  auto pred = predict(rs, xs({5}));
  CHECK(pred.class_predictions[0] == "a");
}

TEST_CASE("predict: vote ties break by class level order") {
  auto rs = toy_classifier();
  rs.rules.push_back(class_rule({Condition::less_than("x", 10)}, "b", 0.5));
  rs.rules.push_back(class_rule({Condition::less_than("x", 20)}, "a", 0.5));
  auto pred = predict(rs, xs({5}));
  CHECK(pred.class_predictions[0] == "a");
}

TEST_CASE("predict: uncovered examples fall back to the default class") {
  auto rs = toy_classifier();
  rs.rules.push_back(class_rule({Condition::less_than("x", 10)}, "a", 0.9));
  auto pred = predict(rs, xs({50}));
  CHECK(pred.class_predictions[0] == "b");
  CHECK(pred.default_used[0]);
}

TEST_CASE("predict: missing tested value is never covered") {
  auto rs = toy_classifier();
  rs.rules.push_back(class_rule({Condition::less_than("x", 10)}, "a", 0.9));
  auto ds = set_roles(parse_csv("x,c\n?,a\n", true), "c");
  auto pred = predict(rs, ds);
  CHECK(pred.default_used[0]);
}

TEST_CASE("predict: incompatible schema names the attribute") {
  auto rs = toy_classifier();
  rs.rules.push_back(class_rule({Condition::less_than("Age", 10)}, "a", 0.9));
  try {
    predict(rs, xs({5}));
    FAIL("expected an error");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("Age") != std::string::npos);
  }
}

TEST_CASE("predict: regression weight-weighted mean") {
  RuleSet rs;
  rs.task = Task::regression;
  Attribute x{"x", AttributeKind::numeric, AttributeRole::regular, {}};
  Attribute y{"y", AttributeKind::numeric, AttributeRole::label, {}};
  rs.schema = {x, y};
  rs.default_value = -1;
  Rule r1;
  r1.premise = {Condition::less_than("x", 10)};
  r1.consequence = RuleConsequence::for_value(10, 1);
  r1.weight = 1;
  Rule r2;
  r2.premise = {Condition::less_than("x", 20)};
  r2.consequence = RuleConsequence::for_value(20, 1);
  r2.weight = 3;
  rs.rules = {r1, r2};

  auto ds = set_roles(parse_csv("x,y\n5,0\n15,0\n99,0\n", true), "y");
  auto pred = predict(rs, ds);
  CHECK(pred.value_predictions[0] == Approx(17.5));
  CHECK(pred.value_predictions[1] == Approx(20.0));
  CHECK(pred.value_predictions[2] == Approx(-1.0));
  CHECK(pred.default_used[2]);
}

TEST_CASE("predict: survival averages covering curves on the union grid") {
  RuleSet rs;
  rs.task = Task::survival;
  Attribute x{"x", AttributeKind::numeric, AttributeRole::regular, {}};
  Attribute t{"survival_time", AttributeKind::numeric, AttributeRole::survival_time, {}};
  Attribute s{"survival_status", AttributeKind::numeric, AttributeRole::survival_status, {}};
  rs.schema = {x, t, s};
  Rule r1;
  r1.premise = {Condition::less_than("x", 10)};
  r1.consequence = RuleConsequence::for_survival({{{1.0, 0.5}, {3.0, 0.25}}});
  r1.weight = 1;
  Rule r2;
  r2.premise = {Condition::less_than("x", 20)};
  r2.consequence = RuleConsequence::for_survival({{{2.0, 0.8}}});
  r2.weight = 1;
  rs.rules = {r1, r2};
  rs.default_survival = SurvivalEstimate{};

  auto ds = set_roles(parse_csv("x,survival_time,survival_status\n5,4,1\n", true), std::nullopt,
                      "survival_time", "survival_status");
  auto pred = predict(rs, ds);
  const auto& est = pred.survival_predictions[0];
  REQUIRE(est.points.size() == 3);
  CHECK(est.points[0].time == 1.0);
  CHECK(est.points[0].probability == Approx((0.5 + 1.0) / 2));
  CHECK(est.points[1].time == 2.0);
  CHECK(est.points[1].probability == Approx((0.5 + 0.8) / 2));
  CHECK(est.points[2].time == 3.0);
  CHECK(est.points[2].probability == Approx((0.25 + 0.8) / 2));

  // Curves stay monotone for every example.
  double prev = 1.0;
  for (const auto& pt : est.points) {
    CHECK(pt.probability <= prev + 1e-12);
    prev = pt.probability;
  }
}

TEST_CASE("evaluate_classification: all predictions correct") {
  auto ds = set_roles(parse_csv("x,c\n1,a\n2,b\n3,a\n", true), "c");
  PredictionResult pred;
  pred.task = Task::classification;
  pred.class_predictions = {"a", "b", "a"};
  pred.covering_rules = {{0}, {1}, {0, 1}};
  pred.default_used = {false, false, false};
  auto report = evaluate_classification(pred, ds);
  CHECK(report.at("accuracy") == Approx(1.0));
  CHECK(report.at("classification_error") == Approx(0.0).margin(1e-15));
  CHECK(report.at("kappa") == Approx(1.0));
  CHECK(report.at("#rules_per_example") == Approx(4.0 / 3.0));
}

TEST_CASE("evaluate_classification: hand-computed kappa from a 2x2 confusion") {
  // Confusion [[40,10],[10,40]]: accuracy .8, chance .5, kappa .6.
  std::string text = "x,c\n";
  PredictionResult pred;
  pred.task = Task::classification;
  auto emit = [&](const std::string& truth, const std::string& predicted, int copies) {
    for (int i = 0; i < copies; ++i) {
      text += "0," + truth + "\n";
      pred.class_predictions.push_back(predicted);
      pred.covering_rules.push_back({0});
      pred.default_used.push_back(false);
    }
  };
  emit("a", "a", 40);
  emit("a", "b", 10);
  emit("b", "a", 10);
  emit("b", "b", 40);
  auto ds = set_roles(parse_csv(text, true), "c");
  auto report = evaluate_classification(pred, ds);
  CHECK(report.at("accuracy") == Approx(0.8));
  CHECK(report.at("kappa") == Approx(0.6));
  CHECK(report.at("balanced_accuracy") == Approx(0.8));
}

TEST_CASE("evaluate_classification: report keys spell the documented names") {
  auto ds = set_roles(parse_csv("x,c\n1,a\n2,b\n", true), "c");
  PredictionResult pred;
  pred.task = Task::classification;
  pred.class_predictions = {"a", "b"};
  pred.covering_rules = {{0}, {}};
  pred.default_used = {false, true};
  auto report = evaluate_classification(pred, ds);
  const char* expected[] = {"accuracy", "classification_error", "kappa",
                            "balanced_accuracy", "#rules_per_example"};
  for (std::size_t i = 0; i < 5; ++i) CHECK(report.entries[i].first == expected[i]);
  CHECK(report.has("precision_a"));
  CHECK(report.has("recall_b"));
}

TEST_CASE("evaluate_classification: self-agreement has kappa 1 with >= 2 classes") {
  std::mt19937_64 rng(9);
  for (int iter = 0; iter < 50; ++iter) {
    std::string text = "x,c\n";
    PredictionResult pred;
    pred.task = Task::classification;
    std::size_t n = 2 + rng() % 20;
    bool two = false;
    for (std::size_t i = 0; i < n; ++i) {
      std::string level = rng() % 2 ? "a" : "b";
      if (i == 1 && !two) level = "b";
      text += "0," + level + "\n";
      pred.class_predictions.push_back(level);
      pred.covering_rules.push_back({});
      pred.default_used.push_back(true);
      if (level == "b") two = true;
    }
    auto ds = set_roles(parse_csv(text, true), "c");
    auto report = evaluate_classification(pred, ds);
    CHECK(report.at("accuracy") == Approx(1.0));
    CHECK(report.at("kappa") == Approx(1.0));
  }
}

TEST_CASE("evaluate_regression: perfect, constant and single-example cases") {
  auto ds = set_roles(parse_csv("x,y\n1,5\n2,7\n", true), "y");
  PredictionResult perfect;
  perfect.task = Task::regression;
  perfect.value_predictions = {5, 7};
  perfect.covering_rules = {{0}, {0}};
  perfect.default_used = {false, false};
  auto report = evaluate_regression(perfect, ds);
  CHECK(report.at("rmse") == Approx(0.0).margin(1e-15));
  CHECK(report.at("mae") == Approx(0.0).margin(1e-15));

  // Constant prediction c on labels {c-1, c+1}.
  auto ds2 = set_roles(parse_csv("x,y\n1,4\n2,6\n", true), "y");
  PredictionResult constant;
  constant.task = Task::regression;
  constant.value_predictions = {5, 5};
  constant.covering_rules = {{0}, {0}};
  constant.default_used = {false, false};
  auto report2 = evaluate_regression(constant, ds2);
  CHECK(report2.at("mae") == Approx(1.0));
  CHECK(report2.at("rmse") == Approx(1.0));
  CHECK(report2.at("correlation") == 0.0);  // zero-variance predictions
  CHECK(!report2.notes.empty());

  auto ds3 = set_roles(parse_csv("x,y\n1,4\n", true), "y");
  PredictionResult single;
  single.task = Task::regression;
  single.value_predictions = {6.5};
  single.covering_rules = {{0}};
  single.default_used = {false};
  auto report3 = evaluate_regression(single, ds3);
  CHECK(report3.at("rmse") == Approx(2.5));
}

namespace {

DataSet survival_ds(const std::vector<double>& times, const std::vector<int>& events) {
  std::string text = "survival_time,survival_status\n";
  for (std::size_t i = 0; i < times.size(); ++i)
    text += std::to_string(times[i]) + "," + std::to_string(events[i]) + "\n";
  return set_roles(parse_csv(text, true), std::nullopt, "survival_time", "survival_status");
}

PredictionResult constant_survival(std::size_t n, SurvivalEstimate est) {
  PredictionResult pred;
  pred.task = Task::survival;
  pred.survival_predictions.assign(n, est);
  pred.covering_rules.assign(n, {0});
  pred.default_used.assign(n, false);
  return pred;
}

}  // namespace

TEST_CASE("evaluate_survival: hand-computed integrated Brier score") {
  auto ds = survival_ds({1, 2, 3}, {1, 1, 1});
  // S == 1 predictions, no censoring: BS(t) = fraction of past events.
  auto report = evaluate_survival(constant_survival(3, {}), ds, SurvivalEstimate{});
  CHECK(report.at("integrated_brier_score") == Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("evaluate_survival: all-censored data contributes nothing") {
  auto ds = survival_ds({1, 2, 3}, {0, 0, 0});
  auto censoring = kaplan_meier({1, 2, 3}, {1, 1, 1});
  auto report = evaluate_survival(constant_survival(3, {}), ds, censoring);
  CHECK(report.at("integrated_brier_score") == Approx(0.0).margin(1e-15));
}

TEST_CASE("evaluate_survival: censoring weights divide by the censoring estimate") {
  // times [1,2], events [1,0]; censoring estimate drops to 0 at t=2, so the
  // event term at t=1 is weighted by G(1-) = 1 and the censored example
  // contributes nothing once its weight hits zero.
  auto ds = survival_ds({1, 2}, {1, 0});
  auto censoring = kaplan_meier({1, 2}, {0, 1});
  REQUIRE(censoring.probability_at(2) == Approx(0.0).margin(1e-15));
  auto report = evaluate_survival(constant_survival(2, {}), ds, censoring);
  CHECK(report.at("integrated_brier_score") == Approx(0.25).epsilon(1e-12));
}

TEST_CASE("evaluate_survival: matching the empirical curve beats S == 1") {
  auto ds = survival_ds({1, 2, 3}, {1, 1, 1});
  auto empirical = kaplan_meier({1, 2, 3}, {1, 1, 1});
  auto matched = evaluate_survival(constant_survival(3, empirical), ds, SurvivalEstimate{});
  auto baseline = evaluate_survival(constant_survival(3, {}), ds, SurvivalEstimate{});
  CHECK(matched.at("integrated_brier_score") == Approx(4.0 / 27.0).epsilon(1e-12));
  CHECK(matched.at("integrated_brier_score") < baseline.at("integrated_brier_score"));
}

TEST_CASE("model characteristics: documented keys and means") {
  RuleSet rs = toy_classifier();
  for (int i = 0; i < 15; ++i) {
    Rule r = class_rule({Condition::less_than("x", 10), Condition::at_least("x", 1)}, "a", 1);
    r.grown_condition_count = 5;
    r.stats = quad(10, i % 2 ? 0 : 10.0 / 9.0, 50, 50);
    rs.rules.push_back(r);
  }
  auto report = model_characteristics(rs);
  CHECK(report.at("#rules") == Approx(15.0));
  CHECK(report.at("#conditions_per_rule") == Approx(2.0));
  CHECK(report.at("#induced_conditions_per_rule") == Approx(5.0));
  CHECK(report.has("time_total_s"));
  CHECK(report.has("time_growing_s"));
  CHECK(report.has("time_pruning_s"));

  RuleSet single = toy_classifier();
  Rule whole = class_rule({}, "a", 1);
  whole.stats = quad(50, 50, 50, 50);
  single.rules.push_back(whole);
  CHECK(model_characteristics(single).at("avg_rule_coverage") == Approx(1.0));

  RuleSet two = toy_classifier();
  Rule r1 = class_rule({}, "a", 1);
  r1.stats = quad(10, 0, 50, 50);
  Rule r2 = class_rule({}, "a", 1);
  r2.stats = quad(9, 1, 50, 50);
  two.rules = {r1, r2};
  CHECK(model_characteristics(two).at("avg_rule_precision") == Approx(0.95));

  RuleSet empty = toy_classifier();
  CHECK_THROWS_AS(model_characteristics(empty), std::invalid_argument);
}

TEST_CASE("voting is invariant under positive weight scaling") {
  std::mt19937_64 rng(21);
  for (int iter = 0; iter < 100; ++iter) {
    auto rs = toy_classifier();
    std::size_t rules = 1 + rng() % 6;
    for (std::size_t i = 0; i < rules; ++i) {
      double threshold = static_cast<double>(rng() % 30);
      auto r = class_rule({Condition::less_than("x", threshold)}, rng() % 2 ? "a" : "b",
                          0.1 + static_cast<double>(rng() % 100) / 50.0);
      rs.rules.push_back(r);
    }
    auto scaled = rs;
    double factor = 0.25 + static_cast<double>(rng() % 100) / 10.0;
    for (auto& r : scaled.rules) r.weight *= factor;

    auto ds = xs({static_cast<double>(rng() % 35), static_cast<double>(rng() % 35)});
    auto a = predict(rs, ds);
    auto b = predict(scaled, ds);
    CHECK(a.class_predictions == b.class_predictions);
  }
}

TEST_CASE("rules_per_example agrees with the training coverage bookkeeping") {
  std::mt19937_64 rng(22);
  std::string text = "x,g,c\n";
  for (int i = 0; i < 60; ++i)
    text += std::to_string(rng() % 10) + "," + (rng() % 2 ? "u" : "v") + "," +
            (rng() % 2 ? "yes" : "no") + "\n";
  auto ds = set_roles(parse_csv(text, true), "c");
  InductionParams params;
  params.min_rule_covered = 2;
  auto rs = induce_classification(ds, params);
  auto pred = predict(rs, ds);
  auto report = evaluate_classification(pred, ds);

  double total = 0;
  for (const auto& covering : rs.training_coverage) total += covering.size();
  CHECK(report.at("#rules_per_example") ==
        Approx(total / static_cast<double>(ds.row_count())));
  CHECK(pred.covering_rules == rs.training_coverage);
}
