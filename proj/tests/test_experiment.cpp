#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <random>
#include <regex>
#include <sstream>

#include "rulekit/cli.hpp"
#include "rulekit/experiment.hpp"

using namespace rulekit;
using Catch::Approx;
namespace fs = std::filesystem;

#ifndef FIXTURE_DIR
#define FIXTURE_DIR "fixtures"
#endif

namespace {

std::string slurp(const fs::path& path) { return detail::read_file(path); }

fs::path fresh_dir(const std::string& tag) {
  static std::mt19937_64 rng(std::random_device{}());
  fs::path dir = fs::temp_directory_path() / ("rulekit-test-" + tag + "-" +
                                              std::to_string(rng()));
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

// Deterministic deals-like ARFF content.
std::string synthetic_deals(std::uint64_t seed, int rows) {
  std::mt19937_64 rng(seed);
  std::string text =
      "@relation deals\n"
      "@attribute Gender {male,female}\n"
      "@attribute Age numeric\n"
      "@attribute 'Payment Method' {'credit card',cash}\n"
      "@attribute 'Future Customer' {yes,no}\n"
      "@data\n";
  for (int i = 0; i < rows; ++i) {
    bool male = rng() % 2;
    int age = 18 + static_cast<int>(rng() % 50);
    bool card = rng() % 2;
    // Young males and card payers tend to come back; add a little noise.
    bool customer = (male && age < 35) || (card && age < 30);
    if (rng() % 12 == 0) customer = !customer;
    text += std::string(male ? "male" : "female") + "," + std::to_string(age) + "," +
            (card ? "'credit card'" : "cash") + "," + (customer ? "yes" : "no") + "\n";
  }
  return text;
}

std::string classification_xml() {
  return R"(<experiment>
  <parameter_sets>
    <parameter_set name="mincov=5, C2">
      <param name="min_rule_covered">5</param>
      <param name="induction_measure">C2</param>
      <param name="pruning_measure">C2</param>
      <param name="voting_measure">C2</param>
    </parameter_set>
  </parameter_sets>
  <datasets>
    <dataset>
      <label>Future Customer</label>
      <out_directory>./results</out_directory>
      <training>
        <report_file>training.log</report_file>
        <train>
          <in_file>train.arff</in_file>
          <model_file>deals.mdl</model_file>
        </train>
      </training>
      <prediction>
        <performance_file>performance.csv</performance_file>
        <predict>
          <model_file>deals.mdl</model_file>
          <test_file>test.arff</test_file>
          <predictions_file>deals-pred.arff</predictions_file>
        </predict>
      </prediction>
    </dataset>
  </datasets>
</experiment>)";
}

std::string mask_timings(const std::string& report) {
  return std::regex_replace(report, std::regex("time_[a-z_]+: [^\n]*"), "time: X");
}

}  // namespace

TEST_CASE("xml parser: elements, attributes, entities, comments") {
  auto root = parse_xml(
      "<?xml version=\"1.0\"?>\n<!-- top -->\n<a x=\"1\" y='two'>\n"
      "  <b>hello &amp; &lt;goodbye&gt;</b><!-- inner --><c/>\n</a>");
  CHECK(root.name == "a");
  REQUIRE(root.attribute("x") != nullptr);
  CHECK(*root.attribute("x") == "1");
  CHECK(*root.attribute("y") == "two");
  REQUIRE(root.child("b") != nullptr);
  CHECK(root.child("b")->text == "hello & <goodbye>");
  CHECK(root.child("c") != nullptr);

  CHECK_THROWS_AS(parse_xml("<a><b></a>"), ParseError);
  CHECK_THROWS_AS(parse_xml("<a>"), ParseError);
  CHECK_THROWS_AS(parse_xml("<a></a><b></b>"), ParseError);
}

TEST_CASE("experiment fixture parses to the documented parameter set") {
  std::string text = slurp(fs::path(FIXTURE_DIR) / "deals_experiment.xml");
  auto spec = parse_experiment(text, FIXTURE_DIR);

  REQUIRE(spec.parameter_sets.size() == 1);
  const auto& pset = spec.parameter_sets[0];
  CHECK(pset.name == "mincov=8, Entropy_User_C2");
  CHECK(pset.params.min_rule_covered == 8.0);
  CHECK(pset.params.induction_measure.name() == "BinaryEntropy");
  CHECK(pset.params.voting_measure.name() == "C2");
  REQUIRE(pset.params.pruning_measure.kind() == MeasureKind::UserDefined);
  CHECK(pset.params.pruning_measure.expression().unparse() == "2 * p / n");
  CHECK(pset.params.pruning_measure.expression().evaluate(3, 2, 0, 0) == Approx(3.0));
  CHECK(!pset.has_knowledge);

  REQUIRE(spec.datasets.size() == 1);
  const auto& ds = spec.datasets[0];
  REQUIRE(ds.label.has_value());
  CHECK(*ds.label == "Future Customer");
  CHECK(ds.out_directory == "./results-deals");
  CHECK(ds.report_file == "training.log");
  REQUIRE(ds.train_entries.size() == 1);
  CHECK(ds.train_entries[0].in_file == "../data/deals/deals-train.arff");
  CHECK(ds.train_entries[0].model_file == "deals.mdl");
  CHECK(ds.performance_file == "performance.csv");
  REQUIRE(ds.predict_entries.size() == 1);
  CHECK(ds.predict_entries[0].model_file == "deals.mdl");
  CHECK(ds.predict_entries[0].test_file == "../deals/data/deals-test.arff");
  CHECK(ds.predict_entries[0].predictions_file == "deals-pred.arff");
  CHECK(!ds.cross_validation.has_value());
}

TEST_CASE("experiment parsing: unknown names carry the XML path") {
  std::string bad = R"(<experiment><parameter_sets><parameter_set name="x">
    <param name="minrulecov">8</param>
  </parameter_set></parameter_sets>
  <datasets><dataset><label>c</label><out_directory>o</out_directory></dataset></datasets>
  </experiment>)";
  try {
    parse_experiment(bad);
    FAIL("expected an error");
  } catch (const ExperimentError& e) {
    CHECK(std::string(e.what()).find("minrulecov") != std::string::npos);
    CHECK(e.xml_path().find("/experiment/parameter_sets/parameter_set[1]") == 0);
  }

  std::string unknown_element = R"(<experiment><parameter_sets>
    <parameter_set name="x"><param name="min_rule_covered">5</param></parameter_set>
  </parameter_sets>
  <datasets><dataset><label>c</label><out_directory>o</out_directory>
  <surprise>1</surprise></dataset></datasets></experiment>)";
  CHECK_THROWS_AS(parse_experiment(unknown_element), ExperimentError);

  std::string missing_child = R"(<experiment><parameter_sets>
    <parameter_set name="x"></parameter_set></parameter_sets>
  <datasets><dataset><label>c</label></dataset></datasets></experiment>)";
  try {
    parse_experiment(missing_child);
    FAIL("expected an error");
  } catch (const ExperimentError& e) {
    CHECK(std::string(e.what()).find("out_directory") != std::string::npos);
  }

  std::string bad_expr = R"(<experiment><parameter_sets><parameter_set name="x">
    <param name="pruning_measure">UserDefined</param>
    <param name="user_pruning_equation">2 *</param>
  </parameter_set></parameter_sets>
  <datasets><dataset><label>c</label><out_directory>o</out_directory></dataset></datasets>
  </experiment>)";
  CHECK_THROWS_AS(parse_experiment(bad_expr), ExperimentError);
}

TEST_CASE("report formats: counts, weights and p-values") {
  CHECK(fmt_quad_value(176) == "176.0");
  CHECK(fmt_quad_value(0) == "0.0");
  CHECK(fmt_weight(0.6860465116279069) == "0.69");
  CHECK(fmt_weight(0.6955602536997886) == "0.70");
  CHECK(fmt_pvalue(3.79e-67) == "3.8E-67");
  CHECK(fmt_pvalue(2.94e-70) == "2.9E-70");
  CHECK(fmt_pvalue(1.0) == "1.0E+00");
  CHECK(fmt_metric(15) == "15.0");
  CHECK(fmt_metric(2) == "2.0");
  CHECK(fmt_metric(0.954) == "0.954");
  CHECK(fmt_metric(1.0 - 0.954) == "0.04600000000000004");
  CHECK(fmt_metric(22.533333333333335) == "22.533333333333335");
}

TEST_CASE("report: the documented rule line is regenerated byte-exactly") {
  Rule r1;
  r1.premise = {parse_condition("Gender = {male}"), parse_condition("Age = (-inf, 34.5)")};
  r1.consequence = RuleConsequence::for_class("yes");
  r1.stats = quad(176, 0, 473, 527);
  r1.weight = QualityMeasure(MeasureKind::C2).evaluate(r1.stats);
  r1.p_value = fisher_exact_greater(r1.stats).p_value;
  CHECK(rule_to_string(r1, 1, "Future Customer") ==
        "r1: IF Gender = {male} AND Age = (-inf, 34.5) THEN Future Customer = {yes} "
        "(p=176.0, n=0.0, P=473.0, N=527.0, weight=0.69, pval=3.8E-67)");
}

TEST_CASE("report: coverage tokenization with best-rule stars") {
  std::vector<std::vector<std::size_t>> covering = {
      {4, 11}, {2, 11}, {1, 13, 14}, {5, 10, 11, 12, 13, 14}, {4, 11}, {12, 13, 14}, {1, 14}};
  std::vector<int> best = {4, 2, 1, 10, 4, 12, 1};
  CHECK(coverage_to_string(covering, best) ==
        "5*,12;3*,12;2*,14,15;6,11*,12,13,14,15;5*,12;13*,14,15;2*,15");

  CHECK(coverage_to_string({{0}, {}, {0, 1}}, {0, -1, 1}) == "1*;-;1,2*");
}

TEST_CASE("report golden test: fixed toy data reproduces the frozen report") {
  // Hand-checked: Fisher tail for (4,0,4,6) is 1/C(10,4) = 1/210 = 4.8E-03,
  // C2 there is ((10/6)*1 - 4/6)*(1+4/4)/2 = 1. Mirrored for the no-class.
  std::string arff =
      "@relation toy\n"
      "@attribute Gender {male,female}\n"
      "@attribute Age numeric\n"
      "@attribute 'Future Customer' {yes,no}\n"
      "@data\n"
      "male,25,yes\nmale,30,yes\nmale,28,yes\nfemale,26,yes\n"
      "male,45,no\nfemale,50,no\nfemale,48,no\nfemale,52,no\nmale,60,no\nfemale,33,no\n";
  const std::string expected =
      "Rules:\n"
      "r1: IF Age = (-inf, 31.5) THEN Future Customer = {yes} "
      "(p=4.0, n=0.0, P=4.0, N=6.0, weight=1.00, pval=4.8E-03)\n"
      "r2: IF Age = <31.5, inf) THEN Future Customer = {no} "
      "(p=6.0, n=0.0, P=6.0, N=4.0, weight=1.00, pval=4.8E-03)\n"
      "\n"
      "Best rules covering examples from training set (1-based):\n"
      "1*;1*;1*;1*;2*;2*;2*;2*;2*;2*\n"
      "\n"
      "Model characteristics:\n"
      "time: X\n"
      "time: X\n"
      "time: X\n"
      "#rules: 2.0\n"
      "#conditions_per_rule: 1.0\n"
      "#induced_conditions_per_rule: 1.0\n"
      "avg_rule_coverage: 0.5\n"
      "avg_rule_precision: 1.0\n"
      "\n"
      "Training set performance:\n"
      "accuracy: 1.0\n"
      "classification_error: 0.0\n"
      "kappa: 1.0\n"
      "balanced_accuracy: 1.0\n"
      "#rules_per_example: 1.0\n"
      "precision_yes: 1.0\n"
      "recall_yes: 1.0\n"
      "f1_yes: 1.0\n"
      "precision_no: 1.0\n"
      "recall_no: 1.0\n"
      "f1_no: 1.0\n";

  auto ds = set_roles(parse_arff(arff), "Future Customer");
  InductionParams params;
  params.min_rule_covered = 2;
  for (unsigned threads : {1u, 4u}) {
    params.threads = threads;
    auto rs = induce(ds, params);
    auto metrics = evaluate(rs, predict(rs, ds), ds);
    std::ostringstream os;
    write_training_report(rs, metrics, os);
    INFO("threads = " << threads);
    CHECK(mask_timings(os.str()) == expected);
  }
}

TEST_CASE("experiment run: training, model, predictions and performance files") {
  auto dir = fresh_dir("e2e");
  write_file(dir / "train.arff", synthetic_deals(1, 160));
  write_file(dir / "test.arff", synthetic_deals(2, 60));
  write_file(dir / "experiment.xml", classification_xml());

  auto spec = parse_experiment(slurp(dir / "experiment.xml"), dir);
  RunOptions options;
  options.threads = 2;
  std::ostringstream log;
  int status = run(spec, options, log);
  INFO(log.str());
  REQUIRE(status == 0);

  auto out = dir / "results";
  REQUIRE(fs::exists(out / "training.log"));
  REQUIRE(fs::exists(out / "deals.mdl"));
  REQUIRE(fs::exists(out / "deals-pred.arff"));
  REQUIRE(fs::exists(out / "performance.csv"));

  std::string report = slurp(out / "training.log");
  CHECK(report.find("Rules:\n") == 0);
  CHECK(report.find("r1: IF ") != std::string::npos);
  CHECK(report.find("Best rules covering examples from training set (1-based):") !=
        std::string::npos);
  CHECK(report.find("Model characteristics:") != std::string::npos);
  CHECK(report.find("#induced_conditions_per_rule: ") != std::string::npos);
  CHECK(report.find("Training set performance:") != std::string::npos);
  CHECK(report.find("accuracy: ") != std::string::npos);
  CHECK(report.find("#rules_per_example: ") != std::string::npos);

  // The model file reloads and the predictions ARFF gained one attribute.
  std::ifstream model_in(out / "deals.mdl");
  auto model = deserialize_model(model_in);
  CHECK(!model.rules.empty());
  auto pred_ds = parse_arff(slurp(out / "deals-pred.arff"));
  CHECK(pred_ds.attribute_count() == 5);
  CHECK(pred_ds.attribute(4).name == "prediction");
  CHECK(pred_ds.row_count() == 60);

  std::string perf = slurp(out / "performance.csv");
  CHECK(perf.find("model_file,test_file,accuracy,classification_error,kappa,"
                  "balanced_accuracy,#rules_per_example") == 0);
  CHECK(perf.find("deals.mdl,test.arff,") != std::string::npos);

  // Determinism: the same spec run twice gives byte-identical reports and
  // predictions once timing lines are masked.
  auto dir2 = fresh_dir("e2e-repeat");
  write_file(dir2 / "train.arff", synthetic_deals(1, 160));
  write_file(dir2 / "test.arff", synthetic_deals(2, 60));
  auto spec2 = parse_experiment(classification_xml(), dir2);
  RunOptions options2;
  options2.threads = 7;
  REQUIRE(run(spec2, options2, log) == 0);
  CHECK(mask_timings(slurp(dir2 / "results" / "training.log")) == mask_timings(report));
  CHECK(slurp(dir2 / "results" / "deals-pred.arff") == slurp(out / "deals-pred.arff"));
  CHECK(slurp(dir2 / "results" / "performance.csv") == slurp(out / "performance.csv"));
  fs::remove_all(dir);
  fs::remove_all(dir2);
}

TEST_CASE("experiment run: a missing input fails that entry but not the rest") {
  auto dir = fresh_dir("missing");
  write_file(dir / "train.arff", synthetic_deals(3, 80));
  std::string xml = R"(<experiment>
  <parameter_sets>
    <parameter_set name="p"><param name="min_rule_covered">4</param></parameter_set>
  </parameter_sets>
  <datasets>
    <dataset>
      <label>Future Customer</label>
      <out_directory>./broken</out_directory>
      <training>
        <report_file>training.log</report_file>
        <train><in_file>nope.arff</in_file><model_file>m.mdl</model_file></train>
      </training>
    </dataset>
    <dataset>
      <label>Future Customer</label>
      <out_directory>./ok</out_directory>
      <training>
        <report_file>training.log</report_file>
        <train><in_file>train.arff</in_file><model_file>m.mdl</model_file></train>
      </training>
    </dataset>
  </datasets>
</experiment>)";
  auto spec = parse_experiment(xml, dir);
  std::ostringstream log;
  int status = run(spec, {}, log);
  CHECK(status == 1);
  CHECK(log.str().find("nope.arff") != std::string::npos);
  CHECK(fs::exists(dir / "ok" / "training.log"));
  CHECK(fs::exists(dir / "ok" / "m.mdl"));
  fs::remove_all(dir);
}

TEST_CASE("experiment run: cross-validation reports per-fold and mean metrics") {
  auto dir = fresh_dir("cv");
  write_file(dir / "train.arff", synthetic_deals(4, 90));
  std::string xml = R"(<experiment>
  <parameter_sets>
    <parameter_set name="p"><param name="min_rule_covered">4</param></parameter_set>
  </parameter_sets>
  <datasets>
    <dataset>
      <label>Future Customer</label>
      <out_directory>./cv</out_directory>
      <training>
        <report_file>training.log</report_file>
        <train><in_file>train.arff</in_file><model_file>m.mdl</model_file></train>
      </training>
      <cross_validation><folds>3</folds><seed>11</seed></cross_validation>
    </dataset>
  </datasets>
</experiment>)";
  auto spec = parse_experiment(xml, dir);
  REQUIRE(spec.datasets[0].cross_validation.has_value());
  CHECK(spec.datasets[0].cross_validation->folds == 3);
  CHECK(spec.datasets[0].cross_validation->seed == 11);

  std::ostringstream log;
  REQUIRE(run(spec, {}, log) == 0);
  std::string report = slurp(dir / "cv" / "training.log");
  CHECK(report.find("Cross-validation performance (3 folds, seed 11):") != std::string::npos);
  CHECK(report.find("fold_1:") != std::string::npos);
  CHECK(report.find("fold_3:") != std::string::npos);
  CHECK(report.find("fold_mean:") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("experiment run: survival emits curve CSVs") {
  auto dir = fresh_dir("surv");
  std::string arff =
      "@relation bmt\n"
      "@attribute grp {fast,slow}\n"
      "@attribute survival_time numeric\n"
      "@attribute survival_status numeric\n"
      "@data\n";
  std::mt19937_64 rng(5);
  for (int i = 0; i < 30; ++i)
    arff += "fast," + std::to_string(1 + rng() % 10) + "," + (rng() % 4 ? "1" : "0") + "\n";
  for (int i = 0; i < 30; ++i)
    arff += "slow," + std::to_string(60 + rng() % 40) + "," + (rng() % 4 ? "1" : "0") + "\n";
  write_file(dir / "train.arff", arff);
  write_file(dir / "test.arff", arff);

  std::string xml = R"(<experiment>
  <parameter_sets>
    <parameter_set name="p"><param name="min_rule_covered">5</param></parameter_set>
  </parameter_sets>
  <datasets>
    <dataset>
      <survival_time>survival_time</survival_time>
      <survival_status>survival_status</survival_status>
      <out_directory>./out</out_directory>
      <training>
        <report_file>training.log</report_file>
        <train><in_file>train.arff</in_file><model_file>bmt.mdl</model_file></train>
      </training>
      <prediction>
        <performance_file>performance.csv</performance_file>
        <predict><model_file>bmt.mdl</model_file><test_file>test.arff</test_file>
        <predictions_file>pred.arff</predictions_file></predict>
      </prediction>
    </dataset>
  </datasets>
</experiment>)";
  auto spec = parse_experiment(xml, dir);
  std::ostringstream log;
  int status = run(spec, {}, log);
  INFO(log.str());
  REQUIRE(status == 0);

  auto out = dir / "out";
  REQUIRE(fs::exists(out / "bmt-curves.csv"));
  REQUIRE(fs::exists(out / "pred-curves.csv"));
  REQUIRE(fs::exists(out / "performance.csv"));
  std::string train_curves = slurp(out / "bmt-curves.csv");
  CHECK(train_curves.find("time,default,r1") == 0);
  std::string perf = slurp(out / "performance.csv");
  CHECK(perf.find("integrated_brier_score") != std::string::npos);
  std::string report = slurp(out / "training.log");
  CHECK(report.find("(survival estimate attached)") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("experiment run: unlabelled test data yields predictions but no metrics") {
  auto dir = fresh_dir("unlabelled");
  write_file(dir / "train.arff", synthetic_deals(8, 80));
  // Test file without the label column.
  std::string test =
      "@relation deals\n@attribute Gender {male,female}\n@attribute Age numeric\n"
      "@attribute 'Payment Method' {'credit card',cash}\n@data\n"
      "male,25,cash\nfemale,40,'credit card'\n";
  write_file(dir / "test.arff", test);
  write_file(dir / "experiment.xml", classification_xml());
  auto spec = parse_experiment(slurp(dir / "experiment.xml"), dir);
  std::ostringstream log;
  REQUIRE(run(spec, {}, log) == 0);

  auto pred_ds = parse_arff(slurp(dir / "results" / "deals-pred.arff"));
  CHECK(pred_ds.attribute_count() == 4);
  CHECK(pred_ds.attribute(3).name == "prediction");
  std::string perf = slurp(dir / "results" / "performance.csv");
  CHECK(perf == "model_file,test_file\ndeals.mdl,test.arff\n");
  fs::remove_all(dir);
}

TEST_CASE("experiment run: a misconfigured measure fails the entry cleanly") {
  auto dir = fresh_dir("logrank-misuse");
  write_file(dir / "train.arff", synthetic_deals(9, 60));
  std::string xml = R"(<experiment>
  <parameter_sets>
    <parameter_set name="p">
      <param name="min_rule_covered">4</param>
      <param name="induction_measure">LogRank</param>
    </parameter_set>
  </parameter_sets>
  <datasets>
    <dataset>
      <label>Future Customer</label>
      <out_directory>./out</out_directory>
      <training>
        <report_file>training.log</report_file>
        <train><in_file>train.arff</in_file><model_file>m.mdl</model_file></train>
      </training>
    </dataset>
  </datasets>
</experiment>)";
  auto spec = parse_experiment(xml, dir);
  std::ostringstream log;
  CHECK(run(spec, {}, log) == 1);
  CHECK(log.str().find("LogRank") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("cli: usage, validate, and run") {
  auto dir = fresh_dir("cli");
  write_file(dir / "train.arff", synthetic_deals(6, 60));
  write_file(dir / "test.arff", synthetic_deals(7, 30));
  write_file(dir / "experiment.xml", classification_xml());
  write_file(dir / "bad.xml", "<experiment><nope/></experiment>");

  std::ostringstream out, err;
  const char* no_args[] = {"rulekit"};
  CHECK(cli_main(1, no_args, out, err) != 0);
  CHECK(!err.str().empty());

  std::string xml_path = (dir / "experiment.xml").string();
  const char* validate_args[] = {"rulekit", "--validate", xml_path.c_str()};
  std::ostringstream out2, err2;
  CHECK(cli_main(3, validate_args, out2, err2) == 0);
  CHECK(out2.str().find("OK") == 0);

  std::string bad_path = (dir / "bad.xml").string();
  const char* bad_args[] = {"rulekit", "--validate", bad_path.c_str()};
  std::ostringstream out3, err3;
  CHECK(cli_main(3, bad_args, out3, err3) != 0);
  CHECK(err3.str().find("/experiment") != std::string::npos);

  const char* run_args[] = {"rulekit", xml_path.c_str(), "--threads", "2", "--seed", "3"};
  std::ostringstream out4, err4;
  CHECK(cli_main(6, run_args, out4, err4) == 0);
  CHECK(fs::exists(dir / "results" / "deals.mdl"));
  fs::remove_all(dir);
}
