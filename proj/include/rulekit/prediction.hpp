#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "rulekit/dataset.hpp"
#include "rulekit/rule.hpp"

namespace rulekit {

/// Ordered name -> value map for metrics and model characteristics; the
/// insertion order is the report and CSV column order.
struct PerformanceReport {
  std::vector<std::pair<std::string, double>> entries;
  std::vector<std::string> notes;

  void add(std::string name, double value) { entries.emplace_back(std::move(name), value); }

  bool has(std::string_view name) const {
    for (const auto& [k, v] : entries)
      if (k == name) return true;
    return false;
  }

  double at(std::string_view name) const {
    for (const auto& [k, v] : entries)
      if (k == name) return v;
    throw std::out_of_range("no metric named " + std::string(name));
  }
};

struct PredictionResult {
  Task task = Task::classification;
  std::vector<std::string> class_predictions;
  std::vector<double> value_predictions;
  std::vector<SurvivalEstimate> survival_predictions;
  std::vector<std::vector<std::size_t>> covering_rules;
  std::vector<bool> default_used;

  std::size_t size() const { return covering_rules.size(); }
};

namespace detail {

// Binds every premise condition against the target schema; unknown
// attributes or kind mismatches fail here, naming the attribute.
inline std::vector<std::vector<BoundCondition>> bind_rules(const RuleSet& rs,
                                                           const DataSet& ds) {
  std::vector<std::vector<BoundCondition>> bound(rs.rules.size());
  for (std::size_t i = 0; i < rs.rules.size(); ++i)
    for (const auto& c : rs.rules[i].premise) bound[i].push_back(bind_condition(ds, c));
  return bound;
}

inline std::vector<double> union_time_grid(const RuleSet& rs) {
  std::set<double> grid;
  for (const auto& rule : rs.rules)
    for (const auto& pt : rule.consequence.survival.points) grid.insert(pt.time);
  for (const auto& pt : rs.default_survival.points) grid.insert(pt.time);
  return {grid.begin(), grid.end()};
}

}  // namespace detail

/// Applies a rule set: classification votes rule weights per class with
/// class-order tie-break, regression takes the weight-weighted mean of rule
/// values, survival averages the covering rules' curves pointwise on the
/// union time grid. Uncovered examples get the default response.
inline PredictionResult predict(const RuleSet& rs, const DataSet& ds) {
  auto bound = detail::bind_rules(rs, ds);

  PredictionResult out;
  out.task = rs.task;
  const std::size_t n = ds.row_count();
  out.covering_rules.resize(n);
  out.default_used.resize(n, false);

  std::vector<std::string> class_levels;
  if (rs.task == Task::classification) {
    for (const auto& attr : rs.schema)
      if (attr.role == AttributeRole::label) class_levels = attr.levels;
  }
  std::vector<double> grid;
  if (rs.task == Task::survival) grid = detail::union_time_grid(rs);

  for (std::size_t r = 0; r < n; ++r) {
    auto& covering = out.covering_rules[r];
    for (std::size_t i = 0; i < rs.rules.size(); ++i) {
      bool covered = true;
      for (const auto& b : bound[i])
        if (!covers_row(ds, r, b)) {
          covered = false;
          break;
        }
      if (covered) covering.push_back(i);
    }
    out.default_used[r] = covering.empty();

    switch (rs.task) {
      case Task::classification: {
        if (covering.empty()) {
          out.class_predictions.push_back(rs.default_class);
          break;
        }
        std::vector<double> votes(class_levels.size(), 0.0);
        for (std::size_t i : covering) {
          const auto& level = rs.rules[i].consequence.class_level;
          for (std::size_t l = 0; l < class_levels.size(); ++l)
            if (class_levels[l] == level) votes[l] += rs.rules[i].weight;
        }
        std::size_t winner = 0;
        for (std::size_t l = 1; l < votes.size(); ++l)
          if (votes[l] > votes[winner]) winner = l;  // ties keep class level order
        out.class_predictions.push_back(class_levels[winner]);
        break;
      }
      case Task::regression: {
        if (covering.empty()) {
          out.value_predictions.push_back(rs.default_value);
          break;
        }
        double weight_sum = 0, weighted = 0, plain = 0;
        for (std::size_t i : covering) {
          weight_sum += rs.rules[i].weight;
          weighted += rs.rules[i].weight * rs.rules[i].consequence.value;
          plain += rs.rules[i].consequence.value;
        }
        out.value_predictions.push_back(weight_sum != 0
                                            ? weighted / weight_sum
                                            : plain / static_cast<double>(covering.size()));
        break;
      }
      case Task::survival: {
        if (covering.empty()) {
          out.survival_predictions.push_back(rs.default_survival);
          break;
        }
        SurvivalEstimate mean;
        for (double t : grid) {
          double sum = 0;
          for (std::size_t i : covering)
            sum += rs.rules[i].consequence.survival.probability_at(t);
          mean.points.push_back({t, sum / static_cast<double>(covering.size())});
        }
        out.survival_predictions.push_back(std::move(mean));
        break;
      }
    }
  }
  return out;
}

/// Classification metrics: accuracy, error, Cohen's kappa (chance agreement
/// from marginal products), balanced accuracy (mean per-class recall), mean
/// covering-rule count, and per-class precision/recall/F1.
inline PerformanceReport evaluate_classification(const PredictionResult& pred,
                                                 const DataSet& ds) {
  if (ds.row_count() == 0) throw std::invalid_argument("empty evaluation set");
  if (pred.class_predictions.size() != ds.row_count())
    throw std::invalid_argument("prediction/truth length mismatch");
  int label_col = ds.label_index();
  if (label_col < 0) throw std::invalid_argument("evaluation set has no label attribute");
  const auto label = static_cast<std::size_t>(label_col);

  // Level universe: truth declaration order, then unseen predicted levels.
  std::vector<std::string> levels = ds.attribute(label).levels;
  for (const auto& p : pred.class_predictions)
    if (std::find(levels.begin(), levels.end(), p) == levels.end()) levels.push_back(p);
  auto level_of = [&](const std::string& name) {
    return static_cast<std::size_t>(
        std::find(levels.begin(), levels.end(), name) - levels.begin());
  };

  const std::size_t k = levels.size();
  std::vector<std::vector<double>> confusion(k, std::vector<double>(k, 0.0));
  double counted = 0;
  for (std::size_t r = 0; r < ds.row_count(); ++r) {
    if (ds.is_missing(r, label)) continue;
    std::size_t truth = static_cast<std::size_t>(ds.cell(r, label));
    std::size_t predicted = level_of(pred.class_predictions[r]);
    confusion[truth][predicted] += 1;
    counted += 1;
  }
  if (counted == 0) throw std::invalid_argument("no labelled examples to evaluate");

  double correct = 0;
  for (std::size_t i = 0; i < k; ++i) correct += confusion[i][i];
  double accuracy = correct / counted;

  double expected_agreement = 0;
  for (std::size_t i = 0; i < k; ++i) {
    double row = 0, col = 0;
    for (std::size_t j = 0; j < k; ++j) {
      row += confusion[i][j];
      col += confusion[j][i];
    }
    expected_agreement += (row / counted) * (col / counted);
  }
  double kappa;
  if (expected_agreement >= 1.0)
    kappa = accuracy >= 1.0 ? 1.0 : 0.0;  // single-class degeneracy
  else
    kappa = (accuracy - expected_agreement) / (1.0 - expected_agreement);

  double recall_sum = 0;
  std::size_t classes_present = 0;
  for (std::size_t i = 0; i < k; ++i) {
    double row = 0;
    for (std::size_t j = 0; j < k; ++j) row += confusion[i][j];
    if (row > 0) {
      recall_sum += confusion[i][i] / row;
      ++classes_present;
    }
  }
  double balanced = classes_present ? recall_sum / static_cast<double>(classes_present) : 0;

  double covering = 0;
  for (const auto& rules : pred.covering_rules)
    covering += static_cast<double>(rules.size());

  PerformanceReport report;
  report.add("accuracy", accuracy);
  report.add("classification_error", 1.0 - accuracy);
  report.add("kappa", kappa);
  report.add("balanced_accuracy", balanced);
  report.add("#rules_per_example", covering / static_cast<double>(pred.covering_rules.size()));
  for (std::size_t i = 0; i < k; ++i) {
    double row = 0, col = 0;
    for (std::size_t j = 0; j < k; ++j) {
      row += confusion[i][j];
      col += confusion[j][i];
    }
    double precision = col > 0 ? confusion[i][i] / col : 0;
    double recall = row > 0 ? confusion[i][i] / row : 0;
    double f1 = precision + recall > 0 ? 2 * precision * recall / (precision + recall) : 0;
    report.add("precision_" + levels[i], precision);
    report.add("recall_" + levels[i], recall);
    report.add("f1_" + levels[i], f1);
  }
  return report;
}

/// Regression metrics: RMSE, MAE, relative absolute error against the
/// truth-mean predictor, and the Pearson correlation of predictions with
/// the truth (0 with a note when either side has zero variance).
inline PerformanceReport evaluate_regression(const PredictionResult& pred, const DataSet& ds) {
  if (ds.row_count() == 0) throw std::invalid_argument("empty evaluation set");
  if (pred.value_predictions.size() != ds.row_count())
    throw std::invalid_argument("prediction/truth length mismatch");
  int label_col = ds.label_index();
  if (label_col < 0) throw std::invalid_argument("evaluation set has no label attribute");
  const auto label = static_cast<std::size_t>(label_col);

  std::vector<double> truth, predicted;
  for (std::size_t r = 0; r < ds.row_count(); ++r) {
    if (ds.is_missing(r, label)) continue;
    truth.push_back(ds.cell(r, label));
    predicted.push_back(pred.value_predictions[r]);
  }
  if (truth.empty()) throw std::invalid_argument("no labelled examples to evaluate");
  const double n = static_cast<double>(truth.size());

  double se = 0, ae = 0, truth_mean = 0, pred_mean = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    double e = predicted[i] - truth[i];
    se += e * e;
    ae += std::abs(e);
    truth_mean += truth[i];
    pred_mean += predicted[i];
  }
  truth_mean /= n;
  pred_mean /= n;

  double baseline_ae = 0, cov = 0, var_t = 0, var_p = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    baseline_ae += std::abs(truth[i] - truth_mean);
    cov += (truth[i] - truth_mean) * (predicted[i] - pred_mean);
    var_t += (truth[i] - truth_mean) * (truth[i] - truth_mean);
    var_p += (predicted[i] - pred_mean) * (predicted[i] - pred_mean);
  }

  PerformanceReport report;
  report.add("rmse", std::sqrt(se / n));
  report.add("mae", ae / n);
  report.add("relative_absolute_error", safe_div(ae, baseline_ae));
  if (var_t <= 0 || var_p <= 0) {
    report.add("correlation", 0.0);
    report.notes.push_back(var_t <= 0 ? "degenerate: truth labels have zero variance"
                                      : "degenerate: predictions have zero variance");
  } else {
    report.add("correlation", cov / std::sqrt(var_t * var_p));
  }
  double covering = 0;
  for (const auto& rules : pred.covering_rules)
    covering += static_cast<double>(rules.size());
  report.add("#rules_per_example", covering / static_cast<double>(pred.covering_rules.size()));
  return report;
}

/// Integrated Brier score over [0, max truth time] with inverse-probability-
/// of-censoring weights from the training censoring estimate; lower is
/// better. Terms whose censoring weight hits zero are dropped.
inline PerformanceReport evaluate_survival(const PredictionResult& pred, const DataSet& ds,
                                           const SurvivalEstimate& censoring_km) {
  if (ds.row_count() == 0) throw std::invalid_argument("empty evaluation set");
  if (pred.survival_predictions.size() != ds.row_count())
    throw std::invalid_argument("prediction/truth length mismatch");
  int time_col = ds.survival_time_index();
  int status_col = ds.survival_status_index();
  if (time_col < 0 || status_col < 0)
    throw std::invalid_argument("evaluation set has no survival roles");

  std::vector<double> times(ds.row_count());
  std::vector<int> events(ds.row_count());
  double horizon = 0;
  for (std::size_t r = 0; r < ds.row_count(); ++r) {
    times[r] = ds.cell(r, static_cast<std::size_t>(time_col));
    events[r] = static_cast<int>(ds.cell(r, static_cast<std::size_t>(status_col)));
    horizon = std::max(horizon, times[r]);
  }

  PerformanceReport report;
  double covering = 0;
  for (const auto& rules : pred.covering_rules)
    covering += static_cast<double>(rules.size());

  if (horizon <= 0) {
    report.add("integrated_brier_score", 0.0);
    report.notes.push_back("degenerate: all observation times are zero");
    report.add("#rules_per_example",
               covering / static_cast<double>(pred.covering_rules.size()));
    return report;
  }

  // The integrand is a step function; integrate exactly over the union of
  // its breakpoints inside [0, horizon).
  std::set<double> breakpoints{0.0};
  for (double t : times)
    if (t < horizon) breakpoints.insert(t);
  for (const auto& est : pred.survival_predictions)
    for (const auto& pt : est.points)
      if (pt.time < horizon) breakpoints.insert(pt.time);
  for (const auto& pt : censoring_km.points)
    if (pt.time < horizon) breakpoints.insert(pt.time);
  std::vector<double> grid(breakpoints.begin(), breakpoints.end());
  grid.push_back(horizon);

  const double n = static_cast<double>(ds.row_count());
  double integral = 0;
  for (std::size_t g = 0; g + 1 < grid.size(); ++g) {
    double t = grid[g];
    double width = grid[g + 1] - grid[g];
    double brier = 0;
    for (std::size_t i = 0; i < times.size(); ++i) {
      double s = pred.survival_predictions[i].probability_at(t);
      if (times[i] <= t && events[i] == 1) {
        double g_before = censoring_km.probability_before(times[i]);
        if (g_before > 0) brier += s * s / g_before;
      } else if (times[i] > t) {
        double g_at = censoring_km.probability_at(t);
        if (g_at > 0) brier += (1 - s) * (1 - s) / g_at;
      }
    }
    integral += (brier / n) * width;
  }

  report.add("integrated_brier_score", integral / horizon);
  report.add("#rules_per_example", covering / static_cast<double>(pred.covering_rules.size()));
  return report;
}

/// Metric dispatch on the rule set's task; survival uses the training
/// censoring estimate carried by the model.
inline PerformanceReport evaluate(const RuleSet& rs, const PredictionResult& pred,
                                  const DataSet& ds) {
  switch (rs.task) {
    case Task::classification: return evaluate_classification(pred, ds);
    case Task::regression: return evaluate_regression(pred, ds);
    case Task::survival: return evaluate_survival(pred, ds, rs.censoring_km);
  }
  throw std::logic_error("unreachable");
}

/// Model characteristics in the training-report key spelling.
inline PerformanceReport model_characteristics(const RuleSet& rs) {
  if (rs.rules.empty()) throw std::invalid_argument("empty rule set");
  double conditions = 0, grown = 0, coverage = 0, precision = 0;
  for (const auto& rule : rs.rules) {
    conditions += static_cast<double>(rule.premise.size());
    grown += static_cast<double>(rule.grown_condition_count);
    const auto& q = rule.stats;
    coverage += safe_div(q.p + q.n, q.P + q.N);
    precision += safe_div(q.p, q.p + q.n);
  }
  const double count = static_cast<double>(rs.rules.size());
  PerformanceReport report;
  report.add("time_total_s", rs.time_total_s);
  report.add("time_growing_s", rs.time_growing_s);
  report.add("time_pruning_s", rs.time_pruning_s);
  report.add("#rules", count);
  report.add("#conditions_per_rule", conditions / count);
  report.add("#induced_conditions_per_rule", grown / count);
  report.add("avg_rule_coverage", coverage / count);
  report.add("avg_rule_precision", precision / count);
  return report;
}

}  // namespace rulekit
