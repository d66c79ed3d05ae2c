#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "rulekit/csv.hpp"
#include "rulekit/induction.hpp"
#include "rulekit/model_io.hpp"
#include "rulekit/prediction.hpp"
#include "rulekit/report.hpp"
#include "rulekit/xml.hpp"

namespace rulekit {

/// Configuration error carrying the XML path of the offending element.
class ExperimentError : public std::runtime_error {
public:
  ExperimentError(const std::string& xml_path, const std::string& what)
      : std::runtime_error(xml_path + ": " + what), xml_path_(xml_path) {}
  const std::string& xml_path() const { return xml_path_; }

private:
  std::string xml_path_;
};

struct CrossValidationSpec {
  std::size_t folds = 10;
  std::uint64_t seed = 0;
};

struct TrainEntry {
  std::string in_file;
  std::string model_file;
};

struct PredictEntry {
  std::string model_file;
  std::string test_file;
  std::string predictions_file;
};

struct DataSetSpec {
  std::optional<std::string> label;
  std::optional<std::string> survival_time;
  std::optional<std::string> survival_status;
  std::string out_directory;
  std::string report_file;
  std::vector<TrainEntry> train_entries;
  std::string performance_file;
  std::vector<PredictEntry> predict_entries;
  std::optional<CrossValidationSpec> cross_validation;
};

struct ParameterSet {
  std::string name;
  InductionParams params;
  ExpertKnowledge knowledge;
  bool has_knowledge = false;
};

struct ExperimentSpec {
  std::vector<ParameterSet> parameter_sets;
  std::vector<DataSetSpec> datasets;
  std::filesystem::path base_dir;  // relative paths resolve against this
};

namespace detail {

inline std::string element_text(const XmlNode& node) {
  return std::string(trim(node.text));
}

inline void check_vocabulary(const XmlNode& node, const std::string& path,
                             std::initializer_list<std::string_view> allowed) {
  for (const auto& child : node.children) {
    bool known = false;
    for (auto name : allowed)
      if (child.name == name) known = true;
    if (!known)
      throw ExperimentError(path, "unknown element <" + child.name + ">");
  }
}

inline std::string required_text(const XmlNode& node, const std::string& path,
                                 std::string_view child_name) {
  const XmlNode* child = node.child(child_name);
  if (!child)
    throw ExperimentError(path, "missing required child <" + std::string(child_name) + ">");
  std::string value = element_text(*child);
  if (value.empty())
    throw ExperimentError(path + "/" + std::string(child_name), "empty value");
  return value;
}

inline ParameterSet parse_parameter_set(const XmlNode& node, const std::string& path) {
  ParameterSet set;
  const std::string* name = node.attribute("name");
  if (!name) throw ExperimentError(path, "parameter_set needs a name attribute");
  set.name = *name;
  check_vocabulary(node, path, {"param"});

  std::map<std::string, std::string> raw;
  for (const XmlNode* param : node.children_named("param")) {
    const std::string* pname = param->attribute("name");
    if (!pname) throw ExperimentError(path + "/param", "param needs a name attribute");
    if (!raw.emplace(*pname, element_text(*param)).second)
      throw ExperimentError(path + "/param", "duplicate parameter '" + *pname + "'");
  }

  static const std::set<std::string> known = {
      "min_rule_covered",     "induction_measure",     "pruning_measure",
      "voting_measure",       "user_induction_equation", "user_pruning_equation",
      "user_voting_equation", "pruning_enabled",       "max_growing_conditions",
      "expert_rules",         "preferred_conditions",  "forbidden_conditions",
      "preferred_attributes", "forbidden_attributes",  "extend_with_automatic",
      "induce_automatic_rules"};
  for (const auto& [key, value] : raw)
    if (!known.count(key))
      throw ExperimentError(path + "/param", "unknown parameter '" + key + "'");

  auto get = [&](const char* key) -> const std::string* {
    auto it = raw.find(key);
    return it == raw.end() ? nullptr : &it->second;
  };

  auto resolve_measure = [&](const char* measure_key, const char* equation_key,
                             QualityMeasure& out) {
    const std::string* name_value = get(measure_key);
    const std::string* equation = get(equation_key);
    if (!name_value) {
      if (equation)
        throw ExperimentError(path + "/param",
                              std::string(equation_key) + " requires " + measure_key +
                                  " = UserDefined");
      return;
    }
    if (*name_value == "UserDefined") {
      if (!equation)
        throw ExperimentError(path + "/param", std::string(measure_key) +
                                                   " = UserDefined needs " + equation_key);
      try {
        out = QualityMeasure::user_defined(*equation);
      } catch (const ExprParseError& e) {
        throw ExperimentError(path + "/param[" + equation_key + "]", e.what());
      }
    } else {
      if (equation)
        throw ExperimentError(path + "/param",
                              std::string(equation_key) + " requires " + measure_key +
                                  " = UserDefined");
      try {
        out = QualityMeasure::from_name(*name_value);
      } catch (const std::invalid_argument& e) {
        throw ExperimentError(path + "/param[" + measure_key + "]", e.what());
      }
    }
  };

  auto parse_bool = [&](const char* key, bool& out) {
    if (const std::string* v = get(key)) {
      if (*v == "true" || *v == "1")
        out = true;
      else if (*v == "false" || *v == "0")
        out = false;
      else
        throw ExperimentError(path + "/param[" + key + "]", "expected true or false");
    }
  };

  if (const std::string* v = get("min_rule_covered")) {
    if (!parse_real(*v, set.params.min_rule_covered) || set.params.min_rule_covered < 1)
      throw ExperimentError(path + "/param[min_rule_covered]",
                            "expected a real number >= 1, got '" + *v + "'");
  }
  resolve_measure("induction_measure", "user_induction_equation", set.params.induction_measure);
  resolve_measure("pruning_measure", "user_pruning_equation", set.params.pruning_measure);
  resolve_measure("voting_measure", "user_voting_equation", set.params.voting_measure);
  parse_bool("pruning_enabled", set.params.pruning_enabled);
  if (const std::string* v = get("max_growing_conditions")) {
    double parsed;
    if (!parse_real(*v, parsed) || parsed < 1)
      throw ExperimentError(path + "/param[max_growing_conditions]", "expected a positive count");
    set.params.max_growing_conditions = static_cast<std::size_t>(parsed);
  }

  auto knowledge_item = [&](const char* key, auto parser, auto& field) {
    if (const std::string* v = get(key)) {
      set.has_knowledge = true;
      try {
        field = parser(*v);
      } catch (const std::invalid_argument& e) {
        throw ExperimentError(path + "/param[" + key + "]", e.what());
      }
    }
  };
  knowledge_item("expert_rules", parse_expert_rules, set.knowledge.initial_rules);
  knowledge_item("preferred_conditions", parse_preferred_conditions,
                 set.knowledge.preferred_conditions);
  knowledge_item("forbidden_conditions", parse_condition_list,
                 set.knowledge.forbidden_conditions);
  knowledge_item("preferred_attributes", parse_preferred_attributes,
                 set.knowledge.preferred_attributes);
  knowledge_item("forbidden_attributes", parse_attribute_list,
                 set.knowledge.forbidden_attributes);
  bool flag_set = raw.count("extend_with_automatic") || raw.count("induce_automatic_rules");
  parse_bool("extend_with_automatic", set.knowledge.extend_with_automatic);
  parse_bool("induce_automatic_rules", set.knowledge.induce_automatic_rules);
  if (flag_set) set.has_knowledge = true;
  try {
    set.knowledge.validate();
  } catch (const std::invalid_argument& e) {
    throw ExperimentError(path, e.what());
  }
  return set;
}

inline DataSetSpec parse_dataset(const XmlNode& node, const std::string& path) {
  DataSetSpec spec;
  check_vocabulary(node, path,
                   {"label", "survival_time", "survival_status", "out_directory", "training",
                    "prediction", "cross_validation"});
  if (const XmlNode* c = node.child("label")) spec.label = element_text(*c);
  if (const XmlNode* c = node.child("survival_time")) spec.survival_time = element_text(*c);
  if (const XmlNode* c = node.child("survival_status")) spec.survival_status = element_text(*c);
  bool has_label = spec.label.has_value();
  bool has_survival = spec.survival_time.has_value() || spec.survival_status.has_value();
  if (has_label == has_survival)
    throw ExperimentError(path,
                          "exactly one of <label> or <survival_time>+<survival_status> required");
  if (has_survival && (!spec.survival_time || !spec.survival_status))
    throw ExperimentError(path, "survival needs both <survival_time> and <survival_status>");
  spec.out_directory = required_text(node, path, "out_directory");

  if (const XmlNode* training = node.child("training")) {
    std::string tpath = path + "/training";
    check_vocabulary(*training, tpath, {"report_file", "train"});
    spec.report_file = required_text(*training, tpath, "report_file");
    auto trains = training->children_named("train");
    if (trains.empty()) throw ExperimentError(tpath, "missing required child <train>");
    for (std::size_t i = 0; i < trains.size(); ++i) {
      std::string epath = tpath + "/train[" + std::to_string(i + 1) + "]";
      check_vocabulary(*trains[i], epath, {"in_file", "model_file"});
      spec.train_entries.push_back({required_text(*trains[i], epath, "in_file"),
                                    required_text(*trains[i], epath, "model_file")});
    }
  }

  if (const XmlNode* prediction = node.child("prediction")) {
    std::string ppath = path + "/prediction";
    check_vocabulary(*prediction, ppath, {"performance_file", "predict"});
    spec.performance_file = required_text(*prediction, ppath, "performance_file");
    auto predicts = prediction->children_named("predict");
    if (predicts.empty()) throw ExperimentError(ppath, "missing required child <predict>");
    for (std::size_t i = 0; i < predicts.size(); ++i) {
      std::string epath = ppath + "/predict[" + std::to_string(i + 1) + "]";
      check_vocabulary(*predicts[i], epath, {"model_file", "test_file", "predictions_file"});
      spec.predict_entries.push_back({required_text(*predicts[i], epath, "model_file"),
                                      required_text(*predicts[i], epath, "test_file"),
                                      required_text(*predicts[i], epath, "predictions_file")});
    }
  }

  if (const XmlNode* cv = node.child("cross_validation")) {
    std::string cpath = path + "/cross_validation";
    check_vocabulary(*cv, cpath, {"folds", "seed"});
    CrossValidationSpec cvs;
    double folds;
    if (!parse_real(required_text(*cv, cpath, "folds"), folds) || folds < 2)
      throw ExperimentError(cpath + "/folds", "expected an integer >= 2");
    cvs.folds = static_cast<std::size_t>(folds);
    if (const XmlNode* seed = cv->child("seed")) {
      double parsed;
      if (!parse_real(element_text(*seed), parsed) || parsed < 0)
        throw ExperimentError(cpath + "/seed", "expected a non-negative integer");
      cvs.seed = static_cast<std::uint64_t>(parsed);
    }
    spec.cross_validation = cvs;
  }
  return spec;
}

}  // namespace detail

/// Parses the batch experiment configuration. Element and parameter names
/// are checked against the documented vocabulary; errors carry the XML path.
inline ExperimentSpec parse_experiment(std::string_view xml_text,
                                       const std::filesystem::path& base_dir = ".") {
  XmlNode root;
  try {
    root = parse_xml(xml_text);
  } catch (const ParseError& e) {
    throw ExperimentError("/", e.what());
  }
  if (root.name != "experiment") throw ExperimentError("/", "expected <experiment> root");
  detail::check_vocabulary(root, "/experiment", {"parameter_sets", "datasets"});

  ExperimentSpec spec;
  spec.base_dir = base_dir;

  const XmlNode* psets = root.child("parameter_sets");
  if (!psets) throw ExperimentError("/experiment", "missing required child <parameter_sets>");
  detail::check_vocabulary(*psets, "/experiment/parameter_sets", {"parameter_set"});
  auto pset_nodes = psets->children_named("parameter_set");
  if (pset_nodes.empty())
    throw ExperimentError("/experiment/parameter_sets",
                          "missing required child <parameter_set>");
  for (std::size_t i = 0; i < pset_nodes.size(); ++i)
    spec.parameter_sets.push_back(detail::parse_parameter_set(
        *pset_nodes[i],
        "/experiment/parameter_sets/parameter_set[" + std::to_string(i + 1) + "]"));

  const XmlNode* datasets = root.child("datasets");
  if (!datasets) throw ExperimentError("/experiment", "missing required child <datasets>");
  detail::check_vocabulary(*datasets, "/experiment/datasets", {"dataset"});
  auto dataset_nodes = datasets->children_named("dataset");
  if (dataset_nodes.empty())
    throw ExperimentError("/experiment/datasets", "missing required child <dataset>");
  for (std::size_t i = 0; i < dataset_nodes.size(); ++i)
    spec.datasets.push_back(detail::parse_dataset(
        *dataset_nodes[i], "/experiment/datasets/dataset[" + std::to_string(i + 1) + "]"));
  return spec;
}

struct RunOptions {
  unsigned threads = 0;  // 0 = hardware concurrency
  std::optional<std::uint64_t> seed;  // overrides cross-validation seeds
};

namespace detail {

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline DataSet load_data_file(const std::filesystem::path& path) {
  std::string text = read_file(path);
  std::string ext = path.extension().string();
  for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  try {
    if (ext == ".csv") return parse_csv(text, true);
    return parse_arff(text);
  } catch (const ParseError& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

inline bool roles_available(const DataSet& ds, const DataSetSpec& spec) {
  if (spec.label) return ds.find_attribute(*spec.label) >= 0;
  return ds.find_attribute(*spec.survival_time) >= 0 &&
         ds.find_attribute(*spec.survival_status) >= 0;
}

inline DataSet assign_roles(const DataSet& ds, const DataSetSpec& spec) {
  return set_roles(ds, spec.label, spec.survival_time, spec.survival_status);
}

inline std::filesystem::path resolve(const std::filesystem::path& base,
                                     const std::string& path) {
  std::filesystem::path p(path);
  return p.is_absolute() ? p : base / p;
}

inline std::string csv_cell(const std::string& value) {
  if (value.find_first_of(",\"\n") == std::string::npos) return value;
  std::string out = "\"";
  for (char c : value) {
    if (c == '"') out += "\"";
    out.push_back(c);
  }
  out += "\"";
  return out;
}

inline double restricted_mean_time(const SurvivalEstimate& est, double horizon) {
  double area = 0, prev_time = 0, prev_prob = 1;
  for (const auto& pt : est.points) {
    if (pt.time >= horizon) break;
    area += prev_prob * (pt.time - prev_time);
    prev_time = pt.time;
    prev_prob = pt.probability;
  }
  area += prev_prob * (horizon - prev_time);
  return area;
}

inline double survival_horizon(const RuleSet& rs) {
  double horizon = rs.default_survival.max_time();
  for (const auto& rule : rs.rules)
    horizon = std::max(horizon, rule.consequence.survival.max_time());
  return horizon;
}

// Appends the prediction as the final attribute of the test data.
inline DataSet with_predictions(const DataSet& test, const RuleSet& rs,
                                const PredictionResult& pred) {
  std::string name = "prediction";
  while (test.find_attribute(name) >= 0) name += "_";

  Attribute pred_attr;
  pred_attr.name = name;
  if (rs.task == Task::classification) {
    pred_attr.kind = AttributeKind::nominal;
    for (const auto& attr : rs.schema)
      if (attr.role == AttributeRole::label) pred_attr.levels = attr.levels;
  } else {
    pred_attr.kind = AttributeKind::numeric;
  }

  std::vector<Attribute> attributes = test.attributes();
  for (auto& a : attributes) a.role = AttributeRole::regular;
  attributes.push_back(pred_attr);

  double horizon = rs.task == Task::survival ? survival_horizon(rs) : 0;
  std::vector<double> cells;
  cells.reserve(test.row_count() * attributes.size());
  for (std::size_t r = 0; r < test.row_count(); ++r) {
    for (std::size_t c = 0; c < test.attribute_count(); ++c) cells.push_back(test.cell(r, c));
    switch (rs.task) {
      case Task::classification:
        cells.push_back(static_cast<double>(pred_attr.level_index(pred.class_predictions[r])));
        break;
      case Task::regression: cells.push_back(pred.value_predictions[r]); break;
      case Task::survival:
        cells.push_back(restricted_mean_time(pred.survival_predictions[r], horizon));
        break;
    }
  }
  return DataSet(std::move(attributes), std::move(cells));
}

inline void write_survival_curves(const std::filesystem::path& path,
                                  const std::vector<std::string>& names,
                                  const std::vector<const SurvivalEstimate*>& curves) {
  std::set<double> grid{0.0};
  for (const auto* est : curves)
    for (const auto& pt : est->points) grid.insert(pt.time);

  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path.string());
  out << "time";
  for (const auto& n : names) out << ',' << csv_cell(n);
  out << "\n";
  for (double t : grid) {
    out << fmt_metric(t);
    for (const auto* est : curves) out << ',' << fmt_metric(est->probability_at(t));
    out << "\n";
  }
}

inline std::string sanitize_directory_name(const std::string& name) {
  std::string out = name;
  for (auto& c : out)
    if (c == '/' || c == '\\') c = '_';
  return out;
}

struct PerformanceTable {
  std::vector<std::string> columns;  // metric names
  struct Row {
    std::string model_file;
    std::string test_file;
    std::vector<double> values;
    std::string note;
  };
  std::vector<Row> rows;
};

inline void write_performance_csv(const std::filesystem::path& path,
                                  const PerformanceTable& table) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path.string());
  out << "model_file,test_file";
  for (const auto& c : table.columns) out << ',' << csv_cell(c);
  out << "\n";
  for (const auto& row : table.rows) {
    out << csv_cell(row.model_file) << ',' << csv_cell(row.test_file);
    if (row.values.empty() && !table.columns.empty()) {
      for (std::size_t i = 0; i < table.columns.size(); ++i) out << ',';
    } else {
      for (double v : row.values) out << ',' << fmt_metric(v);
    }
    out << "\n";
  }
}

}  // namespace detail

/// Runs every (parameter set x dataset) entry: trains models, writes the
/// training report and model files, then executes the prediction phase with
/// its predictions and the performance CSV. A failing entry is logged and
/// the run continues; the exit status is nonzero if anything failed.
inline int run(const ExperimentSpec& spec, const RunOptions& options = {},
               std::ostream& log = std::cerr) {
  int status = 0;
  for (const auto& pset : spec.parameter_sets) {
    for (std::size_t d = 0; d < spec.datasets.size(); ++d) {
      const DataSetSpec& dspec = spec.datasets[d];
      try {
        std::filesystem::path out_dir = detail::resolve(spec.base_dir, dspec.out_directory);
        if (spec.parameter_sets.size() > 1)
          out_dir /= detail::sanitize_directory_name(pset.name);
        std::filesystem::create_directories(out_dir);

        InductionParams params = pset.params;
        params.threads = options.threads;
        const ExpertKnowledge* knowledge = pset.has_knowledge ? &pset.knowledge : nullptr;

        if (!dspec.train_entries.empty()) {
          std::ofstream report(out_dir / dspec.report_file);
          if (!report)
            throw std::runtime_error("cannot write report: " +
                                     (out_dir / dspec.report_file).string());
          for (std::size_t t = 0; t < dspec.train_entries.size(); ++t) {
            const TrainEntry& entry = dspec.train_entries[t];
            if (dspec.train_entries.size() > 1)
              report << "Training file: " << entry.in_file << "\n\n";

            DataSet ds = detail::assign_roles(
                detail::load_data_file(detail::resolve(spec.base_dir, entry.in_file)), dspec);
            RuleSet rs = induce(ds, params, knowledge);
            PredictionResult train_pred = predict(rs, ds);
            PerformanceReport train_metrics = evaluate(rs, train_pred, ds);
            write_training_report(rs, train_metrics, report);

            if (dspec.cross_validation) {
              CrossValidationSpec cv = *dspec.cross_validation;
              if (options.seed) cv.seed = *options.seed;
              auto folds = stratified_folds(ds, cv.folds, cv.seed);
              report << "\nCross-validation performance (" << cv.folds << " folds, seed "
                     << cv.seed << "):\n";
              std::vector<std::string> keys;
              std::vector<double> sums;
              for (std::size_t f = 0; f < folds.size(); ++f) {
                std::vector<std::size_t> train_rows;
                for (std::size_t g = 0; g < folds.size(); ++g)
                  if (g != f)
                    train_rows.insert(train_rows.end(), folds[g].begin(), folds[g].end());
                std::sort(train_rows.begin(), train_rows.end());
                DataSet fold_train = ds.subset(train_rows);
                DataSet fold_test = ds.subset(folds[f]);
                RuleSet fold_model = induce(fold_train, params, knowledge);
                PerformanceReport fold_metrics =
                    evaluate(fold_model, predict(fold_model, fold_test), fold_test);
                report << "fold_" << (f + 1) << ":\n";
                for (const auto& [key, value] : fold_metrics.entries)
                  report << key << ": " << fmt_metric(value) << "\n";
                if (keys.empty()) {
                  for (const auto& [key, value] : fold_metrics.entries) keys.push_back(key);
                  sums.assign(keys.size(), 0.0);
                }
                for (std::size_t k = 0; k < keys.size(); ++k)
                  if (fold_metrics.has(keys[k])) sums[k] += fold_metrics.at(keys[k]);
              }
              report << "fold_mean:\n";
              for (std::size_t k = 0; k < keys.size(); ++k)
                report << keys[k] << ": "
                       << fmt_metric(sums[k] / static_cast<double>(folds.size())) << "\n";
            }
            if (t + 1 < dspec.train_entries.size()) report << "\n";

            std::ofstream model_out(out_dir / entry.model_file);
            if (!model_out)
              throw std::runtime_error("cannot write model: " +
                                       (out_dir / entry.model_file).string());
            serialize_model(rs, model_out);

            if (rs.task == Task::survival) {
              std::vector<std::string> names{"default"};
              std::vector<const SurvivalEstimate*> curves{&rs.default_survival};
              for (std::size_t i = 0; i < rs.rules.size(); ++i) {
                names.push_back("r" + std::to_string(i + 1));
                curves.push_back(&rs.rules[i].consequence.survival);
              }
              std::filesystem::path curve_path =
                  out_dir / (std::filesystem::path(entry.model_file).stem().string() +
                             "-curves.csv");
              detail::write_survival_curves(curve_path, names, curves);
            }
          }
        }

        if (!dspec.predict_entries.empty()) {
          detail::PerformanceTable table;
          for (const PredictEntry& entry : dspec.predict_entries) {
            std::filesystem::path model_path = out_dir / entry.model_file;
            if (!std::filesystem::exists(model_path)) {
              std::filesystem::path alt = detail::resolve(spec.base_dir, entry.model_file);
              if (!std::filesystem::exists(alt))
                throw std::runtime_error("model file not found: " + model_path.string());
              model_path = alt;
            }
            std::ifstream model_in(model_path);
            RuleSet model = deserialize_model(model_in);

            DataSet raw =
                detail::load_data_file(detail::resolve(spec.base_dir, entry.test_file));
            bool labelled = detail::roles_available(raw, dspec);
            DataSet test = labelled ? detail::assign_roles(raw, dspec) : raw;

            PredictionResult pred = predict(model, test);
            {
              std::ofstream pred_out(out_dir / entry.predictions_file);
              if (!pred_out)
                throw std::runtime_error("cannot write predictions: " +
                                         (out_dir / entry.predictions_file).string());
              write_arff(detail::with_predictions(test, model, pred), pred_out, "predictions");
            }

            if (model.task == Task::survival) {
              std::vector<std::string> names;
              std::vector<const SurvivalEstimate*> curves;
              for (std::size_t i = 0; i < model.rules.size(); ++i) {
                names.push_back("r" + std::to_string(i + 1));
                curves.push_back(&model.rules[i].consequence.survival);
              }
              for (std::size_t r = 0; r < pred.survival_predictions.size(); ++r) {
                names.push_back("e" + std::to_string(r + 1));
                curves.push_back(&pred.survival_predictions[r]);
              }
              std::filesystem::path curve_path =
                  out_dir / (std::filesystem::path(entry.predictions_file).stem().string() +
                             "-curves.csv");
              detail::write_survival_curves(curve_path, names, curves);
            }

            detail::PerformanceTable::Row row;
            row.model_file = entry.model_file;
            row.test_file = entry.test_file;
            if (labelled) {
              PerformanceReport metrics = evaluate(model, pred, test);
              if (table.columns.empty())
                for (const auto& [key, value] : metrics.entries) table.columns.push_back(key);
              for (const auto& key : table.columns)
                row.values.push_back(metrics.has(key) ? metrics.at(key)
                                                      : std::numeric_limits<double>::quiet_NaN());
            } else {
              row.note = "unlabelled test data; metrics skipped";
            }
            table.rows.push_back(std::move(row));
          }
          detail::write_performance_csv(out_dir / dspec.performance_file, table);
        }
      } catch (const std::exception& e) {
        log << "error: parameter set '" << pset.name << "', dataset " << (d + 1) << ": "
            << e.what() << "\n";
        status = 1;
      }
    }
  }
  return status;
}

}  // namespace rulekit
