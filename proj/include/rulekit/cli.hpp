#pragma once

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "rulekit/experiment.hpp"

namespace rulekit {

/// Batch entry point: `rulekit <experiments.xml> [--threads n] [--seed n]
/// [--validate]`. --validate stops after a successful parse.
inline int cli_main(int argc, const char* const* argv, std::ostream& out = std::cout,
                    std::ostream& err = std::cerr) {
  CLI::App app{"rule-based learning: batch experiment runner"};
  std::string experiment_file;
  unsigned threads = 0;
  std::optional<std::uint64_t> seed;
  bool validate = false;
  app.add_option("experiment_file", experiment_file, "experiment XML configuration")
      ->required();
  app.add_option("--threads", threads, "worker threads for candidate evaluation (0 = all cores)");
  app.add_option("--seed", seed, "override the cross-validation seeds");
  app.add_flag("--validate", validate, "parse and check the configuration, then exit");

  try {
    app.parse(argc, const_cast<char**>(argv));
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  ExperimentSpec spec;
  try {
    std::string text = detail::read_file(experiment_file);
    spec = parse_experiment(text, std::filesystem::path(experiment_file).parent_path());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  if (validate) {
    out << "OK: " << spec.parameter_sets.size() << " parameter set(s), "
        << spec.datasets.size() << " dataset(s)\n";
    return 0;
  }
  RunOptions options;
  options.threads = threads;
  options.seed = seed;
  return run(spec, options, err);
}

}  // namespace rulekit
