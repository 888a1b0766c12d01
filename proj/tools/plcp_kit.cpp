// plcp-kit: generate data, run experiments, select m, evaluate saved rules.

#include <CLI11.hpp>
#include <cstdlib>
#include <iostream>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>
#include <string>

#include "plcp/error.hpp"
#include "plcp/experiment.hpp"

namespace {

enum ExitCode { kOk = 0, kOther = 1, kConfig = 2, kData = 3, kNumeric = 4 };

void configure_logging() {
  spdlog::set_default_logger(spdlog::stderr_color_mt("plcp-kit"));
  spdlog::set_pattern("[%l] %v");
  spdlog::set_level(spdlog::level::warn);
  const char* env = std::getenv("PLCP_KIT_LOG");
  if (env == nullptr) return;
  const std::string level = env;
  if (level == "error") {
    spdlog::set_level(spdlog::level::err);
  } else if (level == "info") {
    spdlog::set_level(spdlog::level::info);
  } else if (level == "debug") {
    spdlog::set_level(spdlog::level::debug);
  } else {
    spdlog::warn("ignoring PLCP_KIT_LOG={} (expected error, info or debug)", level);
  }
}

int exit_code(plcp::ErrorKind kind) {
  switch (kind) {
    case plcp::ErrorKind::Config: return kConfig;
    case plcp::ErrorKind::Data: return kData;
    case plcp::ErrorKind::Numeric: return kNumeric;
  }
  return kOther;
}

const char* kind_name(plcp::ErrorKind kind) {
  switch (kind) {
    case plcp::ErrorKind::Config: return "config";
    case plcp::ErrorKind::Data: return "data";
    case plcp::ErrorKind::Numeric: return "numeric";
  }
  return "error";
}

}  // namespace

int main(int argc, char** argv) {
  configure_logging();

  CLI::App app{"Partition-learned conformal calibration toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  bool randomized = false;
  std::string model_path;
  std::string data_path;

  auto add_common = [&](CLI::App* cmd, bool needs_config) {
    auto* opt = cmd->add_option("--config", config_path, "Experiment config (JSON)");
    if (needs_config) opt->required()->check(CLI::ExistingFile);
    cmd->add_option("--seed", seed, "Seed overriding the config's seed");
    cmd->add_option("--out", out_dir, "Output directory")->capture_default_str();
  };

  auto* generate = app.add_subcommand("generate", "Write the configured synthetic dataset to data.csv");
  add_common(generate, true);

  auto* experiment = app.add_subcommand("experiment", "Fit every configured method and evaluate it");
  add_common(experiment, true);
  experiment->add_option("--threads", threads, "Worker threads for evaluation")->check(CLI::PositiveNumber);
  experiment->add_flag("--randomized-assignment", randomized, "Draw groups i ~ h(x) at test time");

  auto* select = app.add_subcommand("select-m", "Choose m by the doubling trick on a holdout");
  add_common(select, true);

  auto* evaluate = app.add_subcommand("evaluate", "Apply a saved rule to a labeled CSV");
  evaluate->add_option("--model", model_path, "rule.model file")->required()->check(CLI::ExistingFile);
  evaluate->add_option("--data", data_path, "CSV with the rule's feature and label columns")
      ->required()
      ->check(CLI::ExistingFile);
  evaluate->add_option("--out", out_dir, "Output directory")->capture_default_str();
  evaluate->add_option("--threads", threads, "Worker threads for evaluation")->check(CLI::PositiveNumber);
  evaluate->add_flag("--randomized-assignment", randomized, "Draw groups i ~ h(x) at test time");

  CLI11_PARSE(app, argc, argv);

  const bool seed_given = [&] {
    for (auto* cmd : {generate, experiment, select}) {
      if (cmd->parsed() && cmd->count("--seed") > 0) return true;
    }
    return false;
  }();
  std::optional<std::uint64_t> seed_override;
  if (seed_given) seed_override = seed;

  try {
    plcp::RunOptions options{threads, randomized};
    if (generate->parsed()) {
      plcp::run_generate(plcp::load_config(config_path, seed_override), out_dir);
    } else if (experiment->parsed()) {
      const auto cfg = plcp::load_config(config_path, seed_override);
      const auto result = plcp::run_experiment(cfg, options, out_dir);
      std::cout << plcp::metrics_csv(result.methods);
    } else if (select->parsed()) {
      const auto report = plcp::run_select_m(plcp::load_config(config_path, seed_override), out_dir);
      std::cout << plcp::select_m_csv(report) << "chosen," << report.chosen << '\n';
    } else if (evaluate->parsed()) {
      const auto outcome = plcp::run_evaluate(plcp::load_rule(model_path), plcp::load_csv(data_path),
                                              options, out_dir);
      std::cout << plcp::metrics_csv({outcome});
    }
  } catch (const plcp::Error& e) {
    std::cerr << "plcp-kit: " << kind_name(e.kind()) << " error: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "plcp-kit: error: " << e.what() << '\n';
    return kOther;
  }
  return kOk;
}
