#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "plcp/baselines.hpp"
#include "plcp/checkpoint.hpp"
#include "plcp/config.hpp"
#include "plcp/metrics.hpp"
#include "plcp/trainer.hpp"

namespace plcp {

/// Data of one experiment after generation or loading, splitting, predictor
/// fitting and scoring.
struct PreparedData {
  Split<LabeledSample> parts;
  std::vector<std::string> feature_names;
  std::string label = "y";
  PredictorSpec predictor;
  ScoreSpec cal_score;
  ScoreSpec test_score;
  /// Calibration samples with their (possibly normalized) scores.
  std::vector<ScoredSample> calibration;
  std::optional<ScoreNormalizer> normalizer;
  std::optional<OracleSpec> oracle;
  std::vector<EvalGroup> groups;
  SetDomain domain = IntervalDomain{};
};

PreparedData prepare_data(const ExperimentConfig& cfg);

struct RunOptions {
  std::size_t threads = 1;
  bool randomized = false;
};

struct MethodOutcome {
  std::string name;
  std::string label;
  /// Raw-scale threshold of every test point.
  Vector thresholds;
  EvalReport report;
  std::optional<FitResult> fit;
};

struct ExperimentResult {
  PreparedData data;
  std::vector<MethodOutcome> methods;
};

ExperimentResult run_methods(const ExperimentConfig& cfg, const RunOptions& options);

/// Columns method,group,count,coverage,mean_length,msce,pearson,hsic; one row
/// per (method, group) then a summary row with group "all".
std::string metrics_csv(const std::vector<MethodOutcome>& methods);
std::string trace_csv(const TrainTrace& trace);
std::string select_m_csv(const SelectMReport& report);

/// Writes metrics.csv, trace.csv, rule.model and config.echo into `out`.
/// trace.csv and rule.model describe the first PLCP method.
void write_outputs(const ExperimentConfig& cfg, const ExperimentResult& result,
                   const std::filesystem::path& out);

ExperimentResult run_experiment(const ExperimentConfig& cfg, const RunOptions& options,
                                const std::filesystem::path& out);

/// Doubling-trick search on the calibration split using the first PLCP
/// method's settings. Writes select_m.csv and the refitted rule.model.
SelectMReport run_select_m(const ExperimentConfig& cfg, const std::filesystem::path& out);

/// Generates the configured synthetic dataset and writes it as data.csv.
void run_generate(const ExperimentConfig& cfg, const std::filesystem::path& out);

/// Applies a saved rule to a labeled CSV and writes metrics.csv.
MethodOutcome run_evaluate(const SavedRule& saved, const Table& table, const RunOptions& options,
                           const std::filesystem::path& out);

}  // namespace plcp
