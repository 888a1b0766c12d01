#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "plcp/core.hpp"

namespace plcp {

/// Serializable description of the point or probability predictor behind a score.
struct PredictorSpec {
  /// "linear": f(x) = <weights, x> + intercept. "columns": predictions read
  /// from named dataset columns. "none": precomputed scores.
  std::string kind = "none";
  Vector weights;
  double intercept = 0.0;
  std::vector<std::string> columns;
};

/// Score spec for `kind` backed by `predictor`; column predictors take their
/// values from `table`.
ScoreSpec make_score_spec(ScoreKind kind, const PredictorSpec& predictor,
                          std::vector<Vector> table = {});

/// Everything needed to apply a trained rule to new data.
struct SavedRule {
  PlcpRule rule;
  PredictorSpec predictor;
  double alpha = 0.1;
  /// Present when thresholds live on the normalized score scale.
  std::optional<ScoreNormalizer> normalizer;
  std::vector<std::string> feature_names;
  std::string label = "y";
  std::size_t classes = 0;
};

nlohmann::json rule_to_json(const SavedRule& saved);
SavedRule rule_from_json(const nlohmann::json& doc);
void save_rule(const std::filesystem::path& path, const SavedRule& saved);
SavedRule load_rule(const std::filesystem::path& path);

}  // namespace plcp
