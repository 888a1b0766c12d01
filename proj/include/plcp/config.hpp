#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>
#include <optional>

#include "plcp/csv.hpp"
#include "plcp/synth.hpp"
#include "plcp/trainer.hpp"
#include "plcp/types.hpp"

namespace plcp {

struct DataConfig {
  /// "intro", "linear_scale", "highdim" or "csv".
  std::string source = "intro";
  std::size_t n = 10000;
  IntroNoise noise = IntroNoise::Variance;
  double sigma_x = 1.0;
  /// Every component of theta for the highdim family.
  double theta = 1.0;
  std::string path;
  CsvSchema schema;
};

struct MethodConfig {
  /// "split", "group" or "plcp".
  std::string name;
  /// Row label in metrics.csv; defaults to the name (plus "_m<m>" for plcp).
  std::string label;
  TrainConfig train;
  /// Group partition for "group": "sign" (x0 < 0 vs >= 0) or "bits" (pattern of binary columns).
  std::string groups = "sign";
};

struct ExperimentConfig {
  std::string name = "experiment";
  std::uint64_t seed = 0;
  double alpha = 0.1;
  DataConfig data;
  /// Train, calibration and test fractions.
  std::array<double, 3> split = {0.6, 0.2, 0.2};
  ScoreKind score = ScoreKind::AbsoluteResidual;
  /// "oracle", "ols", "columns" or "none".
  std::string predictor = "oracle";
  std::vector<MethodConfig> methods;
  /// "auto", "sign", "bits" or "none".
  std::string eval_groups = "auto";
  bool normalize_scores = false;
  /// Number of classes for label-set sizes of classification scores.
  std::size_t classes = 0;
  std::size_t select_m_start = 1;
  double holdout_frac = 0.2;
  std::size_t m_max = 64;

  void validate() const;
};

/// Rejects unknown keys and malformed values with ConfigError. A seed
/// override replaces the document's top-level seed before methods inherit it.
ExperimentConfig parse_config(const nlohmann::json& doc,
                              std::optional<std::uint64_t> seed = std::nullopt);
ExperimentConfig load_config(const std::filesystem::path& path,
                             std::optional<std::uint64_t> seed = std::nullopt);
/// Fully resolved config, every default spelled out.
nlohmann::json to_json(const ExperimentConfig& cfg);

struct SplitSizes {
  std::size_t train = 0;
  std::size_t cal = 0;
  std::size_t test = 0;
};

/// floor(f * n) for train and calibration, the remainder to test.
SplitSizes split_sizes(std::size_t n, const std::array<double, 3>& fractions);

template <typename T>
struct Split {
  std::vector<T> train;
  std::vector<T> cal;
  std::vector<T> test;
};

/// Seeded shuffle then contiguous slicing. Throws DataError if a part is empty
/// (an exact-zero train fraction is allowed).
std::vector<std::size_t> split_permutation(std::size_t n, std::uint64_t seed);
Split<LabeledSample> split_dataset(std::span<const LabeledSample> data,
                                   const std::array<double, 3>& fractions, std::uint64_t seed);

}  // namespace plcp
