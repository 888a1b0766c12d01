#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <variant>

#include "plcp/partition_model.hpp"
#include "plcp/rng.hpp"
#include "plcp/types.hpp"

namespace plcp {

enum class AssignmentMode { Argmax, Randomized };

/// How a covariate picks its group threshold. Randomized draws i ~ h(x) with
/// a caller-supplied generator; `seed` records the stream the caller should
/// use for reproducible evaluation.
struct Assignment {
  AssignmentMode mode = AssignmentMode::Argmax;
  std::uint64_t seed = 0;
};

/// A trained partition plus its group thresholds.
struct PlcpRule {
  PartitionModel model;
  QuantileVector q;
  ScoreSpec score;
  Assignment assignment;

  void validate() const;
};

struct SplitConformalRule {
  double threshold = kInfinity;
  ScoreSpec score;
};

/// Score of a labeled sample. The row-indexed overload reads predictions from
/// spec.table when it is non-empty.
double compute_score(const ScoreSpec& spec, const LabeledSample& sample);
double compute_score(const ScoreSpec& spec, const LabeledSample& sample, std::size_t row);

/// Score of every sample, using spec.table row j for sample j when present.
Vector compute_scores(const ScoreSpec& spec, std::span<const LabeledSample> samples);
std::vector<ScoredSample> score_samples(const ScoreSpec& spec,
                                        std::span<const LabeledSample> samples);

/// Index of the largest entry, lowest index on ties.
std::size_t argmax_index(std::span<const double> p);

/// Group index for membership probabilities h: argmax, or a draw i ~ h from `rng`.
std::size_t assign_group(std::span<const double> h, AssignmentMode mode, Rng* rng = nullptr);

/// Group index for x under the rule's assignment mode. Randomized mode needs `rng`.
std::size_t group_of(const PlcpRule& rule, std::span<const double> x, Rng* rng = nullptr);
double threshold_of(const PlcpRule& rule, std::span<const double> x, Rng* rng = nullptr);
double threshold_of(const SplitConformalRule& rule, std::span<const double> x);

/// Where set sizes are measured: the regression interval |y - f(x)| <= t, a
/// finite label set {0..K-1}, or a grid of candidate labels.
struct IntervalDomain {};
struct LabelDomain {
  std::size_t classes = 0;
};
struct GridDomain {
  Vector ys;
};
using SetDomain = std::variant<IntervalDomain, LabelDomain, GridDomain>;

/// Interval length 2t for absolute residuals, otherwise the number of
/// candidate labels whose score is at most t.
double set_size(const ScoreSpec& spec, std::span<const double> x, double threshold,
                const SetDomain& domain, std::optional<std::size_t> row = std::nullopt);

/// Whether y belongs to {y : score(x, y) <= threshold}.
bool covers(const ScoreSpec& spec, const LabeledSample& sample, double threshold,
            std::optional<std::size_t> row = std::nullopt);

/// Optional min-max rescaling of scores to [0, 1], fitted on calibration
/// scores. Later scores are clamped into [0, 1].
struct ScoreNormalizer {
  double lo = 0.0;
  double hi = 1.0;

  static ScoreNormalizer fit(std::span<const double> scores);
  double apply(double s) const;
  /// Raw-scale threshold with the same coverage as normalized threshold t.
  double to_raw(double t) const;
};

}  // namespace plcp
