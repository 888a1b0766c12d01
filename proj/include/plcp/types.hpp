#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace plcp {

using Vector = std::vector<double>;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// A covariate vector with its label. For classification the label holds the
/// class index as an integral double; for precomputed scores it holds the score.
struct LabeledSample {
  Vector x;
  double y = 0.0;
};

/// A covariate vector paired with its conformity score.
struct ScoredSample {
  Vector x;
  double s = 0.0;
};

/// Per-group thresholds. Entries are finite or +infinity.
struct QuantileVector {
  Vector values;

  std::size_t m() const { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }
  double& operator[](std::size_t i) { return values[i]; }
};

enum class ScoreKind { AbsoluteResidual, SoftmaxComplement, CumulativeSoftmax, Precomputed };

using PointPredictor = std::function<double(std::span<const double>)>;
using ProbabilityPredictor = std::function<Vector(std::span<const double>)>;

/// How a label's conformity score is computed.
///
/// Predictions come either from a function of x or from `table`, a list of
/// per-sample predictions aligned with a dataset (length-1 entries for
/// regression, probability vectors for classification). The table is only
/// consulted by the row-indexed overloads of compute_score/set_size.
struct ScoreSpec {
  ScoreKind kind = ScoreKind::Precomputed;
  PointPredictor point;
  ProbabilityPredictor probabilities;
  std::vector<Vector> table;

  static ScoreSpec absolute_residual(PointPredictor f) {
    ScoreSpec spec;
    spec.kind = ScoreKind::AbsoluteResidual;
    spec.point = std::move(f);
    return spec;
  }
  static ScoreSpec softmax_complement(ProbabilityPredictor p) {
    ScoreSpec spec;
    spec.kind = ScoreKind::SoftmaxComplement;
    spec.probabilities = std::move(p);
    return spec;
  }
  static ScoreSpec cumulative_softmax(ProbabilityPredictor p) {
    ScoreSpec spec;
    spec.kind = ScoreKind::CumulativeSoftmax;
    spec.probabilities = std::move(p);
    return spec;
  }
  static ScoreSpec precomputed() { return ScoreSpec{}; }

  bool is_classification() const {
    return kind == ScoreKind::SoftmaxComplement || kind == ScoreKind::CumulativeSoftmax;
  }
};

const char* to_string(ScoreKind kind);
ScoreKind score_kind_from_string(const std::string& name);

}  // namespace plcp
