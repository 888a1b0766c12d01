#pragma once

#include <optional>
#include <span>

#include "plcp/partition_model.hpp"
#include "plcp/types.hpp"

namespace plcp {

struct WeightedScore {
  double s = 0.0;
  double w = 0.0;
};

/// Pinball loss: alpha*(q - s) when q >= s, else (1 - alpha)*(s - q).
double pinball_loss(double q, double s, double alpha);

/// (1/n) sum_j sum_i h^i(x_j) * pinball(q_i, s_j).
double empirical_objective(const PartitionModel& model, const QuantileVector& q,
                           std::span<const ScoredSample> data, double alpha);

/// Same objective from precomputed group weights (m x n) and scores.
double weighted_objective(const SampleMatrix& weights, const QuantileVector& q,
                          std::span<const double> scores, double alpha);

/// Smallest score t whose cumulative weight (scores <= t) reaches
/// (1 - alpha) * total weight. Minimizes sum_j w_j * pinball(q, s_j) over q.
/// Throws NumericError when the total weight is zero.
double weighted_quantile(std::span<const WeightedScore> items, double alpha);

/// Weighted quantiles of one fixed score set under many weight vectors.
///
/// Sorting happens once at construction; each query is a linear scan in
/// ascending score order that merges tied scores before testing the
/// cumulative weight against the target.
class SortedScores {
 public:
  explicit SortedScores(std::span<const double> scores);

  std::size_t size() const { return order_.size(); }

  /// Weighted quantile with weights aligned to the original score order;
  /// nullopt when the total weight is below `min_total`.
  std::optional<double> quantile(std::span<const double> weights, double alpha,
                                 double min_total = 0.0) const;

 private:
  std::vector<std::size_t> order_;
  Vector sorted_;
};

void check_alpha(double alpha);

}  // namespace plcp
