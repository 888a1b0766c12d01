#include "plcp/pinball.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "plcp/error.hpp"
#include "plcp/simd/kernels.hpp"

namespace plcp {

namespace {

// Cumulative weights are compared to the target with this absolute slack.
constexpr double kCumulativeTolerance = 1e-12;

}  // namespace

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("alpha must lie in (0, 1), got " + std::to_string(alpha));
  }
}

double pinball_loss(double q, double s, double alpha) {
  check_alpha(alpha);
  return q >= s ? alpha * (q - s) : (1.0 - alpha) * (s - q);
}

double weighted_objective(const SampleMatrix& weights, const QuantileVector& q,
                          std::span<const double> scores, double alpha) {
  if (weights.rows() != q.m() || weights.cols() != scores.size()) {
    throw std::invalid_argument("weight matrix shape does not match q and scores");
  }
  if (scores.empty()) throw std::invalid_argument("empirical objective needs data");
  Vector costs(scores.size());
  double total = 0.0;
  for (std::size_t i = 0; i < q.m(); ++i) {
    simd::pinball(q[i], scores, alpha, costs);
    total += simd::dot(weights.row(i), costs);
  }
  return total / static_cast<double>(scores.size());
}

double empirical_objective(const PartitionModel& model, const QuantileVector& q,
                           std::span<const ScoredSample> data, double alpha) {
  check_alpha(alpha);
  if (data.empty()) throw std::invalid_argument("empirical objective needs data");
  if (model.m() != q.m()) throw std::invalid_argument("model output dimension differs from q.m");
  const SampleMatrix weights = model.forward_batch(feature_matrix(data));
  Vector scores(data.size());
  for (std::size_t j = 0; j < data.size(); ++j) scores[j] = data[j].s;
  return weighted_objective(weights, q, scores, alpha);
}

double weighted_quantile(std::span<const WeightedScore> items, double alpha) {
  check_alpha(alpha);
  Vector scores(items.size());
  Vector weights(items.size());
  for (std::size_t j = 0; j < items.size(); ++j) {
    if (!(items[j].w >= 0.0)) throw std::invalid_argument("weights must be nonnegative");
    scores[j] = items[j].s;
    weights[j] = items[j].w;
  }
  const auto result = SortedScores(scores).quantile(weights, alpha);
  if (!result) throw NumericError("weighted quantile of zero total weight");
  return *result;
}

SortedScores::SortedScores(std::span<const double> scores) : order_(scores.size()) {
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  std::stable_sort(order_.begin(), order_.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  sorted_.resize(order_.size());
  for (std::size_t r = 0; r < order_.size(); ++r) sorted_[r] = scores[order_[r]];
}

std::optional<double> SortedScores::quantile(std::span<const double> weights, double alpha,
                                             double min_total) const {
  if (weights.size() != order_.size()) throw std::invalid_argument("weight count mismatch");
  const double total = simd::sum(weights);
  if (!(total > 0.0) || total < min_total) return std::nullopt;
  const double target = (1.0 - alpha) * total - kCumulativeTolerance;
  double cumulative = 0.0;
  const std::size_t n = order_.size();
  for (std::size_t r = 0; r < n;) {
    const double value = sorted_[r];
    for (; r < n && sorted_[r] == value; ++r) cumulative += weights[order_[r]];
    if (cumulative >= target) return value;
  }
  // Rounding left the running sum short of the target: the largest score is
  // the only remaining candidate.
  return sorted_.back();
}

}  // namespace plcp
