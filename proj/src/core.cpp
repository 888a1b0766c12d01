#include "plcp/core.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "plcp/error.hpp"

namespace plcp {

const char* to_string(ScoreKind kind) {
  switch (kind) {
    case ScoreKind::AbsoluteResidual: return "absolute_residual";
    case ScoreKind::SoftmaxComplement: return "softmax_complement";
    case ScoreKind::CumulativeSoftmax: return "cumulative_softmax";
    case ScoreKind::Precomputed: return "precomputed";
  }
  return "unknown";
}

ScoreKind score_kind_from_string(const std::string& name) {
  if (name == "absolute_residual") return ScoreKind::AbsoluteResidual;
  if (name == "softmax_complement") return ScoreKind::SoftmaxComplement;
  if (name == "cumulative_softmax") return ScoreKind::CumulativeSoftmax;
  if (name == "precomputed") return ScoreKind::Precomputed;
  throw ConfigError("unknown score kind '" + name + "'");
}

namespace {

std::size_t class_index(double y, std::size_t classes) {
  if (!(y >= 0.0) || y != std::floor(y) || y >= static_cast<double>(classes)) {
    throw DataError("class index " + std::to_string(y) + " outside [0, " +
                    std::to_string(classes) + ")");
  }
  return static_cast<std::size_t>(y);
}

void check_probabilities(std::span<const double> p) {
  double total = 0.0;
  for (double v : p) {
    if (!(v >= 0.0)) throw DataError("class probabilities must be nonnegative");
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-6) throw DataError("class probabilities must sum to 1");
}

double classification_score(ScoreKind kind, std::span<const double> p, std::size_t label) {
  if (kind == ScoreKind::SoftmaxComplement) return 1.0 - p[label];
  double above = 0.0;
  for (double v : p) {
    if (v > p[label]) above += v;
  }
  return above;
}

double point_prediction(const ScoreSpec& spec, std::span<const double> x,
                        std::optional<std::size_t> row) {
  if (row && !spec.table.empty()) {
    if (*row >= spec.table.size() || spec.table[*row].size() != 1) {
      throw DataError("prediction table has no scalar entry for row " + std::to_string(*row));
    }
    return spec.table[*row][0];
  }
  if (!spec.point) throw std::invalid_argument("absolute residual score needs a point predictor");
  return spec.point(x);
}

Vector class_probabilities(const ScoreSpec& spec, std::span<const double> x,
                           std::optional<std::size_t> row) {
  Vector p;
  if (row && !spec.table.empty()) {
    if (*row >= spec.table.size()) {
      throw DataError("prediction table has no entry for row " + std::to_string(*row));
    }
    p = spec.table[*row];
  } else {
    if (!spec.probabilities) {
      throw std::invalid_argument("classification score needs a probability predictor");
    }
    p = spec.probabilities(x);
  }
  check_probabilities(p);
  return p;
}

double score_at(const ScoreSpec& spec, std::span<const double> x, double y,
                std::optional<std::size_t> row) {
  switch (spec.kind) {
    case ScoreKind::AbsoluteResidual:
      return std::abs(y - point_prediction(spec, x, row));
    case ScoreKind::SoftmaxComplement:
    case ScoreKind::CumulativeSoftmax: {
      const Vector p = class_probabilities(spec, x, row);
      return classification_score(spec.kind, p, class_index(y, p.size()));
    }
    case ScoreKind::Precomputed:
      return y;
  }
  throw std::invalid_argument("unknown score kind");
}

}  // namespace

void PlcpRule::validate() const {
  if (model.m() != q.m()) {
    throw std::invalid_argument("rule model has " + std::to_string(model.m()) +
                                " outputs but " + std::to_string(q.m()) + " thresholds");
  }
}

double compute_score(const ScoreSpec& spec, const LabeledSample& sample) {
  return score_at(spec, sample.x, sample.y, std::nullopt);
}

double compute_score(const ScoreSpec& spec, const LabeledSample& sample, std::size_t row) {
  return score_at(spec, sample.x, sample.y, row);
}

Vector compute_scores(const ScoreSpec& spec, std::span<const LabeledSample> samples) {
  Vector scores(samples.size());
  for (std::size_t j = 0; j < samples.size(); ++j) scores[j] = compute_score(spec, samples[j], j);
  return scores;
}

std::vector<ScoredSample> score_samples(const ScoreSpec& spec,
                                        std::span<const LabeledSample> samples) {
  std::vector<ScoredSample> out;
  out.reserve(samples.size());
  for (std::size_t j = 0; j < samples.size(); ++j) {
    out.push_back({samples[j].x, compute_score(spec, samples[j], j)});
  }
  return out;
}

std::size_t argmax_index(std::span<const double> p) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < p.size(); ++i) {
    if (p[i] > p[best]) best = i;
  }
  return best;
}

std::size_t assign_group(std::span<const double> h, AssignmentMode mode, Rng* rng) {
  if (mode == AssignmentMode::Argmax) return argmax_index(h);
  if (rng == nullptr) throw std::invalid_argument("randomized assignment needs a generator");
  const double u = rng->uniform();
  double cumulative = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    cumulative += h[i];
    if (u < cumulative) return i;
  }
  // u landed in the rounding gap above the last partial sum.
  return h.size() - 1;
}

std::size_t group_of(const PlcpRule& rule, std::span<const double> x, Rng* rng) {
  const Vector h = rule.model.forward(x);
  if (h.size() != rule.q.m()) throw std::invalid_argument("rule dimension mismatch");
  return assign_group(h, rule.assignment.mode, rng);
}

double threshold_of(const PlcpRule& rule, std::span<const double> x, Rng* rng) {
  return rule.q[group_of(rule, x, rng)];
}

double threshold_of(const SplitConformalRule& rule, std::span<const double>) {
  return rule.threshold;
}

double set_size(const ScoreSpec& spec, std::span<const double> x, double threshold,
                const SetDomain& domain, std::optional<std::size_t> row) {
  if (std::holds_alternative<IntervalDomain>(domain)) {
    if (spec.kind == ScoreKind::AbsoluteResidual) return 2.0 * threshold;
    throw std::invalid_argument(std::string("interval length needs an absolute residual score, got ") +
                                to_string(spec.kind) + "; supply a label set or y grid");
  }
  if (spec.kind == ScoreKind::Precomputed) {
    throw std::invalid_argument("precomputed scores do not define a prediction set over labels");
  }
  std::size_t count = 0;
  if (const auto* labels = std::get_if<LabelDomain>(&domain)) {
    if (!spec.is_classification()) {
      throw std::invalid_argument("label-set sizes need a classification score");
    }
    const Vector p = class_probabilities(spec, x, row);
    if (p.size() != labels->classes) throw DataError("probability vector length differs from K");
    for (std::size_t k = 0; k < labels->classes; ++k) {
      if (classification_score(spec.kind, p, k) <= threshold) ++count;
    }
    return static_cast<double>(count);
  }
  for (double y : std::get<GridDomain>(domain).ys) {
    if (score_at(spec, x, y, row) <= threshold) ++count;
  }
  return static_cast<double>(count);
}

bool covers(const ScoreSpec& spec, const LabeledSample& sample, double threshold,
            std::optional<std::size_t> row) {
  return score_at(spec, sample.x, sample.y, row) <= threshold;
}

ScoreNormalizer ScoreNormalizer::fit(std::span<const double> scores) {
  if (scores.empty()) throw DataError("cannot fit a score normalizer without scores");
  const auto [lo, hi] = std::minmax_element(scores.begin(), scores.end());
  return ScoreNormalizer{*lo, *hi};
}

double ScoreNormalizer::apply(double s) const {
  if (!(hi > lo)) return s <= lo ? 0.0 : 1.0;
  return std::clamp((s - lo) / (hi - lo), 0.0, 1.0);
}

double ScoreNormalizer::to_raw(double t) const {
  if (t >= 1.0) return kInfinity;
  if (t < 0.0) return -kInfinity;
  if (!(hi > lo)) return lo;
  return lo + t * (hi - lo);
}

}  // namespace plcp
