#include "plcp/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <spdlog/spdlog.h>
#include <stdexcept>
#include <string>

#include "plcp/error.hpp"
#include "plcp/rng.hpp"
#include "plcp/simd/kernels.hpp"

namespace plcp {

namespace {

constexpr double kDegenerateWeight = 1e-8;
constexpr int kMaxHalvings = 40;

Vector scores_of(std::span<const ScoredSample> data) {
  Vector scores(data.size());
  for (std::size_t j = 0; j < data.size(); ++j) {
    if (!std::isfinite(data[j].s)) throw DataError("score of sample " + std::to_string(j) + " is not finite");
    scores[j] = data[j].s;
  }
  return scores;
}

SampleMatrix select_columns(const SampleMatrix& src, std::span<const std::size_t> cols) {
  SampleMatrix out(src.rows(), cols.size());
  for (std::size_t r = 0; r < src.rows(); ++r) {
    const auto in = src.row(r);
    auto dst = out.row(r);
    for (std::size_t c = 0; c < cols.size(); ++c) dst[c] = in[cols[c]];
  }
  return out;
}

void gradient_step(PartitionModel& model, const SampleMatrix& features, const ForwardPass& pass,
                   const SampleMatrix& costs, double lr) {
  const GradientVector grad = model.backward(features, pass, costs);
  simd::axpy(-lr, grad, model.params());
}

}  // namespace

double TrainConfig::effective_lr() const {
  if (lr > 0.0) return lr;
  return arch == ArchKind::SoftmaxLinear ? kDefaultLinearLr : kDefaultMlpLr;
}

double TrainConfig::effective_init_scale() const {
  if (init_scale > 0.0) return init_scale;
  return arch == ArchKind::SoftmaxLinear ? kDefaultLinearInitScale : kDefaultMlpInitScale;
}

Architecture TrainConfig::architecture(std::size_t input_dim) const {
  Architecture a = arch == ArchKind::SoftmaxLinear ? Architecture::softmax_linear(input_dim, m)
                                                   : Architecture::softmax_mlp(input_dim, hidden, m);
  a.temperature = temperature;
  return a;
}

void TrainConfig::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  if (m < 1) throw ConfigError("m must be at least 1");
  if (lr < 0.0 || !std::isfinite(lr)) throw ConfigError("lr must be positive");
  if (epochs < 1) throw ConfigError("epochs must be at least 1");
  if (tol < 0.0) throw ConfigError("tol must be nonnegative");
  if (!(temperature > 0.0)) throw ConfigError("temperature must be positive");
  if (init_scale < 0.0) throw ConfigError("init_scale must be nonnegative");
  if (arch == ArchKind::SoftmaxMlp && hidden.empty()) throw ConfigError("MLP needs hidden widths");
}

std::size_t q_step(const SampleMatrix& weights, const SortedScores& sorted, double alpha,
                   QuantileVector& q) {
  std::size_t skipped = 0;
  for (std::size_t i = 0; i < q.m(); ++i) {
    const auto value = sorted.quantile(weights.row(i), alpha, kDegenerateWeight);
    if (value) {
      q[i] = *value;
    } else {
      ++skipped;
    }
  }
  return skipped;
}

FitResult fit_plcp(std::span<const ScoredSample> data, const TrainConfig& cfg, ScoreSpec score) {
  cfg.validate();
  if (data.empty()) throw DataError("training needs at least one calibration sample");
  const SampleMatrix features = feature_matrix(data);
  const Vector scores = scores_of(data);
  const SortedScores sorted(scores);
  const std::size_t n = data.size();
  double lr = cfg.effective_lr();

  PartitionModel model = PartitionModel::init(cfg.architecture(features.rows()), cfg.seed,
                                              cfg.effective_init_scale());
  // Groups that start degenerate fall back to the pooled quantile.
  const double pooled = *sorted.quantile(Vector(n, 1.0), cfg.alpha);
  QuantileVector q{Vector(cfg.m, pooled)};

  TrainTrace trace;
  ForwardPass pass = model.forward_pass(features);
  trace.degenerate_groups += q_step(pass.probs, sorted, cfg.alpha, q);
  double previous = weighted_objective(pass.probs, q, scores, cfg.alpha);
  trace.objective.push_back(previous);
  trace.objective_before_q.push_back(previous);

  Rng shuffle_rng = Rng(cfg.seed).substream(1);
  std::size_t streak = 0;
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const SampleMatrix costs = pinball_costs(q, scores, cfg.alpha);
    if (cfg.batch == 0 || cfg.batch >= n) {
      // A step that raises the objective is undone and retried at half the rate.
      const Vector start = model.params();
      for (int halvings = 0;; ++halvings) {
        gradient_step(model, features, pass, costs, lr);
        ForwardPass next = model.forward_pass(features);
        if (weighted_objective(next.probs, q, scores, cfg.alpha) <= previous) {
          pass = std::move(next);
          break;
        }
        model.params() = start;
        if (halvings == kMaxHalvings) break;
        lr *= 0.5;
        spdlog::debug("epoch {}: step rejected, learning rate now {}", epoch, lr);
      }
    } else {
      const auto order = shuffled_indices(n, shuffle_rng);
      for (std::size_t start = 0; start < n; start += cfg.batch) {
        const std::span<const std::size_t> cols(order.data() + start, std::min(cfg.batch, n - start));
        const SampleMatrix sub_features = select_columns(features, cols);
        const ForwardPass sub_pass = model.forward_pass(sub_features);
        gradient_step(model, sub_features, sub_pass, select_columns(costs, cols), lr);
      }
      pass = model.forward_pass(features);
    }

    trace.objective_before_q.push_back(weighted_objective(pass.probs, q, scores, cfg.alpha));
    trace.degenerate_groups += q_step(pass.probs, sorted, cfg.alpha, q);
    const double current = weighted_objective(pass.probs, q, scores, cfg.alpha);
    trace.objective.push_back(current);
    trace.epochs_run = epoch;
    if (!std::isfinite(current)) throw NumericError("objective became non-finite at epoch " + std::to_string(epoch));

    const double relative = (previous - current) / std::max(std::abs(previous), 1e-300);
    streak = relative < cfg.tol ? streak + 1 : 0;
    previous = current;
    if (streak >= cfg.patience) {
      spdlog::debug("stopping after epoch {}: relative decrease below {} for {} epochs", epoch,
                    cfg.tol, cfg.patience);
      break;
    }
  }
  spdlog::debug("fit m={} epochs={} objective={:.17g}", cfg.m, trace.epochs_run,
                trace.final_objective());

  PlcpRule rule{std::move(model), std::move(q), std::move(score), Assignment{}};
  return FitResult{std::move(rule), std::move(trace)};
}

double validation_pinball(const PlcpRule& rule, std::span<const ScoredSample> validation,
                          double alpha) {
  if (validation.empty()) throw DataError("validation split is empty");
  const SampleMatrix probs = rule.model.forward_batch(feature_matrix(validation));
  double total = 0.0;
  Vector column(probs.rows());
  for (std::size_t j = 0; j < validation.size(); ++j) {
    for (std::size_t i = 0; i < probs.rows(); ++i) column[i] = probs(i, j);
    total += pinball_loss(rule.q[argmax_index(column)], validation[j].s, alpha);
  }
  return total / static_cast<double>(validation.size());
}

SelectMReport select_m(std::span<const ScoredSample> data, const TrainConfig& cfg,
                       std::size_t m_start, double holdout_frac, std::size_t m_max) {
  cfg.validate();
  if (m_start < 1) throw ConfigError("m_start must be at least 1");
  if (!(holdout_frac > 0.0 && holdout_frac < 1.0)) throw ConfigError("holdout_frac must lie in (0, 1)");
  if (m_max < m_start) throw ConfigError("m_max must be at least m_start");
  const std::size_t n = data.size();
  const auto n_val = static_cast<std::size_t>(std::floor(holdout_frac * static_cast<double>(n) + 1e-9));
  if (n_val == 0 || n_val >= n) throw DataError("validation split is empty");

  Rng split_rng = Rng(cfg.seed).substream(2);
  const auto order = shuffled_indices(n, split_rng);
  std::vector<ScoredSample> train;
  std::vector<ScoredSample> validation;
  train.reserve(n - n_val);
  validation.reserve(n_val);
  for (std::size_t r = 0; r < n; ++r) {
    (r < n_val ? validation : train).push_back(data[order[r]]);
  }

  SelectMReport report;
  auto evaluate = [&](std::size_t m) {
    TrainConfig c = cfg;
    c.m = m;
    const FitResult fit = fit_plcp(train, c);
    const double loss = validation_pinball(fit.rule, validation, cfg.alpha);
    report.candidates.push_back(m);
    report.validation_loss.push_back(loss);
    spdlog::info("select-m: m={} validation pinball={:.10g}", m, loss);
    return loss;
  };
  auto improves = [](double candidate, double incumbent) {
    return candidate < incumbent * (1.0 - 1e-3);
  };

  std::size_t good = m_start;
  double good_loss = evaluate(m_start);
  std::size_t bad = 0;
  while (good * 2 <= m_max) {
    const std::size_t next = good * 2;
    const double loss = evaluate(next);
    if (!improves(loss, good_loss)) {
      bad = next;
      break;
    }
    good = next;
    good_loss = loss;
  }
  while (bad != 0 && bad - good > 1) {
    const std::size_t mid = good + (bad - good) / 2;
    const double loss = evaluate(mid);
    if (improves(loss, good_loss)) {
      good = mid;
      good_loss = loss;
    } else {
      bad = mid;
    }
  }

  report.chosen = good;
  TrainConfig final_cfg = cfg;
  final_cfg.m = good;
  report.final_fit = fit_plcp(data, final_cfg);
  return report;
}

}  // namespace plcp
