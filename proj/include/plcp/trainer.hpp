#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "plcp/core.hpp"
#include "plcp/partition_model.hpp"
#include "plcp/pinball.hpp"
#include "plcp/types.hpp"

namespace plcp {

struct TrainConfig {
  double alpha = 0.1;
  std::size_t m = 2;
  ArchKind arch = ArchKind::SoftmaxLinear;
  /// Hidden widths for SoftmaxMlp.
  std::vector<std::size_t> hidden = {16};
  /// Step size; 0 selects the per-architecture default.
  double lr = 0.0;
  std::size_t epochs = 500;
  /// Mini-batch size; 0 means full batch.
  std::size_t batch = 0;
  double tol = 1e-6;
  std::size_t patience = 5;
  std::uint64_t seed = 0;
  /// Initial weight scale; 0 selects the per-architecture default.
  double init_scale = 0.0;
  double temperature = 1.0;

  static constexpr double kDefaultLinearLr = 1000.0;
  static constexpr double kDefaultMlpLr = 100.0;
  static constexpr double kDefaultLinearInitScale = 0.1;
  // Small MLP weights start next to the symmetric saddle where all q_i agree.
  static constexpr double kDefaultMlpInitScale = 1.0;

  double effective_lr() const;
  double effective_init_scale() const;
  Architecture architecture(std::size_t input_dim) const;
  void validate() const;
};

/// Objective values of one training run. Entry 0 is the state after the
/// initial q-step; entry e >= 1 belongs to epoch e.
struct TrainTrace {
  Vector objective;
  /// Objective after the h-step of each epoch, before its q-step.
  Vector objective_before_q;
  std::size_t epochs_run = 0;
  /// Group updates skipped because the group's total weight fell below 1e-8.
  std::size_t degenerate_groups = 0;

  double final_objective() const { return objective.empty() ? 0.0 : objective.back(); }
};

struct FitResult {
  PlcpRule rule;
  TrainTrace trace;
};

/// Alternating minimization: an exact q-step on the initial model, then per
/// epoch one gradient pass over the model followed by an exact q-step.
FitResult fit_plcp(std::span<const ScoredSample> data, const TrainConfig& cfg,
                   ScoreSpec score = {});

/// Exact q-step: each q_i becomes the h^i-weighted (1 - alpha)-quantile of the
/// scores. Groups with total weight below 1e-8 keep their current q_i; returns
/// the number of such groups.
std::size_t q_step(const SampleMatrix& weights, const SortedScores& sorted, double alpha,
                   QuantileVector& q);

/// Mean pinball loss (1/|V|) sum pinball(t(x), s) of the rule's argmax thresholds.
double validation_pinball(const PlcpRule& rule, std::span<const ScoredSample> validation,
                          double alpha);

struct SelectMReport {
  /// Every m fitted on the training part, in evaluation order.
  std::vector<std::size_t> candidates;
  Vector validation_loss;
  std::size_t chosen = 1;
  FitResult final_fit;
};

/// Doubling search m_start, 2 m_start, ... until the validation loss stops
/// improving by a relative 1e-3, then bisection between the last improving
/// and first non-improving m, then a refit on all of `data`.
SelectMReport select_m(std::span<const ScoredSample> data, const TrainConfig& cfg,
                       std::size_t m_start, double holdout_frac = 0.2, std::size_t m_max = 256);

}  // namespace plcp
