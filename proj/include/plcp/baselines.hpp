#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "plcp/core.hpp"
#include "plcp/types.hpp"

namespace plcp {

/// A partition of covariate space into `count` known groups.
struct GroupSpec {
  std::function<std::size_t(std::span<const double>)> assign;
  std::size_t count = 1;
  std::vector<std::string> names;

  static GroupSpec single();
  /// Group g holds x[column] in [cuts[g-1], cuts[g]); cuts must be increasing.
  static GroupSpec by_cuts(std::size_t column, Vector cuts);
  /// Group is the binary pattern of the listed 0/1 columns, first column as the low bit.
  static GroupSpec by_bits(std::vector<std::size_t> columns);
};

/// k-th smallest of {S_1..S_n, +inf} with k = ceil((1 - alpha)(n + 1)).
SplitConformalRule split_conformal(std::span<const double> scores, double alpha,
                                   ScoreSpec score = {});

struct GroupConditionalRule {
  GroupSpec groups;
  Vector thresholds;
  ScoreSpec score;

  double threshold_of(std::span<const double> x) const;
};

/// Split conformal within each group. Empty groups get +inf and a warning.
GroupConditionalRule group_conditional(std::span<const ScoredSample> data, GroupSpec groups,
                                       double alpha, ScoreSpec score = {});

}  // namespace plcp
