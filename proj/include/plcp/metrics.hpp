#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "plcp/baselines.hpp"
#include "plcp/core.hpp"
#include "plcp/synth.hpp"
#include "plcp/types.hpp"

namespace plcp {

/// A named, possibly overlapping, subset of covariate space used for reporting.
struct EvalGroup {
  std::string name;
  std::function<bool(std::span<const double>)> contains;
};

/// Groups {x[column] < cut} and {x[column] >= cut}.
std::vector<EvalGroup> halves(std::size_t column, double cut, const std::string& label);
/// For each listed column c, the groups {x[c] = 0} and {x[c] = 1}, in that order,
/// named with 1-based column numbers ("X1=0", "X1=1", ...).
std::vector<EvalGroup> binary_digit_groups(std::span<const std::size_t> columns);

struct GroupCoverage {
  std::string name;
  std::size_t count = 0;
  /// NaN when the group is absent from the test set.
  double coverage = 0.0;
  double mean_length = 0.0;

  bool absent() const { return count == 0; }
};

struct CoverageReport {
  double marginal = 0.0;
  double mean_length = 0.0;
  std::size_t count = 0;
  std::vector<GroupCoverage> groups;
};

/// Coverage of test points given per-point scores, thresholds and set sizes.
CoverageReport coverage(std::span<const LabeledSample> test, std::span<const double> scores,
                        std::span<const double> thresholds, std::span<const double> lengths,
                        std::span<const EvalGroup> groups = {});

/// Per-point thresholds of each rule type. PLCP evaluation splits the test
/// points over `threads` workers; randomized assignment draws point j from
/// substream j of the rule's assignment seed, so results do not depend on
/// the thread count.
Vector rule_thresholds(const PlcpRule& rule, std::span<const Vector> xs, std::size_t threads = 1);
Vector rule_thresholds(const SplitConformalRule& rule, std::span<const Vector> xs);
Vector rule_thresholds(const GroupConditionalRule& rule, std::span<const Vector> xs);

struct McEstimate {
  double mean = 0.0;
  double se = 0.0;
};

/// (1/N) sum (cond_cdf(x, t(x)) - (1 - alpha))^2 with its standard error.
McEstimate msce_oracle(std::span<const Vector> xs, std::span<const double> thresholds,
                       const OracleSpec& oracle);

/// Monte-Carlo E[pinball(t(X), S) - pinball(q_{1-alpha}(X), S)], drawing
/// `draws` scores per x from the oracle.
McEstimate pinball_gap(std::span<const Vector> xs, std::span<const double> thresholds,
                       const OracleSpec& oracle, Rng& rng, std::size_t draws = 1);

struct CoverageInterval {
  double lo = 0.0;
  double hi = 1.0;
};

/// 1 - alpha -+ sqrt(p), or -+ sqrt(p / gamma) for a group of mass at least
/// gamma, clamped to [0, 1].
CoverageInterval fallback_bounds(double p, double alpha, std::optional<double> gamma = std::nullopt);

/// Sample correlation; 0 when either input has zero variance.
double pearson(std::span<const double> a, std::span<const double> b);

/// Biased HSIC (1/n^2) tr(K H L H) with Gaussian kernels exp(-d^2 / (2 w^2)),
/// w the median pairwise distance of each variable (1.0 when that median is
/// zero). Repeated values are merged, so cost is quadratic in the number of
/// distinct values rather than in n.
double hsic(std::span<const double> a, std::span<const double> b);

/// Median of |a_i - a_j| over pairs i < j; the two middle values are averaged
/// when the pair count is even.
double median_pairwise_distance(std::span<const double> a);

struct EvalReport {
  CoverageReport coverage;
  std::optional<double> msce;
  double pearson_r = 0.0;
  double hsic = 0.0;
};

EvalReport evaluate_thresholds(std::span<const LabeledSample> test, const ScoreSpec& score,
                               std::span<const double> thresholds,
                               std::span<const EvalGroup> groups, const OracleSpec* oracle,
                               const SetDomain& domain = IntervalDomain{});

}  // namespace plcp
