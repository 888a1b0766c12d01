#include "plcp/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <spdlog/spdlog.h>
#include <stdexcept>

#include "plcp/pinball.hpp"

namespace plcp {

GroupSpec GroupSpec::single() {
  return GroupSpec{[](std::span<const double>) { return std::size_t{0}; }, 1, {"all"}};
}

GroupSpec GroupSpec::by_cuts(std::size_t column, Vector cuts) {
  if (!std::is_sorted(cuts.begin(), cuts.end()) ||
      std::adjacent_find(cuts.begin(), cuts.end()) != cuts.end()) {
    throw std::invalid_argument("group cuts must be strictly increasing");
  }
  GroupSpec spec;
  spec.count = cuts.size() + 1;
  for (std::size_t g = 0; g < spec.count; ++g) {
    std::string name = "x" + std::to_string(column);
    if (g == 0) {
      name += "<" + std::to_string(cuts[0]);
    } else if (g == cuts.size()) {
      name += ">=" + std::to_string(cuts[g - 1]);
    } else {
      name += "in[" + std::to_string(cuts[g - 1]) + "," + std::to_string(cuts[g]) + ")";
    }
    spec.names.push_back(std::move(name));
  }
  spec.assign = [column, cuts = std::move(cuts)](std::span<const double> x) {
    if (column >= x.size()) throw std::invalid_argument("group column out of range");
    return static_cast<std::size_t>(std::upper_bound(cuts.begin(), cuts.end(), x[column]) -
                                    cuts.begin());
  };
  return spec;
}

GroupSpec GroupSpec::by_bits(std::vector<std::size_t> columns) {
  if (columns.empty() || columns.size() > 16) throw std::invalid_argument("by_bits needs 1..16 columns");
  GroupSpec spec;
  spec.count = std::size_t{1} << columns.size();
  for (std::size_t g = 0; g < spec.count; ++g) spec.names.push_back("pattern" + std::to_string(g));
  spec.assign = [columns = std::move(columns)](std::span<const double> x) {
    std::size_t g = 0;
    for (std::size_t b = 0; b < columns.size(); ++b) {
      if (columns[b] >= x.size()) throw std::invalid_argument("group column out of range");
      if (x[columns[b]] != 0.0) g |= std::size_t{1} << b;
    }
    return g;
  };
  return spec;
}

SplitConformalRule split_conformal(std::span<const double> scores, double alpha, ScoreSpec score) {
  check_alpha(alpha);
  SplitConformalRule rule;
  rule.score = std::move(score);
  const std::size_t n = scores.size();
  // The small slack keeps products such as 0.9 * 10 from rounding up a rank.
  const double rank = std::ceil((1.0 - alpha) * static_cast<double>(n + 1) - 1e-9);
  const auto k = static_cast<std::size_t>(std::max(rank, 1.0));
  if (k > n) return rule;
  Vector sorted(scores.begin(), scores.end());
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(k - 1), sorted.end());
  rule.threshold = sorted[k - 1];
  return rule;
}

double GroupConditionalRule::threshold_of(std::span<const double> x) const {
  const std::size_t g = groups.assign(x);
  if (g >= thresholds.size()) throw std::out_of_range("group id out of range");
  return thresholds[g];
}

GroupConditionalRule group_conditional(std::span<const ScoredSample> data, GroupSpec groups,
                                       double alpha, ScoreSpec score) {
  check_alpha(alpha);
  std::vector<Vector> members(groups.count);
  for (const auto& sample : data) {
    const std::size_t g = groups.assign(sample.x);
    if (g >= groups.count) throw std::out_of_range("group id out of range");
    members[g].push_back(sample.s);
  }
  GroupConditionalRule rule{std::move(groups), Vector(members.size(), kInfinity), std::move(score)};
  for (std::size_t g = 0; g < members.size(); ++g) {
    if (members[g].empty()) {
      spdlog::warn("group {} has no calibration samples; its threshold is +inf", g);
      continue;
    }
    rule.thresholds[g] = split_conformal(members[g], alpha).threshold;
  }
  return rule;
}

}  // namespace plcp
