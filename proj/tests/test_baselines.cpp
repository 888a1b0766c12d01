#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "plcp/baselines.hpp"
#include "plcp/rng.hpp"
#include "plcp/synth.hpp"

using namespace plcp;

namespace {

std::vector<ScoredSample> scored(const Vector& scores, double x = 0.0) {
  std::vector<ScoredSample> out;
  for (double s : scores) out.push_back({{x}, s});
  return out;
}

}  // namespace

TEST_CASE("split conformal order statistic") {
  const Vector nine = {0.5, 0.1, 0.9, 0.3, 0.7, 0.2, 0.8, 0.4, 0.6};
  CHECK(split_conformal(nine, 0.1).threshold == 0.9);
  CHECK(std::isinf(split_conformal(Vector{0.1, 0.2, 0.3, 0.4, 0.5}, 0.1).threshold));
  CHECK(std::isinf(split_conformal(Vector{}, 0.1).threshold));
  // n = 100: k = ceil(0.9 * 101) = 91.
  Vector hundred(100);
  for (int i = 0; i < 100; ++i) hundred[i] = i + 1;
  CHECK(split_conformal(hundred, 0.1).threshold == 91.0);
}

TEST_CASE("split conformal threshold is monotone in the level") {
  Rng rng(2);
  Vector s(57);
  for (auto& v : s) v = rng.uniform();
  double previous = -1.0;
  for (double level = 0.05; level < 0.99; level += 0.01) {
    const double t = split_conformal(s, 1.0 - level).threshold;
    CHECK(t >= previous);
    previous = t;
  }
}

TEST_CASE("adding scores above the threshold never lowers it") {
  Rng rng(3);
  Vector s(40);
  for (auto& v : s) v = rng.uniform();
  const double t = split_conformal(s, 0.1).threshold;
  s.push_back(t + 1.0);
  s.push_back(t + 2.0);
  CHECK(split_conformal(s, 0.1).threshold >= t);
}

TEST_CASE("split conformal marginal coverage over repeated trials") {
  // Uniform scores: the coverage of threshold t for a fresh point is exactly t,
  // and E[t] = E[U_(91)] = 91/101 for n = 100.
  Rng rng(99);
  const int trials = 20000;
  double covered = 0.0;
  for (int t = 0; t < trials; ++t) {
    Vector cal(100);
    for (auto& v : cal) v = rng.uniform();
    covered += std::min(split_conformal(cal, 0.1).threshold, 1.0);
  }
  const double mean = covered / trials;
  CHECK(mean >= 0.90);
  CHECK(mean <= 0.92);
  // sd of U_(91) is about 0.0295, so 4 standard errors over 20000 trials is 8.4e-4.
  CHECK(std::abs(mean - 91.0 / 101.0) < 8.4e-4);
}

TEST_CASE("group conditional with one group equals split conformal") {
  Rng rng(4);
  Vector s(77);
  for (auto& v : s) v = rng.uniform();
  const auto rule = group_conditional(scored(s), GroupSpec::single(), 0.1);
  CHECK(rule.thresholds[0] == split_conformal(s, 0.1).threshold);
  CHECK(rule.threshold_of(Vector{3.0}) == rule.thresholds[0]);
}

TEST_CASE("disjoint groups bracket the pooled threshold") {
  auto data = scored({0.1, 0.2, 0.3, 0.4, 0.5, 0.1, 0.2, 0.3, 0.4, 0.5, 0.1, 0.2, 0.3, 0.4, 0.5,
                      0.1, 0.2, 0.3, 0.4, 0.5}, -1.0);
  const auto upper = scored({0.5, 0.6, 0.7, 0.8, 0.9, 0.5, 0.6, 0.7, 0.8, 0.9, 0.5, 0.6, 0.7, 0.8, 0.9,
                             0.5, 0.6, 0.7, 0.8, 0.9}, 1.0);
  data.insert(data.end(), upper.begin(), upper.end());
  const auto rule = group_conditional(data, GroupSpec::by_cuts(0, {0.0}), 0.1);
  Vector pooled;
  for (const auto& d : data) pooled.push_back(d.s);
  const double t = split_conformal(pooled, 0.1).threshold;
  CHECK(rule.thresholds[0] <= t);
  CHECK(rule.thresholds[1] >= t);
  CHECK(rule.thresholds[0] == 0.5);
  CHECK(rule.thresholds[1] == 0.9);
}

TEST_CASE("empty groups get an infinite threshold") {
  const auto rule = group_conditional(scored({0.1, 0.2, 0.3}, -1.0), GroupSpec::by_cuts(0, {0.0}), 0.1);
  CHECK(std::isinf(rule.thresholds[1]));
}

TEST_CASE("group conditional on the intro example recovers the half quantiles") {
  const auto samples = gen_intro(200000, 17);
  std::vector<ScoredSample> data;
  for (const auto& s : samples) data.push_back({s.x, std::abs(s.y - s.x[0])});
  const auto rule = group_conditional(data, GroupSpec::by_cuts(0, {0.0}), 0.1);
  CHECK(rule.thresholds[0] == doctest::Approx(1.6448536269514722).epsilon(0.01));
  CHECK(rule.thresholds[1] == doctest::Approx(2.3261743073533476).epsilon(0.01));
}

TEST_CASE("group specs") {
  const auto cuts = GroupSpec::by_cuts(1, {-1.0, 1.0});
  CHECK(cuts.count == 3);
  CHECK(cuts.assign(Vector{0.0, -2.0}) == 0);
  CHECK(cuts.assign(Vector{0.0, -1.0}) == 1);
  CHECK(cuts.assign(Vector{0.0, 1.0}) == 2);
  CHECK_THROWS_AS(GroupSpec::by_cuts(0, {1.0, 0.0}), std::invalid_argument);
  const auto bits = GroupSpec::by_bits({0, 2});
  CHECK(bits.count == 4);
  CHECK(bits.assign(Vector{1.0, 0.0, 1.0}) == 3);
  CHECK(bits.assign(Vector{0.0, 1.0, 1.0}) == 2);
}
