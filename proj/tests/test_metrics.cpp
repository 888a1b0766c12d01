#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "plcp/baselines.hpp"
#include "plcp/metrics.hpp"
#include "plcp/synth.hpp"
#include "plcp/trainer.hpp"

using namespace plcp;

namespace {

constexpr double kZ95 = 1.6448536269514722;
constexpr double kZ95Sqrt2 = 2.3261743073533476;
// 0.5 * (erf(z95 / 2) - 0.9)^2: constant t = z95 on the intro family.
constexpr double kConstantMsce = 0.010482672018153442;

std::vector<Vector> covariates(const std::vector<LabeledSample>& data) {
  std::vector<Vector> xs;
  for (const auto& s : data) xs.push_back(s.x);
  return xs;
}

double naive_hsic(const Vector& a, const Vector& b) {
  const std::size_t n = a.size();
  const double wa = median_pairwise_distance(a);
  const double wb = median_pairwise_distance(b);
  std::vector<Vector> k(n, Vector(n)), l(n, Vector(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      k[i][j] = std::exp(-(a[i] - a[j]) * (a[i] - a[j]) / (2 * wa * wa));
      l[i][j] = std::exp(-(b[i] - b[j]) * (b[i] - b[j]) / (2 * wb * wb));
    }
  }
  // Double-center K, then tr(K_c L) / n^2.
  Vector row(n, 0.0);
  double all = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) row[i] += k[i][j] / n;
    all += row[i] / n;
  }
  double tr = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) tr += (k[i][j] - row[i] - row[j] + all) * l[j][i];
  }
  return tr / (n * n);
}

}  // namespace

TEST_CASE("coverage counts and absent groups") {
  std::vector<LabeledSample> test = {{{-0.5}, 0}, {{-0.2}, 0}, {{0.4}, 0}};
  const Vector scores = {0.1, 0.5, 0.9};
  const Vector lengths = {1, 1, 1};
  auto groups = halves(0, 0.0, "x");
  groups.push_back({"x>5", [](std::span<const double> x) { return x[0] > 5; }});

  auto inf_report = coverage(test, scores, Vector(3, kInfinity), lengths, groups);
  CHECK(inf_report.marginal == 1.0);
  CHECK(inf_report.groups[0].name == "x<0");
  CHECK(inf_report.groups[1].name == "x>=0");
  CHECK(inf_report.groups[0].count == 2);
  CHECK(inf_report.groups[2].absent());
  CHECK(std::isnan(inf_report.groups[2].coverage));

  auto low = coverage(test, scores, Vector(3, 0.05), lengths, groups);
  CHECK(low.marginal == 0.0);

  auto mid = coverage(test, scores, Vector(3, 0.5), lengths, groups);
  CHECK(mid.marginal == doctest::Approx(2.0 / 3.0));
  CHECK(mid.groups[0].coverage == 1.0);
  CHECK(mid.groups[1].coverage == 0.0);
}

TEST_CASE("binary digit group names") {
  const std::vector<std::size_t> cols = {0, 3};
  const auto groups = binary_digit_groups(cols);
  REQUIRE(groups.size() == 4);
  CHECK(groups[0].name == "X1=0");
  CHECK(groups[3].name == "X4=1");
  const Vector x = {1, 0, 0, 1};
  CHECK_FALSE(groups[0].contains(x));
  CHECK(groups[3].contains(x));
}

TEST_CASE("oracle thresholds give nominal coverage in each half") {
  const auto test = gen_intro(100000, 21);
  const OracleSpec oracle = intro_oracle(0.1);
  Vector scores, thresholds, lengths;
  for (const auto& s : test) {
    scores.push_back(std::abs(s.y - s.x[0]));
    thresholds.push_back(oracle.cond_quantile(s.x, 0.9));
    lengths.push_back(2 * thresholds.back());
  }
  const auto groups = halves(0, 0.0, "x");
  const auto report = coverage(test, scores, thresholds, lengths, groups);
  for (const auto& g : report.groups) CHECK(std::abs(g.coverage - 0.9) < 0.006);
  CHECK(std::abs(report.marginal - 0.9) < 0.006);
}

TEST_CASE("msce against the oracle") {
  const OracleSpec oracle = intro_oracle(0.1);
  std::vector<Vector> xs;
  for (int j = 0; j < 1000; ++j) xs.push_back({j % 2 == 0 ? -0.5 : 0.5});

  Vector exact;
  for (const auto& x : xs) exact.push_back(oracle.cond_quantile(x, 0.9));
  CHECK(msce_oracle(xs, exact, oracle).mean < 1e-18);

  const auto constant = msce_oracle(xs, Vector(xs.size(), kZ95), oracle);
  CHECK(constant.mean == doctest::Approx(kConstantMsce).epsilon(1e-9));
  CHECK(constant.se > 0.0);
}

TEST_CASE("group-aware rules beat split conformal on msce") {
  const auto cal = gen_intro(20000, 31);
  const auto test = gen_intro(20000, 32);
  const auto score = ScoreSpec::absolute_residual([](std::span<const double> x) { return x[0]; });
  const auto scored = score_samples(score, cal);
  const auto xs = covariates(test);
  const OracleSpec oracle = intro_oracle(0.1);

  const auto split = split_conformal(compute_scores(score, cal), 0.1, score);
  TrainConfig cfg;
  cfg.m = 2;
  const auto fit = fit_plcp(scored, cfg, score);

  const double split_msce = msce_oracle(xs, rule_thresholds(split, xs), oracle).mean;
  const double plcp_msce = msce_oracle(xs, rule_thresholds(fit.rule, xs), oracle).mean;
  CHECK(split_msce > plcp_msce);
  CHECK(split_msce == doctest::Approx(kConstantMsce).epsilon(0.1));
}

TEST_CASE("pinball gap bounds the msce") {
  const auto test = gen_intro(20000, 41);
  const auto xs = covariates(test);
  const OracleSpec oracle = intro_oracle(0.1);
  Vector exact;
  for (const auto& x : xs) exact.push_back(oracle.cond_quantile(x, 0.9));

  Rng rng(1);
  const auto zero_gap = pinball_gap(xs, exact, oracle, rng, 4);
  CHECK(zero_gap.mean == 0.0);

  for (double t : {1.0, kZ95, 2.0, kZ95Sqrt2, 3.0}) {
    const Vector thresholds(xs.size(), t);
    const auto gap = pinball_gap(xs, thresholds, oracle, rng, 4);
    const auto msce = msce_oracle(xs, thresholds, oracle);
    CHECK(gap.mean >= -3 * gap.se);
    CHECK(msce.mean <= 2 * oracle.lipschitz_L * gap.mean + 5 * gap.se * 2 * oracle.lipschitz_L);
  }
}

TEST_CASE("fallback bounds") {
  const auto plain = fallback_bounds(0.01, 0.1);
  CHECK(plain.lo == doctest::Approx(0.8));
  CHECK(plain.hi == 1.0);
  const auto grouped = fallback_bounds(0.01, 0.1, 0.25);
  CHECK(grouped.lo == doctest::Approx(0.7));
  CHECK(grouped.hi == 1.0);
  const auto tight = fallback_bounds(0.0001, 0.2);
  CHECK(tight.lo == doctest::Approx(0.79));
  CHECK(tight.hi == doctest::Approx(0.81));
}

TEST_CASE("pearson") {
  CHECK(pearson(Vector{1, 2, 3, 4, 5}, Vector{2, 4, 5, 4, 5}) ==
        doctest::Approx(0.7745966692414834).epsilon(1e-12));
  CHECK(pearson(Vector{1, 2, 3}, Vector{4, 4, 4}) == 0.0);
  CHECK(pearson(Vector{1, 5, 2}, Vector{1, 5, 2}) == doctest::Approx(1.0));
  CHECK(pearson(Vector{1, 2, 3}, Vector{3, 2, 1}) == doctest::Approx(-1.0));
}

TEST_CASE("hsic reference values") {
  const Vector x = {0.3, -1.2, 2.5, 0.3, 0.7, -0.4, 1.9, 0.3};
  const Vector y = {1.0, 0.2, -0.5, 1.0, 3.3, 0.2, 0.8, 2.2};
  CHECK(median_pairwise_distance(x) == doctest::Approx(1.5));
  CHECK(median_pairwise_distance(Vector{2, 2, 2}) == 0.0);
  // Frozen from a dense-matrix implementation.
  CHECK(hsic(x, y) == doctest::Approx(0.015894064755727935).epsilon(1e-10));
  CHECK(std::abs(hsic(x, y) - naive_hsic(x, y)) < 1e-10);
  CHECK(hsic(x, Vector(8, 1.5)) == 0.0);

  Vector xp = x, yp = y;
  std::reverse(xp.begin(), xp.end());
  std::reverse(yp.begin(), yp.end());
  CHECK(hsic(xp, yp) == doctest::Approx(hsic(x, y)).epsilon(1e-12));
}

TEST_CASE("hsic separates dependence from independence") {
  Rng rng(3);
  const std::size_t n = 256;
  auto null_q95 = [&](const Vector& a, Vector b) {
    Vector null;
    for (int p = 0; p < 40; ++p) {
      for (std::size_t i = n - 1; i > 0; --i) std::swap(b[i], b[rng.below(i + 1)]);
      null.push_back(hsic(a, b));
    }
    std::sort(null.begin(), null.end());
    return null[37];
  };
  int rejections = 0;
  const int trials = 30;
  for (int t = 0; t < trials; ++t) {
    Vector a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = rng.normal();
      b[i] = rng.normal();
    }
    if (hsic(a, b) > null_q95(a, b)) ++rejections;
  }
  CHECK(rejections <= 6);

  Vector a(n), b(n);
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = rng.normal();
    b[i] = a[i] * a[i] + 0.1 * rng.normal();
  }
  CHECK(hsic(a, b) > null_q95(a, b));
}

TEST_CASE("evaluate_thresholds") {
  const auto test = gen_intro(2000, 51);
  const auto score = ScoreSpec::absolute_residual([](std::span<const double> x) { return x[0]; });
  const OracleSpec oracle = intro_oracle(0.1);
  const Vector thresholds(test.size(), 2.0);
  const auto groups = halves(0, 0.0, "x");
  const auto report = evaluate_thresholds(test, score, thresholds, groups, &oracle);
  CHECK(report.coverage.mean_length == doctest::Approx(4.0));
  CHECK(report.pearson_r == 0.0);
  REQUIRE(report.msce.has_value());
  CHECK(*report.msce > 0.0);
  const auto no_oracle = evaluate_thresholds(test, score, thresholds, groups, nullptr);
  CHECK_FALSE(no_oracle.msce.has_value());
}
