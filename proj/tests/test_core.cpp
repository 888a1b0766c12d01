#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "plcp/core.hpp"
#include "plcp/error.hpp"

using namespace plcp;

namespace {

ScoreSpec identity_residual() {
  return ScoreSpec::absolute_residual([](std::span<const double> x) { return x[0]; });
}

ProbabilityPredictor fixed(Vector p) {
  return [p](std::span<const double>) { return p; };
}

// One-input linear model with logits (w0 x + b0, w1 x + b1).
PlcpRule two_group_rule(double w0, double w1, Vector q, AssignmentMode mode = AssignmentMode::Argmax) {
  PartitionModel model(Architecture::softmax_linear(1, 2), {w0, w1, 0.0, 0.0});
  return PlcpRule{model, QuantileVector{std::move(q)}, identity_residual(), {mode, 5}};
}

}  // namespace

TEST_CASE("compute_score examples") {
  CHECK(compute_score(identity_residual(), {{0.3}, 0.8}) == doctest::Approx(0.5));
  CHECK(compute_score(ScoreSpec::softmax_complement(fixed({0.7, 0.2, 0.1})), {{0.0}, 0.0}) ==
        doctest::Approx(0.3));
  // Classes with probability above 0.3: only 0.5.
  CHECK(compute_score(ScoreSpec::cumulative_softmax(fixed({0.5, 0.3, 0.2})), {{0.0}, 1.0}) ==
        doctest::Approx(0.5));
  CHECK(compute_score(ScoreSpec::precomputed(), {{0.0}, 0.42}) == 0.42);
}

TEST_CASE("compute_score errors") {
  ScoreSpec missing;
  missing.kind = ScoreKind::AbsoluteResidual;
  CHECK_THROWS_AS(compute_score(missing, {{0.0}, 1.0}), std::invalid_argument);
  const auto spec = ScoreSpec::softmax_complement(fixed({0.7, 0.2, 0.1}));
  CHECK_THROWS_AS(compute_score(spec, {{0.0}, 3.0}), DataError);
  CHECK_THROWS_AS(compute_score(spec, {{0.0}, 0.5}), DataError);
  CHECK_THROWS_AS(compute_score(ScoreSpec::softmax_complement(fixed({0.7, 0.2})), {{0.0}, 0.0}),
                  DataError);
}

TEST_CASE("table predictions are used by row") {
  ScoreSpec spec;
  spec.kind = ScoreKind::AbsoluteResidual;
  spec.table = {{1.0}, {2.0}};
  const std::vector<LabeledSample> samples = {{{0.0}, 1.5}, {{0.0}, 1.0}};
  const Vector scores = compute_scores(spec, samples);
  CHECK(scores[0] == doctest::Approx(0.5));
  CHECK(scores[1] == doctest::Approx(1.0));
}

TEST_CASE("classification scores stay in their ranges") {
  const Vector p = {0.4, 0.25, 0.2, 0.15};
  for (std::size_t y = 0; y < p.size(); ++y) {
    const double cs = compute_score(ScoreSpec::cumulative_softmax(fixed(p)), {{0.0}, double(y)});
    const double sc = compute_score(ScoreSpec::softmax_complement(fixed(p)), {{0.0}, double(y)});
    CHECK(cs >= 0.0);
    CHECK(cs < 1.0);
    CHECK(sc >= 0.0);
    CHECK(sc <= 1.0);
  }
}

TEST_CASE("threshold_of in argmax mode") {
  // Large weights make h(x) one-hot at x = 1.
  const PlcpRule rule = two_group_rule(50.0, -50.0, {0.4, 0.9});
  CHECK(threshold_of(rule, Vector{1.0}) == 0.4);
  CHECK(threshold_of(rule, Vector{-1.0}) == 0.9);
  // Ties resolve to the lowest index.
  const PlcpRule tie = two_group_rule(0.0, 0.0, {0.4, 0.9});
  CHECK(threshold_of(tie, Vector{0.3}) == 0.4);
  CHECK(threshold_of(tie, Vector{0.3}) == threshold_of(tie, Vector{0.3}));
}

TEST_CASE("equal thresholds agree in both modes") {
  const PlcpRule argmax = two_group_rule(0.0, 0.0, {0.4, 0.4});
  const PlcpRule randomized = two_group_rule(0.0, 0.0, {0.4, 0.4}, AssignmentMode::Randomized);
  Rng rng(1);
  CHECK(threshold_of(argmax, Vector{0.0}) == 0.4);
  CHECK(threshold_of(randomized, Vector{0.0}, &rng) == 0.4);
  CHECK_THROWS_AS(threshold_of(randomized, Vector{0.0}), std::invalid_argument);
}

TEST_CASE("randomized assignment mixes thresholds by h") {
  // Logit difference log(0.7/0.3) at x = 1 gives h = (0.3, 0.7).
  const double w = std::log(0.7 / 0.3);
  const PlcpRule rule = two_group_rule(0.0, w, {0.2, 0.8}, AssignmentMode::Randomized);
  const Vector h = rule.model.forward(Vector{1.0});
  CHECK(h[0] == doctest::Approx(0.3));
  Rng rng(123);
  double total = 0.0;
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) total += threshold_of(rule, Vector{1.0}, &rng);
  CHECK(std::abs(total / draws - 0.62) < 0.01);
}

TEST_CASE("set sizes") {
  CHECK(set_size(identity_residual(), Vector{0.0}, 1.5, IntervalDomain{}) == doctest::Approx(3.0));
  const auto sc = ScoreSpec::softmax_complement(fixed({0.7, 0.2, 0.1}));
  CHECK(set_size(sc, Vector{0.0}, 0.85, LabelDomain{3}) == 2.0);
  Vector ten(10, 0.1);
  CHECK(set_size(ScoreSpec::softmax_complement(fixed(ten)), Vector{0.0}, kInfinity, LabelDomain{10}) == 10.0);
  // Interval shortcut is unavailable for classification scores; grid counting works.
  CHECK_THROWS_AS(set_size(sc, Vector{0.0}, 0.5, IntervalDomain{}), std::invalid_argument);
  CHECK(set_size(identity_residual(), Vector{0.0}, 0.5, GridDomain{{-1.0, -0.5, 0.0, 0.5, 1.0}}) == 3.0);
}

TEST_CASE("membership matches the score test and is monotone in the threshold") {
  const auto spec = identity_residual();
  const LabeledSample sample{{0.2}, 1.0};
  const double s = compute_score(spec, sample);
  CHECK(covers(spec, sample, s));
  CHECK_FALSE(covers(spec, sample, std::nextafter(s, 0.0)));
  bool seen = false;
  for (double t = 0.0; t < 2.0; t += 0.01) {
    const bool c = covers(spec, sample, t);
    if (seen) CHECK(c);
    seen = seen || c;
  }
}

TEST_CASE("score kind names round-trip") {
  for (ScoreKind k : {ScoreKind::AbsoluteResidual, ScoreKind::SoftmaxComplement,
                      ScoreKind::CumulativeSoftmax, ScoreKind::Precomputed}) {
    CHECK(score_kind_from_string(to_string(k)) == k);
  }
  CHECK_THROWS_AS(score_kind_from_string("hinge"), ConfigError);
}

TEST_CASE("score normalizer") {
  const auto norm = ScoreNormalizer::fit(Vector{2.0, 4.0, 6.0});
  CHECK(norm.apply(4.0) == doctest::Approx(0.5));
  CHECK(norm.apply(10.0) == 1.0);
  CHECK(norm.apply(0.0) == 0.0);
  CHECK(norm.to_raw(0.5) == doctest::Approx(4.0));
  CHECK(std::isinf(norm.to_raw(1.0)));
}

TEST_CASE("rule validation catches dimension mismatch") {
  PlcpRule rule = two_group_rule(1.0, 1.0, {0.1, 0.2, 0.3});
  CHECK_THROWS_AS(rule.validate(), std::invalid_argument);
}
