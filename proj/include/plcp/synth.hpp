#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "plcp/rng.hpp"
#include "plcp/types.hpp"

namespace plcp {

/// Analytic conditional law of the conformity score for a synthetic family.
struct OracleSpec {
  double alpha = 0.1;
  /// q_level(S | X = x).
  std::function<double(std::span<const double>, double)> cond_quantile;
  /// Pr[S <= t | X = x].
  std::function<double(std::span<const double>, double)> cond_cdf;
  /// Draws S | X = x.
  std::function<double(std::span<const double>, Rng&)> sample_score;
  /// Upper bound on the conditional score density.
  double lipschitz_L = 0.0;
  /// var(q_{1-alpha}(X)).
  double quantile_variance = 0.0;
};

/// Folded-normal oracle for scores |N(0, sigma(x)^2)|.
OracleSpec folded_normal_oracle(std::function<double(std::span<const double>)> sigma,
                                double alpha, double lipschitz_L, double quantile_variance);

/// How "N(0, 2)" on the x >= 0 half is read.
enum class IntroNoise { Variance, StdDev };

/// x ~ U[-1, 1], y = x + sigma(x) Z with sigma = 1 for x < 0 and sqrt(2)
/// (or 2 under the StdDev reading) for x >= 0.
std::vector<LabeledSample> gen_intro(std::size_t n, std::uint64_t seed,
                                     IntroNoise noise = IntroNoise::Variance);
double intro_sigma(double x, IntroNoise noise = IntroNoise::Variance);
/// Oracle for the absolute residual of the predictor f(x) = x.
OracleSpec intro_oracle(double alpha, IntroNoise noise = IntroNoise::Variance);

/// x ~ U[-1, 1], y = x + (1.5 + x) Z: a smooth one-dimensional heteroscedastic family.
std::vector<LabeledSample> gen_linear_scale(std::size_t n, std::uint64_t seed);
double linear_scale_sigma(double x);
OracleSpec linear_scale_oracle(double alpha);

inline constexpr std::size_t kHighDimBinary = 10;
inline constexpr std::size_t kHighDimGaussian = 90;
inline constexpr std::size_t kHighDimDim = kHighDimBinary + kHighDimGaussian;

struct HighDimParams {
  double sigma_x = 1.0;
  Vector theta = Vector(kHighDimDim, 1.0);
  /// When set, the binary coordinates are fixed to these values instead of drawn.
  std::optional<std::vector<int>> forced_bits;
};

/// Ten fair binary coordinates and ninety N(0, sigma_x^2) coordinates;
/// y = <theta, x> + eps with eps ~ N(0, sigma_x^2 + sum_i x_i * i) over the binary part.
std::vector<LabeledSample> gen_highdim(std::size_t n, const HighDimParams& params,
                                       std::uint64_t seed);
double highdim_sigma(std::span<const double> x, double sigma_x);
/// Oracle for the absolute residual of the true linear predictor <theta, x>.
OracleSpec highdim_oracle(double sigma_x, double alpha);

struct LinearFit {
  Vector theta;
  double intercept = 0.0;

  double predict(std::span<const double> x) const;
};

/// Least squares y ~ <theta, x> + b. Falls back to a 1e-8 ridge penalty on
/// theta when the design is rank deficient.
LinearFit ols_fit(std::span<const LabeledSample> train);

}  // namespace plcp
