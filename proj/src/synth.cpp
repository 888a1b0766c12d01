#include "plcp/synth.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "plcp/normal.hpp"

namespace plcp {

OracleSpec folded_normal_oracle(std::function<double(std::span<const double>)> sigma,
                                double alpha, double lipschitz_L, double quantile_variance) {
  OracleSpec oracle;
  oracle.alpha = alpha;
  oracle.lipschitz_L = lipschitz_L;
  oracle.quantile_variance = quantile_variance;
  oracle.cond_quantile = [sigma](std::span<const double> x, double level) {
    return normal::folded_quantile(level, sigma(x));
  };
  oracle.cond_cdf = [sigma](std::span<const double> x, double t) {
    return normal::folded_cdf(t, sigma(x));
  };
  oracle.sample_score = [sigma](std::span<const double> x, Rng& rng) {
    return std::abs(sigma(x) * rng.normal());
  };
  return oracle;
}

double intro_sigma(double x, IntroNoise noise) {
  if (x < 0.0) return 1.0;
  return noise == IntroNoise::Variance ? std::numbers::sqrt2 : 2.0;
}

std::vector<LabeledSample> gen_intro(std::size_t n, std::uint64_t seed, IntroNoise noise) {
  Rng rng(seed);
  std::vector<LabeledSample> out(n);
  for (auto& sample : out) {
    const double x = rng.uniform(-1.0, 1.0);
    sample.x = {x};
    sample.y = x + intro_sigma(x, noise) * rng.normal();
  }
  return out;
}

OracleSpec intro_oracle(double alpha, IntroNoise noise) {
  const double hi = intro_sigma(0.0, noise);
  const double z = normal::folded_quantile(1.0 - alpha, 1.0);
  // Two equiprobable quantile values z and hi*z.
  const double half_gap = 0.5 * (hi - 1.0) * z;
  return folded_normal_oracle([noise](std::span<const double> x) { return intro_sigma(x[0], noise); },
                              alpha, normal::folded_density_bound(1.0), half_gap * half_gap);
}

double linear_scale_sigma(double x) { return 1.5 + x; }

std::vector<LabeledSample> gen_linear_scale(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<LabeledSample> out(n);
  for (auto& sample : out) {
    const double x = rng.uniform(-1.0, 1.0);
    sample.x = {x};
    sample.y = x + linear_scale_sigma(x) * rng.normal();
  }
  return out;
}

OracleSpec linear_scale_oracle(double alpha) {
  const double z = normal::folded_quantile(1.0 - alpha, 1.0);
  // q(x) = z (1.5 + x) with x uniform on [-1, 1], so var = z^2 / 3.
  return folded_normal_oracle([](std::span<const double> x) { return linear_scale_sigma(x[0]); },
                              alpha, normal::folded_density_bound(0.5), z * z / 3.0);
}

double highdim_sigma(std::span<const double> x, double sigma_x) {
  double variance = sigma_x * sigma_x;
  for (std::size_t i = 0; i < kHighDimBinary; ++i) variance += x[i] * static_cast<double>(i + 1);
  return std::sqrt(variance);
}

std::vector<LabeledSample> gen_highdim(std::size_t n, const HighDimParams& params,
                                       std::uint64_t seed) {
  if (params.theta.size() != kHighDimDim) {
    throw std::invalid_argument("theta must have " + std::to_string(kHighDimDim) + " components");
  }
  if (params.forced_bits && params.forced_bits->size() != kHighDimBinary) {
    throw std::invalid_argument("forced_bits must have 10 entries");
  }
  Rng rng(seed);
  std::vector<LabeledSample> out(n);
  for (auto& sample : out) {
    sample.x.resize(kHighDimDim);
    for (std::size_t i = 0; i < kHighDimBinary; ++i) {
      const double bit = rng.coin() ? 1.0 : 0.0;
      sample.x[i] = params.forced_bits ? static_cast<double>((*params.forced_bits)[i]) : bit;
    }
    for (std::size_t i = kHighDimBinary; i < kHighDimDim; ++i) {
      sample.x[i] = params.sigma_x * rng.normal();
    }
    double mean = 0.0;
    for (std::size_t i = 0; i < kHighDimDim; ++i) mean += params.theta[i] * sample.x[i];
    sample.y = mean + highdim_sigma(sample.x, params.sigma_x) * rng.normal();
  }
  return out;
}

OracleSpec highdim_oracle(double sigma_x, double alpha) {
  // The binary part takes 1024 equiprobable patterns; enumerate their quantiles.
  const double z = normal::folded_quantile(1.0 - alpha, 1.0);
  const std::size_t patterns = std::size_t{1} << kHighDimBinary;
  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::size_t bits = 0; bits < patterns; ++bits) {
    double variance = sigma_x * sigma_x;
    for (std::size_t i = 0; i < kHighDimBinary; ++i) {
      if ((bits >> i) & 1U) variance += static_cast<double>(i + 1);
    }
    const double q = z * std::sqrt(variance);
    sum += q;
    sum_sq += q * q;
  }
  const double mean = sum / static_cast<double>(patterns);
  const double var = sum_sq / static_cast<double>(patterns) - mean * mean;
  return folded_normal_oracle(
      [sigma_x](std::span<const double> x) { return highdim_sigma(x, sigma_x); }, alpha,
      normal::folded_density_bound(sigma_x), var);
}

double LinearFit::predict(std::span<const double> x) const {
  if (x.size() != theta.size()) throw std::invalid_argument("predictor dimension mismatch");
  double value = intercept;
  for (std::size_t k = 0; k < theta.size(); ++k) value += theta[k] * x[k];
  return value;
}

LinearFit ols_fit(std::span<const LabeledSample> train) {
  if (train.empty()) throw std::invalid_argument("least squares needs data");
  const std::size_t d = train.front().x.size();
  const auto n = static_cast<Eigen::Index>(train.size());
  const auto cols = static_cast<Eigen::Index>(d + 1);
  Eigen::MatrixXd design(n, cols);
  Eigen::VectorXd target(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto& sample = train[static_cast<std::size_t>(r)];
    if (sample.x.size() != d) throw std::invalid_argument("inconsistent covariate dimension");
    for (std::size_t k = 0; k < d; ++k) design(r, static_cast<Eigen::Index>(k)) = sample.x[k];
    design(r, cols - 1) = 1.0;
    target(r) = sample.y;
  }

  Eigen::VectorXd beta;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() == cols) {
    beta = qr.solve(target);
  } else {
    Eigen::MatrixXd gram = design.transpose() * design;
    for (Eigen::Index k = 0; k + 1 < cols; ++k) gram(k, k) += 1e-8;
    beta = gram.ldlt().solve(design.transpose() * target);
  }

  LinearFit fit;
  fit.theta.resize(d);
  for (std::size_t k = 0; k < d; ++k) fit.theta[k] = beta(static_cast<Eigen::Index>(k));
  fit.intercept = beta(cols - 1);
  return fit;
}

}  // namespace plcp
