#include "plcp/normal.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace plcp::normal {

double pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

double cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("normal quantile needs p in (0, 1)");
  double lo = -40.0;
  double hi = 40.0;
  // Stop at 1e-12 in x or when the midpoint stops moving.
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (cdf(mid) < p) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double folded_cdf(double t, double sigma) {
  if (t <= 0.0) return 0.0;
  if (std::isinf(t)) return 1.0;
  // erf(t / (sigma sqrt 2)) equals 2 Phi(t / sigma) - 1 without the cancellation.
  return std::erf(t / (sigma * std::numbers::sqrt2));
}

double folded_quantile(double level, double sigma) {
  if (!(level >= 0.0 && level < 1.0)) {
    throw std::invalid_argument("folded normal quantile needs level in [0, 1)");
  }
  if (level == 0.0) return 0.0;
  return sigma * quantile(0.5 * (1.0 + level));
}

double folded_density_bound(double sigma) { return 2.0 * pdf(0.0) / sigma; }

}  // namespace plcp::normal
