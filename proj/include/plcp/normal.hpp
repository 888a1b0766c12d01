#pragma once

namespace plcp::normal {

double pdf(double x);
double cdf(double x);
/// Inverse of cdf by bisection; p must lie in (0, 1).
double quantile(double p);

/// Folded normal |N(0, sigma^2)|.
double folded_cdf(double t, double sigma);
double folded_quantile(double level, double sigma);
double folded_density_bound(double sigma);

}  // namespace plcp::normal
