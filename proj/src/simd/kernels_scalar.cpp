#include "plcp/simd/kernels.hpp"

namespace plcp::simd {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double lane[4] = {0.0, 0.0, 0.0, 0.0};
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    for (std::size_t l = 0; l < 4; ++l) lane[l] += a[j + l] * b[j + l];
  }
  double acc = (lane[0] + lane[2]) + (lane[1] + lane[3]);
  for (; j < n; ++j) acc += a[j] * b[j];
  return acc;
}

double sum_scalar(const double* a, std::size_t n) {
  double lane[4] = {0.0, 0.0, 0.0, 0.0};
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    for (std::size_t l = 0; l < 4; ++l) lane[l] += a[j + l];
  }
  double acc = (lane[0] + lane[2]) + (lane[1] + lane[3]);
  for (; j < n; ++j) acc += a[j];
  return acc;
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) y[j] += a * x[j];
}

void pinball_scalar(double q, const double* s, double alpha, double* out, std::size_t n) {
  const double beta = 1.0 - alpha;
  for (std::size_t j = 0; j < n; ++j) {
    const double d = q - s[j];
    out[j] = d >= 0.0 ? alpha * d : beta * -d;
  }
}

void mul_acc_scalar(const double* a, const double* b, double* acc, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) acc[j] += a[j] * b[j];
}

void softmax_grad_scalar(const double* h, const double* c, const double* cbar, double scale,
                         double* out, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) out[j] = (scale * h[j]) * (c[j] - cbar[j]);
}

void relu_scalar(const double* z, double* out, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) out[j] = z[j] > 0.0 ? z[j] : 0.0;
}

void relu_mask_scalar(const double* z, double* g, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) g[j] = z[j] > 0.0 ? g[j] : 0.0;
}

void max_into_scalar(const double* x, double* acc, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) acc[j] = x[j] > acc[j] ? x[j] : acc[j];
}

std::size_t count_leq_scalar(const double* s, const double* t, std::size_t n) {
  std::size_t count = 0;
  for (std::size_t j = 0; j < n; ++j) count += s[j] <= t[j] ? 1 : 0;
  return count;
}

constexpr KernelTable kScalar{
    "scalar",       dot_scalar,  sum_scalar,       axpy_scalar,     pinball_scalar,
    mul_acc_scalar, softmax_grad_scalar, relu_scalar, relu_mask_scalar, max_into_scalar,
    count_leq_scalar,
};

}  // namespace

const KernelTable& scalar_kernels() { return kScalar; }

}  // namespace plcp::simd
