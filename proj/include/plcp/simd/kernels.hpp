#pragma once

// Sample-parallel inner loops used by training and evaluation.
//
// Every kernel has a scalar reference and (on x86-64) an AVX2 variant; the
// active table is chosen once at startup from CPUID and can be forced with
// PLCP_KIT_SIMD=scalar|avx2. Both variants produce bit-identical results:
//
//   * elementwise kernels round each operation exactly once, no FMA;
//   * reductions accumulate into 4 lanes, lane l taking elements j with
//     j % 4 == l over the first 4*floor(n/4) elements, combine the lanes as
//     (l0 + l2) + (l1 + l3), then add the remaining tail elements in order.

#include <cstddef>
#include <span>
#include <string_view>

namespace plcp::simd {

struct KernelTable {
  const char* name;
  double (*dot)(const double* a, const double* b, std::size_t n);
  double (*sum)(const double* a, std::size_t n);
  // y += a * x
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  // out[j] = pinball loss of threshold q against score s[j]
  void (*pinball)(double q, const double* s, double alpha, double* out, std::size_t n);
  // acc[j] += a[j] * b[j]
  void (*mul_acc)(const double* a, const double* b, double* acc, std::size_t n);
  // out[j] = scale * h[j] * (c[j] - cbar[j])
  void (*softmax_grad)(const double* h, const double* c, const double* cbar, double scale,
                       double* out, std::size_t n);
  // out[j] = max(z[j], 0)
  void (*relu)(const double* z, double* out, std::size_t n);
  // g[j] = z[j] > 0 ? g[j] : 0
  void (*relu_mask)(const double* z, double* g, std::size_t n);
  // acc[j] = max(acc[j], x[j])
  void (*max_into)(const double* x, double* acc, std::size_t n);
  // number of j with s[j] <= t[j]
  std::size_t (*count_leq)(const double* s, const double* t, std::size_t n);
};

const KernelTable& scalar_kernels();

// nullptr when the build or the CPU lacks AVX2.
const KernelTable* avx2_kernels();

const KernelTable& active();

// Force a table by name ("scalar", "avx2"); returns false if unavailable.
bool select(std::string_view name);

inline double dot(std::span<const double> a, std::span<const double> b) {
  return active().dot(a.data(), b.data(), a.size());
}
inline double sum(std::span<const double> a) { return active().sum(a.data(), a.size()); }
inline void axpy(double a, std::span<const double> x, std::span<double> y) {
  active().axpy(a, x.data(), y.data(), x.size());
}
inline void pinball(double q, std::span<const double> s, double alpha, std::span<double> out) {
  active().pinball(q, s.data(), alpha, out.data(), s.size());
}
inline void mul_acc(std::span<const double> a, std::span<const double> b, std::span<double> acc) {
  active().mul_acc(a.data(), b.data(), acc.data(), a.size());
}
inline void softmax_grad(std::span<const double> h, std::span<const double> c,
                         std::span<const double> cbar, double scale, std::span<double> out) {
  active().softmax_grad(h.data(), c.data(), cbar.data(), scale, out.data(), h.size());
}
inline void relu(std::span<const double> z, std::span<double> out) {
  active().relu(z.data(), out.data(), z.size());
}
inline void relu_mask(std::span<const double> z, std::span<double> g) {
  active().relu_mask(z.data(), g.data(), z.size());
}
inline void max_into(std::span<const double> x, std::span<double> acc) {
  active().max_into(x.data(), acc.data(), x.size());
}
inline std::size_t count_leq(std::span<const double> s, std::span<const double> t) {
  return active().count_leq(s.data(), t.data(), s.size());
}

}  // namespace plcp::simd
