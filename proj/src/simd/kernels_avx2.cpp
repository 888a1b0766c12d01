#include <immintrin.h>

#include "plcp/simd/kernels.hpp"

namespace plcp::simd {
namespace {

inline double combine_lanes(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d pair = _mm_add_pd(lo, hi);  // (l0 + l2, l1 + l3)
  return _mm_cvtsd_f64(pair) + _mm_cvtsd_f64(_mm_unpackhi_pd(pair, pair));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(a + j), _mm256_loadu_pd(b + j)));
  }
  double total = combine_lanes(acc);
  for (; j < n; ++j) total += a[j] * b[j];
  return total;
}

double sum_avx2(const double* a, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(a + j));
  double total = combine_lanes(acc);
  for (; j < n; ++j) total += a[j];
  return total;
}

void axpy_avx2(double a, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    const __m256d prod = _mm256_mul_pd(va, _mm256_loadu_pd(x + j));
    _mm256_storeu_pd(y + j, _mm256_add_pd(_mm256_loadu_pd(y + j), prod));
  }
  for (; j < n; ++j) y[j] += a * x[j];
}

void pinball_avx2(double q, const double* s, double alpha, double* out, std::size_t n) {
  const double beta = 1.0 - alpha;
  const __m256d vq = _mm256_set1_pd(q);
  const __m256d va = _mm256_set1_pd(alpha);
  const __m256d vb = _mm256_set1_pd(beta);
  const __m256d sign = _mm256_set1_pd(-0.0);
  const __m256d zero = _mm256_setzero_pd();
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    const __m256d d = _mm256_sub_pd(vq, _mm256_loadu_pd(s + j));
    const __m256d over = _mm256_mul_pd(va, d);
    const __m256d under = _mm256_mul_pd(vb, _mm256_xor_pd(d, sign));
    const __m256d ge = _mm256_cmp_pd(d, zero, _CMP_GE_OQ);
    _mm256_storeu_pd(out + j, _mm256_blendv_pd(under, over, ge));
  }
  for (; j < n; ++j) {
    const double d = q - s[j];
    out[j] = d >= 0.0 ? alpha * d : beta * -d;
  }
}

void mul_acc_avx2(const double* a, const double* b, double* acc, std::size_t n) {
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    const __m256d prod = _mm256_mul_pd(_mm256_loadu_pd(a + j), _mm256_loadu_pd(b + j));
    _mm256_storeu_pd(acc + j, _mm256_add_pd(_mm256_loadu_pd(acc + j), prod));
  }
  for (; j < n; ++j) acc[j] += a[j] * b[j];
}

void softmax_grad_avx2(const double* h, const double* c, const double* cbar, double scale,
                       double* out, std::size_t n) {
  const __m256d vs = _mm256_set1_pd(scale);
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    const __m256d sh = _mm256_mul_pd(vs, _mm256_loadu_pd(h + j));
    const __m256d diff = _mm256_sub_pd(_mm256_loadu_pd(c + j), _mm256_loadu_pd(cbar + j));
    _mm256_storeu_pd(out + j, _mm256_mul_pd(sh, diff));
  }
  for (; j < n; ++j) out[j] = (scale * h[j]) * (c[j] - cbar[j]);
}

void relu_avx2(const double* z, double* out, std::size_t n) {
  const __m256d zero = _mm256_setzero_pd();
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    const __m256d v = _mm256_loadu_pd(z + j);
    _mm256_storeu_pd(out + j, _mm256_and_pd(_mm256_cmp_pd(v, zero, _CMP_GT_OQ), v));
  }
  for (; j < n; ++j) out[j] = z[j] > 0.0 ? z[j] : 0.0;
}

void relu_mask_avx2(const double* z, double* g, std::size_t n) {
  const __m256d zero = _mm256_setzero_pd();
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    const __m256d keep = _mm256_cmp_pd(_mm256_loadu_pd(z + j), zero, _CMP_GT_OQ);
    _mm256_storeu_pd(g + j, _mm256_and_pd(keep, _mm256_loadu_pd(g + j)));
  }
  for (; j < n; ++j) g[j] = z[j] > 0.0 ? g[j] : 0.0;
}

void max_into_avx2(const double* x, double* acc, std::size_t n) {
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    // max_pd(a, b) == (a > b ? a : b), matching the scalar select.
    _mm256_storeu_pd(acc + j, _mm256_max_pd(_mm256_loadu_pd(x + j), _mm256_loadu_pd(acc + j)));
  }
  for (; j < n; ++j) acc[j] = x[j] > acc[j] ? x[j] : acc[j];
}

std::size_t count_leq_avx2(const double* s, const double* t, std::size_t n) {
  std::size_t count = 0;
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    const __m256d le = _mm256_cmp_pd(_mm256_loadu_pd(s + j), _mm256_loadu_pd(t + j), _CMP_LE_OQ);
    count += static_cast<std::size_t>(__builtin_popcount(_mm256_movemask_pd(le)));
  }
  for (; j < n; ++j) count += s[j] <= t[j] ? 1 : 0;
  return count;
}

constexpr KernelTable kAvx2{
    "avx2",       dot_avx2,          sum_avx2,  axpy_avx2,      pinball_avx2,  mul_acc_avx2,
    softmax_grad_avx2, relu_avx2, relu_mask_avx2, max_into_avx2, count_leq_avx2,
};

}  // namespace

const KernelTable& avx2_table_unchecked() { return kAvx2; }

}  // namespace plcp::simd
