#include <doctest.h>

#include <bit>
#include <cstdint>
#include <string>
#include <vector>

#include "plcp/rng.hpp"
#include "plcp/simd/kernels.hpp"

using namespace plcp;

namespace {

std::vector<double> random_vector(Rng& rng, std::size_t n, double lo = -3.0, double hi = 3.0) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(lo, hi);
  return v;
}

bool same_bits(double a, double b) { return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b); }

bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!same_bits(a[i], b[i])) return false;
  }
  return true;
}

// Lengths straddling the 4-lane blocks and the tail.
const std::size_t kLengths[] = {0, 1, 2, 3, 4, 5, 7, 8, 9, 15, 16, 17, 63, 100, 1001};

}  // namespace

TEST_CASE("scalar reductions follow the documented lane order") {
  const std::vector<double> a = {1e16, 1.0, -1e16, 1.0, 3.0};
  // Lanes hold 1e16, 1, -1e16, 1; (l0 + l2) + (l1 + l3) = 2, then the tail adds 3.
  // A left-to-right sum would lose the first 1.0 and give 4.
  CHECK(simd::scalar_kernels().sum(a.data(), a.size()) == 5.0);
  const std::vector<double> ones(5, 1.0);
  CHECK(simd::scalar_kernels().dot(a.data(), ones.data(), a.size()) == 5.0);
}

TEST_CASE("AVX2 kernels are bit-identical to the scalar reference") {
  const simd::KernelTable* avx = simd::avx2_kernels();
  if (avx == nullptr) {
    MESSAGE("AVX2 table unavailable on this machine; equivalence not exercised");
    return;
  }
  const simd::KernelTable& ref = simd::scalar_kernels();
  Rng rng(2024);
  for (std::size_t n : kLengths) {
    CAPTURE(n);
    const auto a = random_vector(rng, n);
    const auto b = random_vector(rng, n);
    const auto c = random_vector(rng, n, 0.0, 1.0);

    CHECK(same_bits(ref.dot(a.data(), b.data(), n), avx->dot(a.data(), b.data(), n)));
    CHECK(same_bits(ref.sum(a.data(), n), avx->sum(a.data(), n)));

    auto y1 = b;
    auto y2 = b;
    ref.axpy(0.37, a.data(), y1.data(), n);
    avx->axpy(0.37, a.data(), y2.data(), n);
    CHECK(same_bits(y1, y2));

    std::vector<double> p1(n), p2(n);
    // Include exact ties q == s.
    auto s = a;
    if (n > 2) s[1] = 0.25;
    ref.pinball(0.25, s.data(), 0.1, p1.data(), n);
    avx->pinball(0.25, s.data(), 0.1, p2.data(), n);
    CHECK(same_bits(p1, p2));

    auto m1 = c;
    auto m2 = c;
    ref.mul_acc(a.data(), b.data(), m1.data(), n);
    avx->mul_acc(a.data(), b.data(), m2.data(), n);
    CHECK(same_bits(m1, m2));

    std::vector<double> g1(n), g2(n);
    ref.softmax_grad(c.data(), a.data(), b.data(), 1.0 / 3.0, g1.data(), n);
    avx->softmax_grad(c.data(), a.data(), b.data(), 1.0 / 3.0, g2.data(), n);
    CHECK(same_bits(g1, g2));

    auto z = a;
    if (n > 3) z[2] = 0.0;
    std::vector<double> r1(n), r2(n);
    ref.relu(z.data(), r1.data(), n);
    avx->relu(z.data(), r2.data(), n);
    CHECK(same_bits(r1, r2));

    auto k1 = b;
    auto k2 = b;
    ref.relu_mask(z.data(), k1.data(), n);
    avx->relu_mask(z.data(), k2.data(), n);
    CHECK(same_bits(k1, k2));

    auto x1 = b;
    auto x2 = b;
    ref.max_into(a.data(), x1.data(), n);
    avx->max_into(a.data(), x2.data(), n);
    CHECK(same_bits(x1, x2));

    CHECK(ref.count_leq(a.data(), b.data(), n) == avx->count_leq(a.data(), b.data(), n));
  }
}

TEST_CASE("elementwise kernels match their definitions") {
  const simd::KernelTable& ref = simd::scalar_kernels();
  const std::vector<double> s = {0.3, 0.5, 0.7, 0.5, 0.1};
  std::vector<double> out(s.size());
  ref.pinball(0.5, s.data(), 0.1, out.data(), s.size());
  CHECK(out[0] == doctest::Approx(0.02));
  CHECK(out[1] == 0.0);
  CHECK(out[2] == doctest::Approx(0.18));
  const std::vector<double> z = {-1.0, 0.0, 2.0};
  std::vector<double> g = {5.0, 5.0, 5.0};
  ref.relu_mask(z.data(), g.data(), 3);
  CHECK(g == std::vector<double>{0.0, 0.0, 5.0});
  const std::vector<double> t = {0.3, 0.4, 0.7, 0.5, 0.0};
  CHECK(ref.count_leq(s.data(), t.data(), 5) == 3);
}

TEST_CASE("table selection honours names") {
  CHECK(simd::select("scalar"));
  CHECK(std::string(simd::active().name) == "scalar");
  CHECK_FALSE(simd::select("neon"));
  if (simd::avx2_kernels() != nullptr) {
    CHECK(simd::select("avx2"));
    CHECK(std::string(simd::active().name) == "avx2");
  }
}
