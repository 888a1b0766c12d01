#include <cstdlib>
#include <string_view>

#include <spdlog/spdlog.h>

#include "plcp/simd/kernels.hpp"

namespace plcp::simd {

#if PLCP_HAVE_AVX2
const KernelTable& avx2_table_unchecked();
#endif

namespace {

bool cpu_has_avx2() {
#if PLCP_HAVE_AVX2 && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

const KernelTable* initial_table() {
  const KernelTable* best = avx2_kernels();
  if (best == nullptr) best = &scalar_kernels();
  if (const char* forced = std::getenv("PLCP_KIT_SIMD")) {
    const std::string_view want(forced);
    if (want == "scalar") return &scalar_kernels();
    if (want == "avx2" && avx2_kernels() == nullptr) {
      spdlog::warn("PLCP_KIT_SIMD=avx2 requested but unavailable; using {}", best->name);
    }
  }
  return best;
}

const KernelTable*& current() {
  static const KernelTable* table = initial_table();
  return table;
}

}  // namespace

const KernelTable* avx2_kernels() {
#if PLCP_HAVE_AVX2
  static const bool supported = cpu_has_avx2();
  return supported ? &avx2_table_unchecked() : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable& active() { return *current(); }

bool select(std::string_view name) {
  if (name == "scalar") {
    current() = &scalar_kernels();
    return true;
  }
  if (name == "avx2" && avx2_kernels() != nullptr) {
    current() = avx2_kernels();
    return true;
  }
  return false;
}

}  // namespace plcp::simd
