#include "imsim/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>

namespace imsim::kernels {

namespace {

bool cpu_has_avx2() {
#if IMSIM_HAVE_AVX2
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

Impl initial_impl() {
  const char* env = std::getenv("IMSIM_KERNEL");
  if (env) {
    if (std::strcmp(env, "scalar") == 0) return Impl::Scalar;
    if (std::strcmp(env, "avx2") == 0) return Impl::Avx2;
  }
  return Impl::Auto;
}

std::atomic<Impl> g_impl{initial_impl()};

bool use_avx2() {
  Impl m = g_impl.load(std::memory_order_relaxed);
  if (m == Impl::Scalar) return false;
  if (m == Impl::Avx2) return true;
  static const bool avail = cpu_has_avx2();
  return avail;
}

}  // namespace

void set_impl(Impl impl) { g_impl.store(impl, std::memory_order_relaxed); }

Impl active_impl() { return g_impl.load(std::memory_order_relaxed); }

const char* impl_name() { return use_avx2() ? "avx2" : "scalar"; }

ScanResult scan_best(const double* table, size_t stride, const int32_t* opts,
                     size_t n_pos, size_t count, bool maximize) {
#if IMSIM_HAVE_AVX2
  if (use_avx2())
    return scan_best_avx2(table, stride, opts, n_pos, count, maximize);
#endif
  return scan_best_scalar(table, stride, opts, n_pos, count, maximize);
}

uint64_t hamming(const uint8_t* a, const uint8_t* b, size_t n) {
#if IMSIM_HAVE_AVX2
  if (use_avx2()) return hamming_avx2(a, b, n);
#endif
  return hamming_scalar(a, b, n);
}

}  // namespace imsim::kernels
