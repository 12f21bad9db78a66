#include "imsim/kernels.hpp"

namespace imsim::kernels {

ScanResult scan_best_scalar(const double* table, size_t stride,
                            const int32_t* opts, size_t n_pos, size_t count,
                            bool maximize) {
  ScanResult best;
  for (size_t e = 0; e < count; ++e) {
    double acc = 0.0;
    for (size_t n = 0; n < n_pos; ++n)
      acc += table[n * stride + static_cast<size_t>(opts[n * count + e])];
    if (e == 0) {
      best = {0, acc};
      continue;
    }
    if (maximize ? (acc > best.score) : (acc < best.score)) best = {e, acc};
  }
  return best;
}

uint64_t hamming_scalar(const uint8_t* a, const uint8_t* b, size_t n) {
  uint64_t d = 0;
  for (size_t i = 0; i < n; ++i) d += (a[i] != b[i]) ? 1u : 0u;
  return d;
}

}  // namespace imsim::kernels
