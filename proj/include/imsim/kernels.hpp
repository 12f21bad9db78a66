#pragma once

#include <cstddef>
#include <cstdint>

namespace imsim::kernels {

// Hot inner loops of the detectors, in a scalar reference version and an AVX2
// variant selected at runtime. Both variants accumulate in the same order, so
// results (including argmin tie-breaks) are bit-identical.

struct ScanResult {
  size_t index = 0;
  double score = 0.0;
};

// Scans `count` candidate tuples. Candidate e has per-position option ids
// opts[n*count + e] (0 <= id < stride); its score is
//   sum over n of table[n*stride + opts[n*count + e]].
// Returns the entry with the smallest (or, with maximize, largest) score;
// ties resolve to the lowest index.
ScanResult scan_best_scalar(const double* table, size_t stride,
                            const int32_t* opts, size_t n_pos, size_t count,
                            bool maximize);
#if IMSIM_HAVE_AVX2
ScanResult scan_best_avx2(const double* table, size_t stride,
                          const int32_t* opts, size_t n_pos, size_t count,
                          bool maximize);
#endif
ScanResult scan_best(const double* table, size_t stride, const int32_t* opts,
                     size_t n_pos, size_t count, bool maximize);

// Number of positions where a and b differ (bit-error counting).
uint64_t hamming_scalar(const uint8_t* a, const uint8_t* b, size_t n);
#if IMSIM_HAVE_AVX2
uint64_t hamming_avx2(const uint8_t* a, const uint8_t* b, size_t n);
#endif
uint64_t hamming(const uint8_t* a, const uint8_t* b, size_t n);

enum class Impl { Auto, Scalar, Avx2 };

// Forces a variant (tests, benchmarking); Auto re-probes the CPU. The
// IMSIM_KERNEL environment variable (scalar|avx2|auto) sets the initial mode.
void set_impl(Impl impl);
Impl active_impl();
const char* impl_name();

}  // namespace imsim::kernels
