#include "imsim/kernels.hpp"

#if IMSIM_HAVE_AVX2

#include <immintrin.h>

namespace imsim::kernels {

ScanResult scan_best_avx2(const double* table, size_t stride,
                          const int32_t* opts, size_t n_pos, size_t count,
                          bool maximize) {
  size_t e = 0;
  ScanResult best{0, maximize ? -1.0e308 : 1.0e308};
  bool have_best = false;

  if (count >= 4) {
    const double init = maximize ? -1.0e308 : 1.0e308;
    __m256d best_v = _mm256_set1_pd(init);
    __m256d best_i = _mm256_set1_pd(0.0);  // entry ids fit a double exactly
    __m256d lane_i = _mm256_setr_pd(0.0, 1.0, 2.0, 3.0);
    const __m256d four = _mm256_set1_pd(4.0);

    for (; e + 4 <= count; e += 4) {
      __m256d acc = _mm256_setzero_pd();
      for (size_t n = 0; n < n_pos; ++n) {
        __m128i idx = _mm_loadu_si128(
            reinterpret_cast<const __m128i*>(opts + n * count + e));
        acc = _mm256_add_pd(acc,
                            _mm256_i32gather_pd(table + n * stride, idx, 8));
      }
      // Strict compare keeps the earliest block on ties; within a block the
      // lanes are distinct entries merged below with an index tie-break.
      __m256d better = maximize ? _mm256_cmp_pd(acc, best_v, _CMP_GT_OQ)
                                : _mm256_cmp_pd(acc, best_v, _CMP_LT_OQ);
      best_v = _mm256_blendv_pd(best_v, acc, better);
      best_i = _mm256_blendv_pd(best_i, lane_i, better);
      lane_i = _mm256_add_pd(lane_i, four);
    }

    alignas(32) double vals[4];
    alignas(32) double ids[4];
    _mm256_store_pd(vals, best_v);
    _mm256_store_pd(ids, best_i);
    for (int lane = 0; lane < 4; ++lane) {
      size_t id = static_cast<size_t>(ids[lane]);
      bool better = !have_best ||
                    (maximize ? vals[lane] > best.score
                              : vals[lane] < best.score) ||
                    (vals[lane] == best.score && id < best.index);
      if (better) {
        best = {id, vals[lane]};
        have_best = true;
      }
    }
  }

  for (; e < count; ++e) {
    double acc = 0.0;
    for (size_t n = 0; n < n_pos; ++n)
      acc += table[n * stride + static_cast<size_t>(opts[n * count + e])];
    bool better =
        !have_best || (maximize ? acc > best.score : acc < best.score);
    if (better) {
      best = {e, acc};
      have_best = true;
    }
  }
  return best;
}

uint64_t hamming_avx2(const uint8_t* a, const uint8_t* b, size_t n) {
  uint64_t d = 0;
  size_t i = 0;
  for (; i + 32 <= n; i += 32) {
    __m256i va = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(a + i));
    __m256i vb = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(b + i));
    uint32_t eq = static_cast<uint32_t>(
        _mm256_movemask_epi8(_mm256_cmpeq_epi8(va, vb)));
    d += 32u - static_cast<unsigned>(__builtin_popcount(eq));
  }
  for (; i < n; ++i) d += (a[i] != b[i]) ? 1u : 0u;
  return d;
}

}  // namespace imsim::kernels

#endif  // IMSIM_HAVE_AVX2
