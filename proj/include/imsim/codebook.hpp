#pragma once

#include <vector>

#include "imsim/common.hpp"
#include "imsim/constellation.hpp"
#include "imsim/index_codec.hpp"

namespace imsim {

inline constexpr size_t kDefaultCodebookCap = 1ull << 20;
inline constexpr size_t kDefaultJointCap = 1ull << 24;

// Every legal subblock of one transmit branch, enumerated by its p-bit word
// value (the detector tie-break order). Entry e stores the transmitted
// values and, for the score-scan kernels, a per-position option id:
// 0 = inactive subcarrier, 1 + label = constellation point.
struct SubblockCodebook {
  int n = 0;        // subblock length
  int k = 0;        // active subcarriers
  int m = 0;        // constellation order
  int p1 = 0, p2 = 0, p = 0;
  size_t count = 0;  // C * M^K

  std::vector<std::vector<uint8_t>> bits;   // [count][p]
  std::vector<std::vector<cplx>> values;    // [count][n]
  std::vector<int32_t> opts;                // [n * count], position-major
  std::vector<cplx> points;                 // option id v>0 -> points[v-1]

  static SubblockCodebook build(const IndexCodec& codec,
                                const Constellation& c,
                                size_t cap = kDefaultCodebookCap);
};

}  // namespace imsim
