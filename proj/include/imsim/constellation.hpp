#pragma once

#include <span>
#include <string>
#include <vector>

#include "imsim/common.hpp"

namespace imsim {

enum class Modulation { Bpsk, Qpsk, Qam8, Qam16, Qam64 };

Modulation modulation_from_string(const std::string& name);
const char* modulation_name(Modulation mod);

// M-ary constellation normalized to unit average symbol energy, with a fixed
// Gray bit labeling (BPSK maps bit 0 -> +1, bit 1 -> -1). The point at index
// L is the symbol for the bit label L read MSB-first.
class Constellation {
 public:
  static Constellation make(Modulation mod);

  int order() const { return static_cast<int>(points_.size()); }
  int bits_per_symbol() const { return bps_; }
  std::span<const cplx> points() const { return points_; }
  cplx point(int label) const { return points_[static_cast<size_t>(label)]; }

  // Nearest point to z in Euclidean distance; ties go to the lowest index.
  int nearest(cplx z) const;

 private:
  Constellation(std::vector<cplx> points, int bps)
      : points_(std::move(points)), bps_(bps) {}

  std::vector<cplx> points_;
  int bps_;
};

// Maps bits (length divisible by bits_per_symbol) to symbols.
std::vector<cplx> map_symbols(std::span<const uint8_t> bits,
                              const Constellation& c);

// Nearest-point decision plus its bit label.
struct DemapResult {
  int label;
  std::vector<uint8_t> bits;
};
DemapResult demap_symbol(cplx z, const Constellation& c);

}  // namespace imsim
