#include "imsim/constellation.hpp"

#include <cmath>

namespace imsim {

namespace {

// Gray-labeled PAM amplitude for a k-bit label, levels descending from
// +(2^k - 1) so that the all-zero label takes the largest amplitude
// (k = 1 gives 0 -> +1, 1 -> -1).
double gray_pam(uint32_t label, int k) {
  uint32_t pos = label;
  // Inverse Gray code: position of the label in the Gray sequence.
  for (uint32_t shift = 1; shift < static_cast<uint32_t>(k); shift <<= 1)
    pos ^= pos >> shift;
  int levels = 1 << k;
  return static_cast<double>(levels - 1) - 2.0 * static_cast<double>(pos);
}

std::vector<cplx> build_points(Modulation mod, int& bps) {
  switch (mod) {
    case Modulation::Bpsk: {
      bps = 1;
      return {cplx{1.0, 0.0}, cplx{-1.0, 0.0}};
    }
    case Modulation::Qpsk: {
      bps = 2;
      std::vector<cplx> pts(4);
      for (uint32_t l = 0; l < 4; ++l)
        pts[l] = cplx{gray_pam(l >> 1, 1), gray_pam(l & 1, 1)} / std::sqrt(2.0);
      return pts;
    }
    case Modulation::Qam8: {
      // Rectangular 4x2 grid, Gray-coded per axis: two bits on the in-phase
      // 4-PAM, one bit on the quadrature 2-PAM. Mean energy 5 + 1 = 6.
      bps = 3;
      std::vector<cplx> pts(8);
      for (uint32_t l = 0; l < 8; ++l)
        pts[l] = cplx{gray_pam(l >> 1, 2), gray_pam(l & 1, 1)} / std::sqrt(6.0);
      return pts;
    }
    case Modulation::Qam16: {
      bps = 4;
      std::vector<cplx> pts(16);
      for (uint32_t l = 0; l < 16; ++l)
        pts[l] =
            cplx{gray_pam(l >> 2, 2), gray_pam(l & 3, 2)} / std::sqrt(10.0);
      return pts;
    }
    case Modulation::Qam64: {
      bps = 6;
      std::vector<cplx> pts(64);
      for (uint32_t l = 0; l < 64; ++l)
        pts[l] =
            cplx{gray_pam(l >> 3, 3), gray_pam(l & 7, 3)} / std::sqrt(42.0);
      return pts;
    }
  }
  throw ConfigError("unknown modulation");
}

}  // namespace

Modulation modulation_from_string(const std::string& name) {
  if (name == "bpsk") return Modulation::Bpsk;
  if (name == "qpsk") return Modulation::Qpsk;
  if (name == "qam8") return Modulation::Qam8;
  if (name == "qam16") return Modulation::Qam16;
  if (name == "qam64") return Modulation::Qam64;
  throw ConfigError("unknown modulation '" + name +
                    "' (expected bpsk|qpsk|qam8|qam16|qam64)");
}

const char* modulation_name(Modulation mod) {
  switch (mod) {
    case Modulation::Bpsk: return "bpsk";
    case Modulation::Qpsk: return "qpsk";
    case Modulation::Qam8: return "qam8";
    case Modulation::Qam16: return "qam16";
    case Modulation::Qam64: return "qam64";
  }
  return "?";
}

Constellation Constellation::make(Modulation mod) {
  int bps = 0;
  std::vector<cplx> pts = build_points(mod, bps);
  return Constellation(std::move(pts), bps);
}

int Constellation::nearest(cplx z) const {
  int best = 0;
  double best_d = std::norm(z - points_[0]);
  for (size_t i = 1; i < points_.size(); ++i) {
    double d = std::norm(z - points_[i]);
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(i);
    }
  }
  return best;
}

std::vector<cplx> map_symbols(std::span<const uint8_t> bits,
                              const Constellation& c) {
  const int bps = c.bits_per_symbol();
  if (bits.size() % static_cast<size_t>(bps) != 0)
    throw InputError("bit count not divisible by bits per symbol");
  std::vector<cplx> out(bits.size() / static_cast<size_t>(bps));
  for (size_t s = 0; s < out.size(); ++s) {
    uint64_t label = bits_to_word(bits.subspan(s * bps, bps));
    out[s] = c.point(static_cast<int>(label));
  }
  return out;
}

DemapResult demap_symbol(cplx z, const Constellation& c) {
  int label = c.nearest(z);
  return {label, word_to_bits(static_cast<uint64_t>(label),
                              c.bits_per_symbol())};
}

}  // namespace imsim
