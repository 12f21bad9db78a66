#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace imsim {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

// Invalid or inconsistent system parameters.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed operation input (wrong sizes, out-of-range words).
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A subcarrier activation pattern that cannot be mapped back to bits.
struct IllegalPatternError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Gaussian tail probability.
inline double qfunc(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

inline int int_log2(uint64_t v) {
  int b = -1;
  while (v) {
    v >>= 1;
    ++b;
  }
  return b;
}

// Packs bits (MSB first) into an integer word.
inline uint64_t bits_to_word(std::span<const uint8_t> bits) {
  uint64_t w = 0;
  for (uint8_t b : bits) w = (w << 1) | (b & 1u);
  return w;
}

inline void word_to_bits(uint64_t w, int nbits, uint8_t* out) {
  for (int i = 0; i < nbits; ++i) out[i] = (w >> (nbits - 1 - i)) & 1u;
}

inline std::vector<uint8_t> word_to_bits(uint64_t w, int nbits) {
  std::vector<uint8_t> out(nbits);
  word_to_bits(w, nbits, out.data());
  return out;
}

}  // namespace imsim
