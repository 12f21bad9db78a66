#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "imsim/common.hpp"

namespace imsim {

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Deterministic random stream. Each Monte Carlo frame owns a substream keyed
// by (seed, stream id), so results never depend on how frames are spread
// across workers.
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(splitmix64(seed)) {}

  static Rng substream(uint64_t seed, uint64_t stream) {
    return Rng(splitmix64(seed ^ splitmix64(stream)));
  }

  uint64_t next_u64() { return gen_(); }

  // Uniform on (0,1), never returning an endpoint.
  double uniform() {
    return (static_cast<double>(gen_() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Circularly symmetric complex Gaussian with E|x|^2 = var (Box-Muller).
  cplx cnormal(double var) {
    double mag = std::sqrt(-var * std::log(uniform()));
    double ph = 2.0 * kPi * uniform();
    return {mag * std::cos(ph), mag * std::sin(ph)};
  }

  uint8_t bit() {
    if (bit_count_ == 0) {
      bit_buf_ = gen_();
      bit_count_ = 64;
    }
    uint8_t b = bit_buf_ & 1u;
    bit_buf_ >>= 1;
    --bit_count_;
    return b;
  }

  void fill_bits(uint8_t* out, size_t n) {
    for (size_t i = 0; i < n; ++i) out[i] = bit();
  }

 private:
  std::mt19937_64 gen_;
  uint64_t bit_buf_ = 0;
  int bit_count_ = 0;
};

}  // namespace imsim
