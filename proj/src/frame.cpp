#include "imsim/frame.hpp"

#include <cmath>

namespace imsim {

std::vector<cplx> interleave(std::span<const cplx> x, int subblock_len) {
  const size_t n = static_cast<size_t>(subblock_len);
  if (n == 0 || x.size() % n != 0)
    throw ConfigError("interleave: length not divisible by subblock size");
  const size_t g_count = x.size() / n;
  std::vector<cplx> out(x.size());
  for (size_t g = 0; g < g_count; ++g)
    for (size_t i = 0; i < n; ++i) out[i * g_count + g] = x[g * n + i];
  return out;
}

std::vector<cplx> deinterleave(std::span<const cplx> x, int subblock_len) {
  const size_t n = static_cast<size_t>(subblock_len);
  if (n == 0 || x.size() % n != 0)
    throw ConfigError("deinterleave: length not divisible by subblock size");
  const size_t g_count = x.size() / n;
  std::vector<cplx> out(x.size());
  for (size_t g = 0; g < g_count; ++g)
    for (size_t i = 0; i < n; ++i) out[g * n + i] = x[i * g_count + g];
  return out;
}

void fft_pow2(std::vector<cplx>& a, bool inverse) {
  const size_t n = a.size();
  if (n == 0 || (n & (n - 1)) != 0)
    throw ConfigError("fft: size must be a power of two");

  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (size_t len = 2; len <= n; len <<= 1) {
    const double ang = (inverse ? 2.0 : -2.0) * kPi / static_cast<double>(len);
    const cplx wl{std::cos(ang), std::sin(ang)};
    for (size_t i = 0; i < n; i += len) {
      cplx w{1.0, 0.0};
      for (size_t k = 0; k < len / 2; ++k) {
        cplx u = a[i + k];
        cplx v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wl;
      }
    }
  }
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (auto& v : a) v *= scale;
}

std::vector<cplx> dft_unitary(std::span<const cplx> x, bool inverse) {
  std::vector<cplx> a(x.begin(), x.end());
  fft_pow2(a, inverse);
  return a;
}

std::vector<cplx> ofdm_modulate(std::span<const cplx> freq, int cp_len,
                                double sigma_x2) {
  std::vector<cplx> body = dft_unitary(freq, true);
  const double scale = 1.0 / std::sqrt(sigma_x2);
  for (auto& v : body) v *= scale;
  std::vector<cplx> out;
  out.reserve(body.size() + static_cast<size_t>(cp_len));
  out.insert(out.end(), body.end() - cp_len, body.end());
  out.insert(out.end(), body.begin(), body.end());
  return out;
}

std::vector<cplx> ofdm_demodulate(std::span<const cplx> time, int cp_len,
                                  double sigma_x2) {
  std::vector<cplx> out =
      dft_unitary(time.subspan(static_cast<size_t>(cp_len)), false);
  const double scale = std::sqrt(sigma_x2);
  for (auto& v : out) v *= scale;
  return out;
}

}  // namespace imsim
