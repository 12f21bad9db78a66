#include "imsim/channel.hpp"

#include <cmath>

namespace imsim {

Eigen::MatrixXcd ChannelRealization::sub_matrix(int g, int n, int subblock_len,
                                                bool estimated) const {
  const int g_count = nfft / subblock_len;
  const size_t sc = static_cast<size_t>(n) * g_count + g;
  Eigen::MatrixXcd h(n_rx, n_tx);
  for (int r = 0; r < n_rx; ++r)
    for (int t = 0; t < n_tx; ++t)
      h(r, t) = estimated ? estimate(r, t)[sc] : response(r, t)[sc];
  return h;
}

std::vector<double> epa_tap_powers() {
  // Linear amplitude gains 0.7594 / 0.6486 / 0 / 0.0517; squared they already
  // sum to ~1.00007, renormalized here to exactly one.
  std::vector<double> p = {0.7594 * 0.7594, 0.6486 * 0.6486, 0.0,
                           0.0517 * 0.0517};
  double total = 0.0;
  for (double v : p) total += v;
  for (double& v : p) v /= total;
  return p;
}

ChannelRealization draw_channel(int n_tx, int n_rx, int taps,
                                ChannelProfile profile, int nfft, Rng& rng) {
  std::vector<double> powers;
  if (profile == ChannelProfile::Uniform) {
    powers.assign(static_cast<size_t>(taps),
                  1.0 / static_cast<double>(taps));
  } else if (profile == ChannelProfile::Epa) {
    powers = epa_tap_powers();
    if (taps != static_cast<int>(powers.size()))
      throw ConfigError("epa profile fixes the channel at 4 taps");
  } else {
    throw ConfigError("unknown channel profile");
  }

  ChannelRealization ch;
  ch.n_tx = n_tx;
  ch.n_rx = n_rx;
  ch.nfft = nfft;
  ch.taps.resize(static_cast<size_t>(n_tx) * n_rx);
  ch.freq.resize(static_cast<size_t>(n_tx) * n_rx);
  for (int r = 0; r < n_rx; ++r) {
    for (int t = 0; t < n_tx; ++t) {
      auto& g = ch.taps[static_cast<size_t>(r) * n_tx + t];
      g.resize(static_cast<size_t>(taps));
      for (int l = 0; l < taps; ++l) g[l] = rng.cnormal(powers[l]);

      // Direct DFT of the zero-padded taps (L is small).
      auto& h = ch.freq[static_cast<size_t>(r) * n_tx + t];
      h.resize(static_cast<size_t>(nfft));
      for (int f = 0; f < nfft; ++f) {
        cplx acc{0.0, 0.0};
        for (int l = 0; l < taps; ++l) {
          double ang = -2.0 * kPi * f * l / static_cast<double>(nfft);
          acc += g[l] * cplx{std::cos(ang), std::sin(ang)};
        }
        h[f] = acc;
      }
    }
  }
  return ch;
}

void corrupt_csi(ChannelRealization& ch, double q, double n0f, Rng& rng) {
  if (std::isinf(q)) {
    ch.perfect_csi = true;
    ch.est.clear();
    return;
  }
  const double err_var = n0f / q;
  ch.perfect_csi = false;
  ch.est = ch.freq;
  for (auto& resp : ch.est)
    for (auto& v : resp) v += rng.cnormal(err_var);
}

Eigen::VectorXcd apply_channel_and_noise(const Eigen::MatrixXcd& h,
                                         const Eigen::VectorXcd& x, double n0f,
                                         Rng& rng) {
  Eigen::VectorXcd y = h * x;
  if (n0f > 0.0)
    for (Eigen::Index r = 0; r < y.size(); ++r) y(r) += rng.cnormal(n0f);
  return y;
}

NoiseLevels snr_to_noise(double snr_db, const SystemConfig& config) {
  NoiseLevels n;
  n.n0t = config.energy_per_bit() * std::pow(10.0, -snr_db / 10.0);
  n.n0f = config.sigma_x2() * n.n0t;
  return n;
}

}  // namespace imsim
