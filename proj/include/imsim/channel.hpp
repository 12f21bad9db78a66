#pragma once

#include <Eigen/Dense>
#include <vector>

#include "imsim/config.hpp"
#include "imsim/rng.hpp"

namespace imsim {

// One frequency-selective Rayleigh MIMO channel draw: L-tap impulse responses
// per (receive, transmit) antenna pair plus their N_F-point frequency
// responses, optionally with a corrupted receiver-side estimate.
struct ChannelRealization {
  int n_tx = 0;
  int n_rx = 0;
  int nfft = 0;
  std::vector<std::vector<cplx>> taps;  // [r*T + t], length L
  std::vector<std::vector<cplx>> freq;  // [r*T + t], length N_F
  std::vector<std::vector<cplx>> est;   // receiver CSI; == freq when perfect
  bool perfect_csi = true;

  const std::vector<cplx>& impulse(int r, int t) const {
    return taps[static_cast<size_t>(r) * n_tx + t];
  }
  const std::vector<cplx>& response(int r, int t) const {
    return freq[static_cast<size_t>(r) * n_tx + t];
  }
  const std::vector<cplx>& estimate(int r, int t) const {
    return perfect_csi ? response(r, t)
                       : est[static_cast<size_t>(r) * n_tx + t];
  }

  // R x T matrix for subcarrier n of deinterleaved subblock g: subblock
  // entries sit G subcarriers apart, so position (g,n) maps to physical
  // subcarrier n*G + g.
  Eigen::MatrixXcd sub_matrix(int g, int n, int subblock_len,
                              bool estimated) const;
};

// Tap powers of the LTE-EPA profile resampled at f_s = 7.68 MHz (one tap per
// sample, delays 0/130/260/390 ns), normalized to unit total power.
std::vector<double> epa_tap_powers();

ChannelRealization draw_channel(int n_tx, int n_rx, int taps,
                                ChannelProfile profile, int nfft, Rng& rng);

// Receiver CSI model: estimate = response + error, error variance n0f/q per
// entry. Infinite q keeps the estimate exact.
void corrupt_csi(ChannelRealization& ch, double q, double n0f, Rng& rng);

Eigen::VectorXcd apply_channel_and_noise(const Eigen::MatrixXcd& h,
                                         const Eigen::VectorXcd& x, double n0f,
                                         Rng& rng);

struct NoiseLevels {
  double n0t = 0.0;  // time-domain sample noise variance
  double n0f = 0.0;  // frequency-domain noise variance, (K/N) * n0t
};

NoiseLevels snr_to_noise(double snr_db, const SystemConfig& config);

}  // namespace imsim
