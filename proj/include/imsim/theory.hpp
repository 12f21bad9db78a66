#pragma once

#include <optional>
#include <span>
#include <vector>

#include "imsim/common.hpp"
#include "imsim/config.hpp"

namespace imsim {

inline constexpr size_t kDefaultPairCap = 1ull << 20;
inline constexpr size_t kDefaultVnSamples = 1000000;

// Pairwise error probability of the joint ML detector averaged over Rayleigh
// fading, from the per-subcarrier squared distances delta_n (summed across
// transmit branches):
//   (1/pi) * integral over [0, pi/2] of
//       prod_n ( sin^2 t / (sin^2 t + delta_n / (4 n0f)) )^R dt,
// evaluated by adaptive Gauss-Legendre quadrature (absolute error < 1e-10).
double upep_ml(std::span<const double> delta, double n0f, int n_rx);

// Upper bound for the simple MMSE detector (exponentially distributed
// post-filtering SNR, exact for T = R): the same product with unit exponent.
double upep_mmse_bound(std::span<const double> delta, double n0f);

// Monte Carlo samples of V = Q^2 / (2C) for one branch of a T x T MMSE
// filter at the given noise level (the distribution is branch-independent).
std::vector<double> draw_v_samples(int n_tx, double sigma_x2, double n0f,
                                   size_t count, uint64_t seed);

// Semi-analytical pairwise error probability: the Gaussian tail averaged
// over sampled V's, mean over s of Q(sqrt(sum_n V_n(s) delta_n)).
double upep_mmse_semianalytic(std::span<const double> delta,
                              std::span<const double> v_samples);

struct AbepCurve {
  std::vector<double> snr_db;
  std::vector<double> abep;     // clipped at 1/2
  size_t realizations = 0;      // n(x): candidates entering the union sum
  size_t ordered_pairs = 0;     // pairwise events counted
  int bits_per_realization = 0;  // n_b
};

// Union bound on the ML bit error probability, all joint transmit tuples
// weighted by their bit distances. Pairs with the same distance profile
// share one quadrature.
AbepCurve abep_ml_union(const SystemConfig& config,
                        std::span<const double> snr_db,
                        size_t pair_cap = kDefaultPairCap);

enum class MmseUpepEstimator { Bound, SemiAnalytic };

// Per-branch union average for the simple MMSE detector.
AbepCurve abep_mmse(const SystemConfig& config, MmseUpepEstimator estimator,
                    std::span<const double> snr_db,
                    size_t v_samples = kDefaultVnSamples, uint64_t seed = 1,
                    size_t pair_cap = kDefaultPairCap);

// High-SNR slope between the two highest-SNR points with ber < 1e-3 and a
// nonzero error count; empty when fewer than two qualify.
std::optional<double> diversity_order_estimate(std::span<const double> snr_db,
                                               std::span<const double> ber,
                                               std::span<const uint64_t> errors);

// Decoding cost in complex multiplications per subcarrier for the detector.
double complexity_cm(const SystemConfig& config, DetectorKind detector);

// The tabulated index-modulation spectral-efficiency expression
// N T (p1 + K log2 M) / (K (N_F + C_p)); printed by `info` alongside the
// defining m T / (N_F + C_p) for comparison (they disagree by the 1/K).
double tabulated_im_spectral_efficiency(const SystemConfig& config);

}  // namespace imsim
