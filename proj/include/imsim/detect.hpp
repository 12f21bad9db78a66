#pragma once

#include <Eigen/Dense>
#include <vector>

#include "imsim/codebook.hpp"
#include "imsim/common.hpp"
#include "imsim/constellation.hpp"
#include "imsim/index_codec.hpp"

namespace imsim {

// Received vectors and receiver-side channel matrices for the N subcarriers
// of one subblock. The matrices are whatever CSI the receiver has; detection
// metrics never distinguish perfect from estimated channels.
struct SubblockObservation {
  std::vector<Eigen::VectorXcd> y;  // N vectors, each R x 1
  std::vector<Eigen::MatrixXcd> h;  // N matrices, each R x T
  double n0f = 0.0;

  int n_sub() const { return static_cast<int>(y.size()); }
  int n_rx() const { return static_cast<int>(y.empty() ? 0 : y[0].size()); }
  int n_tx() const { return static_cast<int>(h.empty() ? 0 : h[0].cols()); }
};

struct DetectionResult {
  std::vector<std::vector<uint8_t>> bits;    // [T][p]
  std::vector<std::vector<cplx>> subblocks;  // [T][N], always legal
  uint64_t illegal_pattern_events = 0;  // combinatorial LLR ranks clamped
  uint64_t posterior_evals = 0;         // near-ML conditional pdf count
};

// Joint maximum-likelihood search over all (C*M^K)^T transmit tuples,
// evaluated per subcarrier and scanned with the kernel layer. Refuses when
// the joint codebook exceeds `cap`.
DetectionResult ml_detect(const SubblockObservation& obs,
                          const SubblockCodebook& cb,
                          size_t cap = kDefaultJointCap);

// Same decision rule written as the per-branch metric sum (a literal
// translation kept as the independent oracle for ml_detect).
DetectionResult ml_detect_reference(const SubblockObservation& obs,
                                    const SubblockCodebook& cb,
                                    size_t cap = kDefaultJointCap);

// Per-subcarrier posterior marginalization followed by an independent
// per-branch search (log-domain throughout).
DetectionResult near_ml_detect(const SubblockObservation& obs,
                               const SubblockCodebook& cb);

// Linear-domain posteriors of the joint per-subcarrier realizations,
// [n * (M+1)^T + combo] with branch t's option as digit t of the base-(M+1)
// combo id (branch 0 most significant); every subcarrier row sums to one.
std::vector<double> near_ml_posteriors(const SubblockObservation& obs,
                                       const SubblockCodebook& cb);

// Per-branch statistics of the MMSE-filtered estimates: xhat[t][n] with
// conditional mean gain[t][n] * x and variance var[t][n].
struct MmseStats {
  std::vector<std::vector<cplx>> xhat;
  std::vector<std::vector<double>> gain;
  std::vector<std::vector<double>> var;
  double n0f = 0.0;
};

MmseStats mmse_filter(const SubblockObservation& obs, double sigma_x2);

// Subcarrier-activity log-likelihood ratio of one filtered estimate:
// log sum_m exp(-|xhat - gain s_m|^2 / var) + |xhat|^2 / var.
double activity_llr(cplx xhat, double gain, double var,
                    std::span<const cplx> points);

// Weighted nearest legal subblock on the filtered estimates.
DetectionResult mmse_simple_detect(const MmseStats& stats,
                                   const SubblockCodebook& cb);

// Subcarrier-activity log-likelihood ratios; the index demap picks either
// the best table row or the K largest-LLR subcarriers (combinatorial mode).
DetectionResult mmse_llr_detect(const MmseStats& stats,
                                const IndexCodec& codec,
                                const Constellation& c);

// Ordered successive interference cancellation wrapped around the LLR
// detector: branches are detected best-SINR-first and cancelled.
DetectionResult mmse_llr_osic_detect(const SubblockObservation& obs,
                                     const IndexCodec& codec,
                                     const Constellation& c, double sigma_x2);

// Alamouti combining for T = 2 over two OFDM symbols with a common channel;
// returns the two decided labels for one subcarrier.
struct AlamoutiDecision {
  int label1 = 0;
  int label2 = 0;
};
AlamoutiDecision alamouti_detect(const Eigen::VectorXcd& y_slot1,
                                 const Eigen::VectorXcd& y_slot2,
                                 const Eigen::MatrixXcd& h,
                                 const Constellation& c);

}  // namespace imsim
