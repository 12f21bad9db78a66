#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "imsim/detect.hpp"
#include "imsim/kernels.hpp"

namespace imsim {

namespace {

// Variance floor for the noiseless pseudo-inverse fallback. It must sit well
// above squared roundoff (~1e-30) so that residual/floor ratios stay
// negligible next to genuine symbol mismatches, or one subcarrier's term
// would swamp the whole metric sum.
constexpr double kVarFloor = 1e-24;

// Regularized inverse (H^H H + I/rho)^-1; rho = infinity gives the
// pseudo-inverse normal matrix used for the noiseless fallback.
Eigen::MatrixXcd gram_inverse(const Eigen::MatrixXcd& h, double rho) {
  const Eigen::Index t = h.cols();
  Eigen::MatrixXcd b = h.adjoint() * h;
  if (std::isfinite(rho))
    b += Eigen::MatrixXcd::Identity(t, t) / rho;
  Eigen::MatrixXcd inv = b.inverse();
  if (!inv.allFinite() ||
      (b * inv - Eigen::MatrixXcd::Identity(t, t)).cwiseAbs().maxCoeff() >
          1e-6)
    throw std::runtime_error(
        "mmse filter: channel matrix is numerically singular");
  return inv;
}

// Conditional variance of the filtered estimate for branch t: residual
// interference from the other branches plus filtered noise,
//   C = sigma_x2 * sum_{t' != t} |(WH)_{t,t'}|^2 + n0f ||w_t||^2.
double filtered_variance(const Eigen::RowVectorXcd& wh_row,
                         const Eigen::RowVectorXcd& w_row, int t,
                         double sigma_x2, double n0f) {
  double interference = 0.0;
  for (Eigen::Index j = 0; j < wh_row.size(); ++j)
    if (j != t) interference += std::norm(wh_row(j));
  return sigma_x2 * interference + n0f * w_row.squaredNorm();
}

int nearest_scaled(cplx xhat, double gain, std::span<const cplx> points) {
  int best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (size_t m = 0; m < points.size(); ++m) {
    double d = std::norm(xhat - gain * points[m]);
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(m);
    }
  }
  return best;
}

struct BranchDecision {
  std::vector<uint8_t> bits;
  std::vector<cplx> subblock;
  bool clamped = false;
};

// Index + symbol demapping from per-subcarrier LLRs and filtered estimates.
// Table mode keeps the row with the highest LLR sum; combinatorial mode keeps
// the K largest LLRs and clamps unmappable ranks to the last encodable word.
BranchDecision llr_demap(std::span<const double> llr,
                         std::span<const cplx> xhat,
                         std::span<const double> gain, const IndexCodec& codec,
                         const Constellation& c) {
  const int n = codec.subblock_len();
  const int k = codec.active_count();

  BranchDecision out;
  uint64_t word = 0;
  std::vector<int> pattern;
  if (codec.mode() == IndexMode::Table) {
    double best = -std::numeric_limits<double>::infinity();
    for (uint64_t row = 0; row < codec.rows(); ++row) {
      std::vector<int> pat = codec.pattern_encode(row);
      double sum = 0.0;
      for (int pos : pat) sum += llr[static_cast<size_t>(pos)];
      if (sum > best) {
        best = sum;
        word = row;
        pattern = std::move(pat);
      }
    }
  } else {
    std::vector<int> order(static_cast<size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return llr[static_cast<size_t>(a)] > llr[static_cast<size_t>(b)];
    });
    pattern.assign(order.begin(), order.begin() + k);
    std::sort(pattern.begin(), pattern.end());
    uint64_t rank = codec.comb_rank(pattern);
    if (rank >= codec.rows()) {
      // Legal combination without an index word; fall back to the nearest
      // encodable rank and count the event.
      word = codec.rows() - 1;
      pattern = codec.comb_unrank(word);
      out.clamped = true;
    } else {
      word = rank;
    }
  }

  out.bits = word_to_bits(word, codec.index_bits());
  out.subblock.assign(static_cast<size_t>(n), cplx{0.0, 0.0});
  for (int pos : pattern) {
    int label = nearest_scaled(xhat[static_cast<size_t>(pos)],
                               gain[static_cast<size_t>(pos)], c.points());
    auto lbits = word_to_bits(static_cast<uint64_t>(label),
                              c.bits_per_symbol());
    out.bits.insert(out.bits.end(), lbits.begin(), lbits.end());
    out.subblock[static_cast<size_t>(pos)] = c.point(label);
  }
  return out;
}

}  // namespace

double activity_llr(cplx xhat, double gain, double var,
                    std::span<const cplx> points) {
  const double c = std::max(var, kVarFloor);
  double lmax = -std::numeric_limits<double>::infinity();
  for (const cplx& s : points)
    lmax = std::max(lmax, -std::norm(xhat - gain * s) / c);
  double acc = 0.0;
  for (const cplx& s : points)
    acc += std::exp(-std::norm(xhat - gain * s) / c - lmax);
  return lmax + std::log(acc) + std::norm(xhat) / c;
}

MmseStats mmse_filter(const SubblockObservation& obs, double sigma_x2) {
  const int n_sub = obs.n_sub();
  const int n_tx = obs.n_tx();
  const double rho = obs.n0f > 0.0
                         ? sigma_x2 / obs.n0f
                         : std::numeric_limits<double>::infinity();

  MmseStats st;
  st.n0f = obs.n0f;
  st.xhat.assign(static_cast<size_t>(n_tx),
                 std::vector<cplx>(static_cast<size_t>(n_sub)));
  st.gain.assign(static_cast<size_t>(n_tx),
                 std::vector<double>(static_cast<size_t>(n_sub)));
  st.var.assign(static_cast<size_t>(n_tx),
                std::vector<double>(static_cast<size_t>(n_sub)));

  for (int n = 0; n < n_sub; ++n) {
    const Eigen::MatrixXcd& h = obs.h[static_cast<size_t>(n)];
    Eigen::MatrixXcd w = gram_inverse(h, rho) * h.adjoint();
    Eigen::MatrixXcd wh = w * h;
    Eigen::VectorXcd z = w * obs.y[static_cast<size_t>(n)];
    for (int t = 0; t < n_tx; ++t) {
      st.xhat[static_cast<size_t>(t)][static_cast<size_t>(n)] = z(t);
      st.gain[static_cast<size_t>(t)][static_cast<size_t>(n)] =
          wh(t, t).real();
      st.var[static_cast<size_t>(t)][static_cast<size_t>(n)] =
          filtered_variance(wh.row(t), w.row(t), t, sigma_x2, obs.n0f);
    }
  }
  return st;
}

DetectionResult mmse_simple_detect(const MmseStats& stats,
                                   const SubblockCodebook& cb) {
  const int n_tx = static_cast<int>(stats.xhat.size());
  const int n_sub = cb.n;
  const size_t stride = static_cast<size_t>(cb.m) + 1;

  DetectionResult res;
  res.bits.resize(static_cast<size_t>(n_tx));
  res.subblocks.resize(static_cast<size_t>(n_tx));
  std::vector<double> table(static_cast<size_t>(n_sub) * stride);
  for (int t = 0; t < n_tx; ++t) {
    for (int n = 0; n < n_sub; ++n) {
      const cplx xh = stats.xhat[static_cast<size_t>(t)][static_cast<size_t>(n)];
      const double q = stats.gain[static_cast<size_t>(t)][static_cast<size_t>(n)];
      const double c =
          std::max(stats.var[static_cast<size_t>(t)][static_cast<size_t>(n)],
                   kVarFloor);
      double* row = table.data() + static_cast<size_t>(n) * stride;
      row[0] = std::norm(xh) / c;
      for (int m = 0; m < cb.m; ++m)
        row[m + 1] = std::norm(xh - q * cb.points[static_cast<size_t>(m)]) / c;
    }
    kernels::ScanResult r =
        kernels::scan_best(table.data(), stride, cb.opts.data(),
                           static_cast<size_t>(n_sub), cb.count, false);
    res.bits[static_cast<size_t>(t)] = cb.bits[r.index];
    res.subblocks[static_cast<size_t>(t)] = cb.values[r.index];
  }
  return res;
}

DetectionResult mmse_llr_detect(const MmseStats& stats,
                                const IndexCodec& codec,
                                const Constellation& c) {
  const int n_tx = static_cast<int>(stats.xhat.size());
  const int n_sub = codec.subblock_len();

  DetectionResult res;
  res.bits.resize(static_cast<size_t>(n_tx));
  res.subblocks.resize(static_cast<size_t>(n_tx));
  std::vector<double> llr(static_cast<size_t>(n_sub));
  for (int t = 0; t < n_tx; ++t) {
    const auto& xh = stats.xhat[static_cast<size_t>(t)];
    const auto& q = stats.gain[static_cast<size_t>(t)];
    const auto& cv = stats.var[static_cast<size_t>(t)];
    for (int n = 0; n < n_sub; ++n)
      llr[static_cast<size_t>(n)] =
          activity_llr(xh[static_cast<size_t>(n)], q[static_cast<size_t>(n)],
                       cv[static_cast<size_t>(n)], c.points());
    BranchDecision d = llr_demap(llr, xh, q, codec, c);
    if (d.clamped) ++res.illegal_pattern_events;
    res.bits[static_cast<size_t>(t)] = std::move(d.bits);
    res.subblocks[static_cast<size_t>(t)] = std::move(d.subblock);
  }
  return res;
}

DetectionResult mmse_llr_osic_detect(const SubblockObservation& obs,
                                     const IndexCodec& codec,
                                     const Constellation& c, double sigma_x2) {
  const int n_sub = obs.n_sub();
  const int n_tx = obs.n_tx();
  const double rho = obs.n0f > 0.0
                         ? sigma_x2 / obs.n0f
                         : std::numeric_limits<double>::infinity();

  std::vector<Eigen::VectorXcd> y(obs.y);
  std::vector<Eigen::MatrixXcd> h(obs.h);
  std::vector<int> active(static_cast<size_t>(n_tx));
  std::iota(active.begin(), active.end(), 0);

  DetectionResult res;
  res.bits.resize(static_cast<size_t>(n_tx));
  res.subblocks.resize(static_cast<size_t>(n_tx));

  std::vector<Eigen::MatrixXcd> hact(static_cast<size_t>(n_sub));
  std::vector<Eigen::MatrixXcd> ginv(static_cast<size_t>(n_sub));
  std::vector<double> llr(static_cast<size_t>(n_sub));
  std::vector<cplx> xhat(static_cast<size_t>(n_sub));
  std::vector<double> gain(static_cast<size_t>(n_sub));
  std::vector<double> var(static_cast<size_t>(n_sub));

  while (!active.empty()) {
    // Filters are recomputed per stage from the deflated channel (cancelled
    // branches dropped). For the regularized pseudo-inverse of
    // G = [H; I/sqrt(rho)] the row energy ||(G+)_t||^2 equals
    // ((H^H H + I/rho)^-1)_{t,t}, which is all the ordering needs.
    const int n_act = static_cast<int>(active.size());
    for (int n = 0; n < n_sub; ++n) {
      auto& ha = hact[static_cast<size_t>(n)];
      ha.resize(obs.n_rx(), n_act);
      for (int i = 0; i < n_act; ++i)
        ha.col(i) = h[static_cast<size_t>(n)].col(active[static_cast<size_t>(i)]);
      ginv[static_cast<size_t>(n)] = gram_inverse(ha, rho);
    }

    // Min-max SINR ordering: pick the branch whose worst subcarrier is best.
    int best_i = 0;
    double best_gamma = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n_act; ++i) {
      double gamma = 0.0;
      for (int n = 0; n < n_sub; ++n)
        gamma = std::max(gamma, ginv[static_cast<size_t>(n)](i, i).real());
      if (gamma < best_gamma) {
        best_gamma = gamma;
        best_i = i;
      }
    }
    const int best_t = active[static_cast<size_t>(best_i)];

    for (int n = 0; n < n_sub; ++n) {
      const Eigen::MatrixXcd& ha = hact[static_cast<size_t>(n)];
      Eigen::RowVectorXcd q =
          ginv[static_cast<size_t>(n)].row(best_i) * ha.adjoint();
      Eigen::RowVectorXcd qh = q * ha;
      xhat[static_cast<size_t>(n)] = (q * y[static_cast<size_t>(n)])(0);
      gain[static_cast<size_t>(n)] = qh(best_i).real();
      var[static_cast<size_t>(n)] =
          filtered_variance(qh, q, best_i, sigma_x2, obs.n0f);
      llr[static_cast<size_t>(n)] =
          activity_llr(xhat[static_cast<size_t>(n)],
                       gain[static_cast<size_t>(n)],
                       var[static_cast<size_t>(n)], c.points());
    }
    BranchDecision d = llr_demap(llr, xhat, gain, codec, c);
    if (d.clamped) ++res.illegal_pattern_events;

    // Re-encode and cancel the decided subblock from every subcarrier.
    for (int n = 0; n < n_sub; ++n)
      y[static_cast<size_t>(n)] -= h[static_cast<size_t>(n)].col(best_t) *
                                   d.subblock[static_cast<size_t>(n)];
    res.bits[static_cast<size_t>(best_t)] = std::move(d.bits);
    res.subblocks[static_cast<size_t>(best_t)] = std::move(d.subblock);
    active.erase(active.begin() + best_i);
  }
  return res;
}

}  // namespace imsim
