#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "imsim/detect.hpp"
#include "imsim/kernels.hpp"

namespace imsim {

namespace {

constexpr size_t kComboCap = 1ull << 20;
constexpr size_t kScanBlock = 4096;

// Joint per-subcarrier realizations: every branch takes one of M+1 options
// (0 = silent), encoded as a base-(M+1) id with branch 0 most significant.
struct ComboSpace {
  int n_tx;
  int n_opts;     // M + 1
  size_t count;   // (M+1)^T
  std::vector<size_t> pow;  // pow[t] = (M+1)^(T-1-t)

  ComboSpace(int t, int m_opts) : n_tx(t), n_opts(m_opts) {
    double c = std::pow(static_cast<double>(n_opts), n_tx);
    if (c > static_cast<double>(kComboCap))
      throw ConfigError("per-subcarrier search space too large: " +
                        std::to_string(c));
    count = static_cast<size_t>(c + 0.5);
    pow.resize(static_cast<size_t>(n_tx));
    size_t v = 1;
    for (int t2 = n_tx - 1; t2 >= 0; --t2) {
      pow[static_cast<size_t>(t2)] = v;
      v *= static_cast<size_t>(n_opts);
    }
  }

  int digit(size_t combo, int t) const {
    return static_cast<int>((combo / pow[static_cast<size_t>(t)]) %
                            static_cast<size_t>(n_opts));
  }
};

// table[n * space.count + combo] = || y_n - H_n x(combo) ||^2
std::vector<double> combo_metric_table(const SubblockObservation& obs,
                                       const ComboSpace& space,
                                       std::span<const cplx> points) {
  const int n_sub = obs.n_sub();
  const int n_rx = obs.n_rx();
  std::vector<double> table(static_cast<size_t>(n_sub) * space.count);
  Eigen::VectorXcd x(space.n_tx);
  for (int n = 0; n < n_sub; ++n) {
    for (size_t combo = 0; combo < space.count; ++combo) {
      for (int t = 0; t < space.n_tx; ++t) {
        int d = space.digit(combo, t);
        x(t) = d == 0 ? cplx{0.0, 0.0} : points[static_cast<size_t>(d - 1)];
      }
      Eigen::VectorXcd r = obs.y[static_cast<size_t>(n)] -
                           obs.h[static_cast<size_t>(n)] * x;
      double acc = 0.0;
      for (int rr = 0; rr < n_rx; ++rr) acc += std::norm(r(rr));
      table[static_cast<size_t>(n) * space.count + combo] = acc;
    }
  }
  return table;
}

size_t checked_joint_count(const SubblockCodebook& cb, int n_tx, size_t cap) {
  double joint = std::pow(static_cast<double>(cb.count), n_tx);
  if (joint > static_cast<double>(cap))
    throw ConfigError(
        "joint ML codebook would hold " + std::to_string(joint) +
        " tuples (cap " + std::to_string(cap) +
        "); reduce T, K or M, or use the near-ML / MMSE detectors");
  return static_cast<size_t>(joint + 0.5);
}

DetectionResult emit_tuple(const SubblockCodebook& cb, int n_tx,
                           size_t joint_index) {
  DetectionResult res;
  res.bits.resize(static_cast<size_t>(n_tx));
  res.subblocks.resize(static_cast<size_t>(n_tx));
  for (int t = n_tx - 1; t >= 0; --t) {
    size_t e = joint_index % cb.count;
    joint_index /= cb.count;
    res.bits[static_cast<size_t>(t)] = cb.bits[e];
    res.subblocks[static_cast<size_t>(t)] = cb.values[e];
  }
  return res;
}

}  // namespace

DetectionResult ml_detect(const SubblockObservation& obs,
                          const SubblockCodebook& cb, size_t cap) {
  const int n_tx = obs.n_tx();
  const int n_sub = obs.n_sub();
  const size_t joint = checked_joint_count(cb, n_tx, cap);
  ComboSpace space(n_tx, cb.m + 1);
  std::vector<double> table = combo_metric_table(obs, space, cb.points);

  // Scan the joint tuples in blocks: per entry and subcarrier the score table
  // is addressed by the base-(M+1) combo id assembled from the per-branch
  // codebook options.
  std::vector<int32_t> block(static_cast<size_t>(n_sub) * kScanBlock);
  std::vector<size_t> entry(static_cast<size_t>(n_tx), 0);
  size_t best_index = 0;
  double best_score = std::numeric_limits<double>::infinity();
  for (size_t start = 0; start < joint; start += kScanBlock) {
    const size_t bsize = std::min(kScanBlock, joint - start);
    for (size_t i = 0; i < bsize; ++i) {
      for (int n = 0; n < n_sub; ++n) {
        size_t combo = 0;
        for (int t = 0; t < n_tx; ++t)
          combo += static_cast<size_t>(
                       cb.opts[static_cast<size_t>(n) * cb.count +
                               entry[static_cast<size_t>(t)]]) *
                   space.pow[static_cast<size_t>(t)];
        block[static_cast<size_t>(n) * bsize + i] =
            static_cast<int32_t>(combo);
      }
      for (int t = n_tx - 1; t >= 0; --t) {
        if (++entry[static_cast<size_t>(t)] < cb.count) break;
        entry[static_cast<size_t>(t)] = 0;
      }
    }
    kernels::ScanResult r =
        kernels::scan_best(table.data(), space.count, block.data(),
                           static_cast<size_t>(n_sub), bsize, false);
    if (r.score < best_score) {
      best_score = r.score;
      best_index = start + r.index;
    }
  }
  return emit_tuple(cb, n_tx, best_index);
}

DetectionResult ml_detect_reference(const SubblockObservation& obs,
                                    const SubblockCodebook& cb, size_t cap) {
  const int n_tx = obs.n_tx();
  const int n_rx = obs.n_rx();
  const int n_sub = obs.n_sub();
  const size_t joint = checked_joint_count(cb, n_tx, cap);

  std::vector<size_t> entry(static_cast<size_t>(n_tx), 0);
  size_t best_index = 0;
  double best_score = std::numeric_limits<double>::infinity();
  for (size_t e = 0; e < joint; ++e) {
    double metric = 0.0;
    for (int r = 0; r < n_rx; ++r) {
      for (int n = 0; n < n_sub; ++n) {
        cplx acc = obs.y[static_cast<size_t>(n)](r);
        for (int t = 0; t < n_tx; ++t)
          acc -= cb.values[entry[static_cast<size_t>(t)]]
                          [static_cast<size_t>(n)] *
                 obs.h[static_cast<size_t>(n)](r, t);
        metric += std::norm(acc);
      }
    }
    if (metric < best_score) {
      best_score = metric;
      best_index = e;
    }
    for (int t = n_tx - 1; t >= 0; --t) {
      if (++entry[static_cast<size_t>(t)] < cb.count) break;
      entry[static_cast<size_t>(t)] = 0;
    }
  }
  return emit_tuple(cb, n_tx, best_index);
}

namespace {

// Normalized log posteriors of the joint realizations, [n * count + combo].
std::vector<double> log_posteriors(const SubblockObservation& obs,
                                   const SubblockCodebook& cb,
                                   const ComboSpace& space) {
  const int n_tx = obs.n_tx();
  const int n_sub = obs.n_sub();
  const double n0f = obs.n0f > 0.0 ? obs.n0f : 1e-300;
  std::vector<double> lp = combo_metric_table(obs, space, cb.points);

  // Activity priors: a branch is silent with probability 1 - K/N, and each
  // constellation point splits the remaining K/N mass evenly.
  const double act = static_cast<double>(cb.k) / cb.n;
  const double lp_zero =
      act < 1.0 ? std::log(1.0 - act)
                : -std::numeric_limits<double>::infinity();
  const double lp_sym = std::log(act / cb.m);

  for (int n = 0; n < n_sub; ++n) {
    double* row = lp.data() + static_cast<size_t>(n) * space.count;
    double lmax = -std::numeric_limits<double>::infinity();
    for (size_t combo = 0; combo < space.count; ++combo) {
      double v = -row[combo] / n0f;
      for (int t = 0; t < n_tx; ++t)
        v += space.digit(combo, t) == 0 ? lp_zero : lp_sym;
      row[combo] = v;
      lmax = std::max(lmax, v);
    }
    // Posterior normalization (log-sum-exp over the joint realizations).
    double sum = 0.0;
    for (size_t combo = 0; combo < space.count; ++combo)
      sum += std::exp(row[combo] - lmax);
    const double lnorm = lmax + std::log(sum);
    for (size_t combo = 0; combo < space.count; ++combo) row[combo] -= lnorm;
  }
  return lp;
}

}  // namespace

std::vector<double> near_ml_posteriors(const SubblockObservation& obs,
                                       const SubblockCodebook& cb) {
  ComboSpace space(obs.n_tx(), cb.m + 1);
  std::vector<double> lp = log_posteriors(obs, cb, space);
  for (double& v : lp) v = std::exp(v);
  return lp;
}

DetectionResult near_ml_detect(const SubblockObservation& obs,
                               const SubblockCodebook& cb) {
  const int n_tx = obs.n_tx();
  const int n_sub = obs.n_sub();
  const int n_opts = cb.m + 1;
  ComboSpace space(n_tx, n_opts);
  const std::vector<double> lp = log_posteriors(obs, cb, space);

  // Per-branch log marginals, laid out for the codebook scan:
  // marg[t][n * n_opts + v].
  std::vector<std::vector<double>> marg(
      static_cast<size_t>(n_tx),
      std::vector<double>(static_cast<size_t>(n_sub) * n_opts,
                          -std::numeric_limits<double>::infinity()));
  for (int n = 0; n < n_sub; ++n) {
    const double* row = lp.data() + static_cast<size_t>(n) * space.count;
    for (int t = 0; t < n_tx; ++t) {
      double* out = marg[static_cast<size_t>(t)].data() +
                    static_cast<size_t>(n) * n_opts;
      double rmax[65];
      std::fill(rmax, rmax + n_opts,
                -std::numeric_limits<double>::infinity());
      for (size_t combo = 0; combo < space.count; ++combo)
        rmax[space.digit(combo, t)] =
            std::max(rmax[space.digit(combo, t)], row[combo]);
      double racc[65] = {};
      for (size_t combo = 0; combo < space.count; ++combo) {
        int d = space.digit(combo, t);
        if (std::isfinite(rmax[d])) racc[d] += std::exp(row[combo] - rmax[d]);
      }
      for (int v = 0; v < n_opts; ++v)
        out[v] = std::isfinite(rmax[v]) ? rmax[v] + std::log(racc[v])
                                        : -std::numeric_limits<double>::infinity();
    }
  }

  DetectionResult res;
  res.posterior_evals = static_cast<uint64_t>(n_sub) * space.count;
  res.bits.resize(static_cast<size_t>(n_tx));
  res.subblocks.resize(static_cast<size_t>(n_tx));
  for (int t = 0; t < n_tx; ++t) {
    kernels::ScanResult r = kernels::scan_best(
        marg[static_cast<size_t>(t)].data(), static_cast<size_t>(n_opts),
        cb.opts.data(), static_cast<size_t>(n_sub), cb.count, true);
    res.bits[static_cast<size_t>(t)] = cb.bits[r.index];
    res.subblocks[static_cast<size_t>(t)] = cb.values[r.index];
  }
  return res;
}

}  // namespace imsim
