#include "imsim/theory.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "imsim/codebook.hpp"
#include "imsim/rng.hpp"

namespace imsim {

namespace {

// 20-point Gauss-Legendre rule on [-1,1]; nodes by Newton iteration on the
// Legendre recurrence.
struct GaussRule {
  static constexpr int kOrder = 20;
  double x[kOrder];
  double w[kOrder];

  GaussRule() {
    for (int i = 0; i < kOrder; ++i) {
      double xi = std::cos(kPi * (i + 0.75) / (kOrder + 0.5));
      double dp = 0.0;
      for (int iter = 0; iter < 100; ++iter) {
        double p0 = 1.0, p1 = xi;
        for (int k = 2; k <= kOrder; ++k) {
          double p2 = ((2.0 * k - 1.0) * xi * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = kOrder * (xi * p1 - p0) / (xi * xi - 1.0);
        double step = p1 / dp;
        xi -= step;
        if (std::abs(step) < 1e-15) break;
      }
      x[i] = xi;
      w[i] = 2.0 / ((1.0 - xi * xi) * dp * dp);
    }
  }
};

const GaussRule& gauss_rule() {
  static const GaussRule rule;
  return rule;
}

template <typename F>
double integrate_0_halfpi(F f) {
  const GaussRule& g = gauss_rule();
  double prev = 0.0;
  for (int panels = 1; panels <= 256; panels *= 2) {
    const double h = (kPi / 2.0) / panels;
    double acc = 0.0;
    for (int p = 0; p < panels; ++p) {
      const double mid = (p + 0.5) * h;
      for (int i = 0; i < GaussRule::kOrder; ++i)
        acc += g.w[i] * f(mid + 0.5 * h * g.x[i]);
      }
    acc *= 0.5 * h;
    if (panels > 1 && std::abs(acc - prev) < 1e-12) return acc;
    prev = acc;
  }
  return prev;
}

double upep_product(std::span<const double> delta, double n0f, int exponent) {
  std::vector<double> a(delta.size());
  for (size_t i = 0; i < delta.size(); ++i) a[i] = delta[i] / (4.0 * n0f);
  double val = integrate_0_halfpi([&](double theta) {
    const double s2 = std::sin(theta) * std::sin(theta);
    double prod = 1.0;
    for (double ai : a) {
      double term = s2 / (s2 + ai);
      for (int r = 0; r < exponent; ++r) prod *= term;
    }
    return prod;
  });
  return val / kPi;
}

// Distance-profile bucket: pairs sharing the same multiset of per-subcarrier
// distances share one UPEP evaluation.
struct ProfileBuckets {
  std::map<std::vector<int64_t>, size_t> index;
  std::vector<std::vector<double>> profiles;
  std::vector<double> weights;  // summed bit distances over ordered pairs

  void add(std::vector<double> profile, double weight) {
    std::sort(profile.begin(), profile.end());
    std::vector<int64_t> key(profile.size());
    for (size_t i = 0; i < profile.size(); ++i)
      key[i] = llround(profile[i] * 1e9);
    auto [it, fresh] = index.try_emplace(key, profiles.size());
    if (fresh) {
      profiles.push_back(std::move(profile));
      weights.push_back(weight);
    } else {
      weights[it->second] += weight;
    }
  }
};

size_t bit_distance(const std::vector<uint8_t>& a,
                    const std::vector<uint8_t>& b) {
  size_t d = 0;
  for (size_t i = 0; i < a.size(); ++i) d += a[i] != b[i];
  return d;
}

}  // namespace

double upep_ml(std::span<const double> delta, double n0f, int n_rx) {
  return upep_product(delta, n0f, n_rx);
}

double upep_mmse_bound(std::span<const double> delta, double n0f) {
  return upep_product(delta, n0f, 1);
}

std::vector<double> draw_v_samples(int n_tx, double sigma_x2, double n0f,
                                   size_t count, uint64_t seed) {
  Rng rng = Rng::substream(seed, 0x56534d504cull);  // dedicated stream
  const double rho = sigma_x2 / n0f;
  std::vector<double> v(count);
  Eigen::MatrixXcd h(n_tx, n_tx);
  for (size_t s = 0; s < count; ++s) {
    for (int r = 0; r < n_tx; ++r)
      for (int t = 0; t < n_tx; ++t) h(r, t) = rng.cnormal(1.0);
    Eigen::MatrixXcd b = h.adjoint() * h +
                         Eigen::MatrixXcd::Identity(n_tx, n_tx) / rho;
    Eigen::MatrixXcd w = b.inverse() * h.adjoint();
    Eigen::MatrixXcd a = w * h;
    const double q = a(0, 0).real();
    double interference = 0.0;
    for (int j = 1; j < n_tx; ++j) interference += std::norm(a(0, j));
    const double c =
        sigma_x2 * interference + n0f * w.row(0).squaredNorm();
    v[s] = q * q / (2.0 * c);
  }
  return v;
}

double upep_mmse_semianalytic(std::span<const double> delta,
                              std::span<const double> v_samples) {
  std::vector<double> nz;
  for (double d : delta)
    if (d > 0.0) nz.push_back(d);
  if (nz.empty()) return 0.5;
  const size_t s_count = v_samples.size();
  double acc = 0.0;
  for (size_t s = 0; s < s_count; ++s) {
    double arg = 0.0;
    // Distinct stride per distance term so multi-error events draw
    // (pseudo-)independent V's from the common pool.
    for (size_t j = 0; j < nz.size(); ++j)
      arg += nz[j] * v_samples[(s + j * 7919) % s_count];
    acc += qfunc(std::sqrt(arg));
  }
  return acc / static_cast<double>(s_count);
}

AbepCurve abep_ml_union(const SystemConfig& config,
                        std::span<const double> snr_db, size_t pair_cap) {
  config.validate();
  const int n_tx = config.n_tx;
  const int n_sub = config.eff_n();
  const IndexCodec codec(n_sub, config.eff_k(), config.eff_index_mode());
  const Constellation cst = Constellation::make(config.modulation);
  const SubblockCodebook cb = SubblockCodebook::build(codec, cst);

  const double tuples_d = std::pow(static_cast<double>(cb.count), n_tx);
  const double pairs_d = tuples_d * (tuples_d - 1.0) / 2.0;
  if (pairs_d > static_cast<double>(pair_cap))
    throw ConfigError("union bound would enumerate " +
                      std::to_string(pairs_d) + " pairs (cap " +
                      std::to_string(pair_cap) + "); reduce T, K or M");
  const size_t tuples = static_cast<size_t>(tuples_d + 0.5);

  // Materialize the joint tuples: concatenated bit labels and per-subcarrier
  // stacked values.
  std::vector<std::vector<uint8_t>> bits(tuples);
  std::vector<std::vector<cplx>> vals(tuples);  // [n * T + t]
  std::vector<size_t> entry(static_cast<size_t>(n_tx), 0);
  for (size_t i = 0; i < tuples; ++i) {
    auto& bi = bits[i];
    auto& vi = vals[i];
    vi.resize(static_cast<size_t>(n_sub) * n_tx);
    for (int t = 0; t < n_tx; ++t) {
      const size_t e = entry[static_cast<size_t>(t)];
      bi.insert(bi.end(), cb.bits[e].begin(), cb.bits[e].end());
      for (int n = 0; n < n_sub; ++n)
        vi[static_cast<size_t>(n) * n_tx + t] =
            cb.values[e][static_cast<size_t>(n)];
    }
    for (int t = n_tx - 1; t >= 0; --t) {
      if (++entry[static_cast<size_t>(t)] < cb.count) break;
      entry[static_cast<size_t>(t)] = 0;
    }
  }

  ProfileBuckets buckets;
  std::vector<double> profile(static_cast<size_t>(n_sub));
  for (size_t i = 0; i < tuples; ++i) {
    for (size_t j = i + 1; j < tuples; ++j) {
      for (int n = 0; n < n_sub; ++n) {
        double d = 0.0;
        for (int t = 0; t < n_tx; ++t)
          d += std::norm(vals[i][static_cast<size_t>(n) * n_tx + t] -
                         vals[j][static_cast<size_t>(n) * n_tx + t]);
        profile[static_cast<size_t>(n)] = d;
      }
      // Ordered pairs count twice; the pairwise probability is symmetric.
      buckets.add(profile, 2.0 * static_cast<double>(
                               bit_distance(bits[i], bits[j])));
    }
  }

  AbepCurve curve;
  curve.realizations = tuples;
  curve.ordered_pairs = tuples * (tuples - 1);
  curve.bits_per_realization = config.p() * n_tx;
  curve.snr_db.assign(snr_db.begin(), snr_db.end());
  const double denom = static_cast<double>(curve.bits_per_realization) *
                       static_cast<double>(tuples);
  for (double snr : snr_db) {
    const double n0f = config.sigma_x2() * config.energy_per_bit() *
                       std::pow(10.0, -snr / 10.0);
    double acc = 0.0;
    for (size_t bkt = 0; bkt < buckets.profiles.size(); ++bkt)
      acc += buckets.weights[bkt] *
             upep_ml(buckets.profiles[bkt], n0f, config.n_rx);
    curve.abep.push_back(std::min(0.5, acc / denom));
  }
  return curve;
}

AbepCurve abep_mmse(const SystemConfig& config, MmseUpepEstimator estimator,
                    std::span<const double> snr_db, size_t v_samples,
                    uint64_t seed, size_t pair_cap) {
  config.validate();
  const int n_sub = config.eff_n();
  const IndexCodec codec(n_sub, config.eff_k(), config.eff_index_mode());
  const Constellation cst = Constellation::make(config.modulation);
  const SubblockCodebook cb = SubblockCodebook::build(codec, cst);

  const double pairs_d =
      static_cast<double>(cb.count) * (static_cast<double>(cb.count) - 1.0) /
      2.0;
  if (pairs_d > static_cast<double>(pair_cap))
    throw ConfigError("union average would enumerate " +
                      std::to_string(pairs_d) + " pairs (cap " +
                      std::to_string(pair_cap) + ")");

  ProfileBuckets buckets;
  std::vector<double> profile(static_cast<size_t>(n_sub));
  for (size_t i = 0; i < cb.count; ++i) {
    for (size_t j = i + 1; j < cb.count; ++j) {
      for (int n = 0; n < n_sub; ++n)
        profile[static_cast<size_t>(n)] =
            std::norm(cb.values[i][static_cast<size_t>(n)] -
                      cb.values[j][static_cast<size_t>(n)]);
      buckets.add(profile,
                  2.0 * static_cast<double>(bit_distance(cb.bits[i],
                                                         cb.bits[j])));
    }
  }

  AbepCurve curve;
  curve.realizations = cb.count;
  curve.ordered_pairs = cb.count * (cb.count - 1);
  curve.bits_per_realization = config.p();
  curve.snr_db.assign(snr_db.begin(), snr_db.end());
  const double denom = static_cast<double>(curve.bits_per_realization) *
                       static_cast<double>(cb.count);
  for (size_t si = 0; si < snr_db.size(); ++si) {
    const double n0f = config.sigma_x2() * config.energy_per_bit() *
                       std::pow(10.0, -snr_db[si] / 10.0);
    std::vector<double> pool;
    if (estimator == MmseUpepEstimator::SemiAnalytic)
      pool = draw_v_samples(config.n_tx, config.sigma_x2(), n0f, v_samples,
                            splitmix64(seed ^ (si + 1)));
    double acc = 0.0;
    for (size_t bkt = 0; bkt < buckets.profiles.size(); ++bkt) {
      double upep = estimator == MmseUpepEstimator::Bound
                        ? upep_mmse_bound(buckets.profiles[bkt], n0f)
                        : upep_mmse_semianalytic(buckets.profiles[bkt], pool);
      acc += buckets.weights[bkt] * upep;
    }
    curve.abep.push_back(std::min(0.5, acc / denom));
  }
  return curve;
}

std::optional<double> diversity_order_estimate(
    std::span<const double> snr_db, std::span<const double> ber,
    std::span<const uint64_t> errors) {
  int hi1 = -1, hi2 = -1;  // hi1 = highest valid SNR, hi2 = second
  for (size_t i = 0; i < snr_db.size(); ++i) {
    if (!(ber[i] < 1e-3) || errors[i] == 0) continue;
    if (hi1 < 0 || snr_db[i] > snr_db[static_cast<size_t>(hi1)]) {
      hi2 = hi1;
      hi1 = static_cast<int>(i);
    } else if (hi2 < 0 || snr_db[i] > snr_db[static_cast<size_t>(hi2)]) {
      hi2 = static_cast<int>(i);
    }
  }
  if (hi2 < 0) return std::nullopt;
  const double d_snr =
      (snr_db[static_cast<size_t>(hi1)] - snr_db[static_cast<size_t>(hi2)]) /
      10.0;
  return (std::log10(ber[static_cast<size_t>(hi2)]) -
          std::log10(ber[static_cast<size_t>(hi1)])) /
         d_snr;
}

double complexity_cm(const SystemConfig& config, DetectorKind detector) {
  const double t = config.n_tx;
  const double r = config.n_rx;
  const double m = 1 << config.bits_per_symbol();
  const double cmk = static_cast<double>(1ull << config.p1()) *
                     std::pow(m, config.eff_k());
  switch (detector) {
    case DetectorKind::Ml:
      return r * (t + 1) * std::pow(cmk, t);
    case DetectorKind::NearMl:
      return r * (t + 1) * std::pow(m + 1, t);
    case DetectorKind::MmseSimple:
      return 2 * t * t * t + 5 * t * t * r + t * r + cmk;
    case DetectorKind::MmseLlr:
      return 2 * t * t * t + 5 * t * t * r + t * (r + m + 1);
    case DetectorKind::MmseLlrOsic:
      return t * t * t * t + t * t * t * (2 * r + 3) + t * t * (4 * r + 3) +
             t * (3 * r + m + 1);
    case DetectorKind::VblastMl:
      return r * (t + 1) * std::pow(m, t);
    case DetectorKind::VblastMmse:
      return t * t * t + 2 * t * t * r + t * (r + m);
    case DetectorKind::VblastMmseOsic:
      return t * t * t * t + t * t * t * (2 * r + 3) + 2 * t * t * (r + 1) +
             t * (2 * r + m);
    case DetectorKind::Alamouti:
      return r * (2 + m);  // combining plus the scaled nearest-point search
  }
  return 0.0;
}

double tabulated_im_spectral_efficiency(const SystemConfig& config) {
  return static_cast<double>(config.eff_n()) * config.n_tx *
         (config.p1() + config.eff_k() * config.bits_per_symbol()) /
         (static_cast<double>(config.eff_k()) * (config.nfft + config.cp_len));
}

}  // namespace imsim
