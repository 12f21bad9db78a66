// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// fails. Every run is pinned to seed 1 and is fully deterministic.
//
// Monte Carlo criteria use the uniform power-delay profile with 8 taps: with
// the tap count a multiple of the subblock length the interleaved subblock
// subcarriers are exactly mutually uncorrelated, which is the channel model
// the analytical curves assume.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "imsim/channel.hpp"
#include "imsim/detect.hpp"
#include "imsim/harness.hpp"
#include "imsim/rng.hpp"
#include "imsim/theory.hpp"

using namespace imsim;

namespace {

int g_failures = 0;
std::chrono::steady_clock::time_point g_t0;

void report(int criterion, const char* what, bool ok,
            const std::string& detail) {
  double secs = std::chrono::duration<double>(
                    std::chrono::steady_clock::now() - g_t0)
                    .count();
  std::printf("[%s] criterion %2d: %s — %s (t=%.0fs)\n", ok ? "PASS" : "FAIL",
              criterion, what, detail.c_str(), secs);
  std::fflush(stdout);
  g_failures += !ok;
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

constexpr uint64_t kSeed = 1;

SystemConfig desk_config(Scheme scheme, DetectorKind det, int t, int r, int n,
                         int k, Modulation mod, IndexMode mode) {
  SystemConfig cfg;
  cfg.scheme = scheme;
  cfg.detector = det;
  cfg.n_tx = t;
  cfg.n_rx = r;
  cfg.subblock_n = n;
  cfg.subblock_k = k;
  cfg.modulation = mod;
  cfg.index_mode = mode;
  cfg.nfft = 128;
  cfg.cp_len = 36;
  cfg.taps = 8;  // multiple of N=4: exactly uncorrelated subblock entries
  return cfg;
}

struct Curve {
  std::vector<double> snr, ber;
  std::vector<uint64_t> errors, bits;
};

Curve sweep(const SystemConfig& cfg, const std::vector<double>& grid,
            uint64_t min_errors, uint64_t max_frames) {
  RunOptions opt;
  opt.seed = kSeed;
  opt.stop.min_bit_errors = min_errors;
  opt.stop.max_frames = max_frames;
  Curve c;
  for (double s : grid) {
    BerPoint p = run_point(cfg, s, opt);
    c.snr.push_back(s);
    c.ber.push_back(p.ber());
    c.errors.push_back(p.bit_errors);
    c.bits.push_back(p.bits);
  }
  return c;
}

// SNR where the curve crosses `level`, by log-linear interpolation.
std::optional<double> crossing(const Curve& c, double level) {
  for (size_t i = 0; i + 1 < c.snr.size(); ++i) {
    if (c.ber[i] >= level && level >= c.ber[i + 1] && c.ber[i + 1] > 0.0) {
      double f = (std::log10(c.ber[i]) - std::log10(level)) /
                 (std::log10(c.ber[i]) - std::log10(c.ber[i + 1]));
      return c.snr[i] + f * (c.snr[i + 1] - c.snr[i]);
    }
  }
  return std::nullopt;
}

// 95% two-sided relative half-width of a binomial BER estimate.
double rel2sigma(uint64_t errors) {
  return errors ? 2.0 / std::sqrt(static_cast<double>(errors)) : 1e9;
}

void criterion_1() {
  using clock = std::chrono::steady_clock;
  auto t0 = clock::now();
  uint64_t failures = 0, total = 0;
  auto run = [&](int n, int k, Modulation mod, IndexMode mode) {
    IndexCodec codec(n, k, mode);
    Constellation cst = Constellation::make(mod);
    const int p = codec.index_bits() + k * cst.bits_per_symbol();
    auto check = [&](std::span<const uint8_t> bits) {
      auto sb = subblock_encode(bits, codec, cst);
      failures += !std::ranges::equal(subblock_decode(sb, codec, cst), bits);
      ++total;
    };
    if (p <= 16) {
      for (uint64_t w = 0; w < (1ull << p); ++w) {
        auto bits = word_to_bits(w, p);
        check(bits);
      }
    } else {
      Rng rng(kSeed);
      std::vector<uint8_t> bits(static_cast<size_t>(p));
      for (int rep = 0; rep < 10000; ++rep) {
        rng.fill_bits(bits.data(), bits.size());
        check(bits);
      }
    }
  };
  run(4, 2, Modulation::Bpsk, IndexMode::Table);
  run(4, 2, Modulation::Bpsk, IndexMode::Combinatorial);
  run(4, 3, Modulation::Qpsk, IndexMode::Table);
  run(4, 3, Modulation::Qpsk, IndexMode::Combinatorial);
  run(16, 13, Modulation::Qam8, IndexMode::Combinatorial);
  double secs = std::chrono::duration<double>(clock::now() - t0).count();
  report(1, "codec bijectivity", failures == 0 && secs < 10.0,
         fmt("%llu round trips, %llu failures, %.2fs",
             static_cast<unsigned long long>(total),
             static_cast<unsigned long long>(failures), secs));
}

void criterion_2() {
  // Reference rows, 1-based active indices.
  const std::vector<std::vector<int>> table42 = {
      {1, 3}, {2, 4}, {1, 4}, {2, 3}};
  const std::vector<std::vector<int>> table43 = {
      {1, 2, 3}, {1, 2, 4}, {1, 3, 4}, {2, 3, 4}};
  bool ok = true;
  IndexCodec c42(4, 2, IndexMode::Table);
  IndexCodec c43(4, 3, IndexMode::Table);
  for (uint64_t w = 0; w < 4; ++w) {
    auto p42 = c42.pattern_encode(w);
    auto p43 = c43.pattern_encode(w);
    for (size_t i = 0; i < p42.size(); ++i)
      ok = ok && p42[i] + 1 == table42[w][i];
    for (size_t i = 0; i < p43.size(); ++i)
      ok = ok && p43[i] + 1 == table43[w][i];
  }
  report(2, "reference look-up table fidelity", ok, "8 rows checked");
}

void criterion_3() {
  // Independent derivation: G = 512/N subblocks carry p1 + K log2 M bits
  // each, so the four reference setups move 1024, 2048, 4096 and 6144 bits
  // per frame over 512 + 36 subcarrier uses (the usual rounded quotes are
  // 1.87, 3.74, 7.48 and 11.2; note 4096/548 = 7.4745).
  struct Case {
    int t, n, k;
    Modulation mod;
    IndexMode mode;
    double bits;
  };
  const std::vector<Case> cases = {
      {2, 4, 2, Modulation::Bpsk, IndexMode::Table, 2.0 * 128 * 4},
      {2, 4, 3, Modulation::Qpsk, IndexMode::Table, 2.0 * 128 * 8},
      {4, 4, 3, Modulation::Qpsk, IndexMode::Table, 4.0 * 128 * 8},
      {4, 16, 13, Modulation::Qam8, IndexMode::Combinatorial,
       4.0 * 32 * 48},
  };
  bool ok = true;
  std::string detail;
  for (const auto& cs : cases) {
    SystemConfig cfg;
    cfg.n_tx = cs.t;
    cfg.subblock_n = cs.n;
    cfg.subblock_k = cs.k;
    cfg.modulation = cs.mod;
    cfg.index_mode = cs.mode;
    double se = cfg.spectral_efficiency();
    double expect = cs.bits / 548.0;
    ok = ok && std::abs(se - expect) <= 0.005;
    detail += fmt("%.4f ", se);
  }
  report(3, "spectral efficiency of the four reference setups", ok,
         detail + "bits/s/Hz vs 1024|2048|4096|6144 / 548");
}

void criterion_4() {
  Rng rng(kSeed);
  int agree = 0;
  const int reps = 1000;
  IndexCodec codec(4, 2, IndexMode::Table);
  Constellation bpsk = Constellation::make(Modulation::Bpsk);
  Constellation qpsk = Constellation::make(Modulation::Qpsk);
  auto cb_bpsk = SubblockCodebook::build(codec, bpsk);
  auto cb_qpsk = SubblockCodebook::build(codec, qpsk);
  for (int rep = 0; rep < reps; ++rep) {
    const auto& cb = rep % 2 == 0 ? cb_qpsk : cb_bpsk;
    SubblockObservation obs;
    obs.n0f = 0.05 + rng.uniform();
    obs.y.assign(4, Eigen::VectorXcd::Zero(2));
    obs.h.resize(4);
    for (int n = 0; n < 4; ++n) {
      Eigen::MatrixXcd h(2, 2);
      for (int r = 0; r < 2; ++r)
        for (int t = 0; t < 2; ++t) h(r, t) = rng.cnormal(1.0);
      obs.h[static_cast<size_t>(n)] = h;
    }
    for (int t = 0; t < 2; ++t) {
      size_t e = rng.next_u64() % cb.count;
      for (int n = 0; n < 4; ++n)
        obs.y[static_cast<size_t>(n)] +=
            obs.h[static_cast<size_t>(n)].col(t) *
            cb.values[e][static_cast<size_t>(n)];
    }
    for (int n = 0; n < 4; ++n)
      for (int r = 0; r < 2; ++r)
        obs.y[static_cast<size_t>(n)](r) += rng.cnormal(obs.n0f);
    agree += ml_detect(obs, cb).bits == ml_detect_reference(obs, cb).bits;
  }
  report(4, "joint-form and per-branch ML detectors agree", agree == reps,
         fmt("%d / %d identical decisions", agree, reps));
}

// Shared 2x2 BPSK N=4 K=2 ML / near-ML curves (criteria 5, 6, 7a).
struct MlCurves {
  Curve ml, near_ml;
};

MlCurves run_ml_curves() {
  SystemConfig ml_cfg =
      desk_config(Scheme::MimoOfdmIm, DetectorKind::Ml, 2, 2, 4, 2,
                  Modulation::Bpsk, IndexMode::Table);
  SystemConfig nml_cfg = ml_cfg;
  nml_cfg.detector = DetectorKind::NearMl;
  MlCurves c;
  c.ml = sweep(ml_cfg, {9, 10, 11, 12}, 200, 100000);
  // The high-SNR tail feeds the bound-tightness and slope checks; more
  // errors are collected there to keep those estimates stable.
  Curve tail = sweep(ml_cfg, {14, 16}, 800, 250000);
  for (size_t i = 0; i < tail.snr.size(); ++i) {
    c.ml.snr.push_back(tail.snr[i]);
    c.ml.ber.push_back(tail.ber[i]);
    c.ml.errors.push_back(tail.errors[i]);
    c.ml.bits.push_back(tail.bits[i]);
  }
  c.near_ml = sweep(nml_cfg, {9, 10, 11, 12}, 200, 100000);
  return c;
}

void criterion_5(const MlCurves& c) {
  // Anchor at the measured point where the ML curve is closest to 1e-3 and
  // measure the near-ML curve's horizontal lag to that operating point.
  size_t star = 0;
  for (size_t i = 1; i < 4; ++i)
    if (std::abs(std::log10(c.ml.ber[i]) + 3.0) <
        std::abs(std::log10(c.ml.ber[star]) + 3.0))
      star = i;
  auto cross = crossing(c.near_ml, c.ml.ber[star]);
  bool ok = cross.has_value() && std::abs(*cross - c.ml.snr[star]) <= 0.75;
  report(5, "near-ML tracks ML within 0.75 dB at BER ~1e-3", ok,
         cross ? fmt("ML %.3e at %.0f dB, near-ML lag %.3f dB",
                     c.ml.ber[star], c.ml.snr[star], *cross - c.ml.snr[star])
               : "no crossing found");
}

void criterion_6(const MlCurves& c) {
  SystemConfig cfg =
      desk_config(Scheme::MimoOfdmIm, DetectorKind::Ml, 2, 2, 4, 2,
                  Modulation::Bpsk, IndexMode::Table);
  // Two highest simulated SNR points at BER <= 1e-4.
  std::vector<size_t> idx;
  for (size_t i = 0; i < c.ml.snr.size(); ++i)
    if (c.ml.ber[i] <= 1e-4 && c.ml.errors[i] > 0) idx.push_back(i);
  bool ok = idx.size() >= 2;
  std::string detail;
  if (ok) {
    idx = {idx[idx.size() - 2], idx[idx.size() - 1]};
    std::vector<double> grid = {c.ml.snr[idx[0]], c.ml.snr[idx[1]]};
    AbepCurve bound = abep_ml_union(cfg, grid);
    for (size_t j = 0; j < 2 && ok; ++j) {
      double sim = c.ml.ber[idx[j]];
      double guard = rel2sigma(c.ml.errors[idx[j]]);
      bool above = bound.abep[j] >= sim * (1.0 - guard);
      bool tight = bound.abep[j] <= 3.0 * sim * (1.0 + guard);
      ok = above && tight;
      detail += fmt("%.0fdB bound/sim %.2f ", grid[j], bound.abep[j] / sim);
    }
  }
  report(6, "ML union bound dominates within a factor of 3", ok, detail);
}

void criterion_7(const MlCurves& c, const Curve& mmse22) {
  auto ml_slope = diversity_order_estimate(c.ml.snr, c.ml.ber, c.ml.errors);
  auto mmse_slope =
      diversity_order_estimate(mmse22.snr, mmse22.ber, mmse22.errors);
  bool ok = ml_slope && *ml_slope >= 1.25 && *ml_slope <= 2.75 &&
            mmse_slope && *mmse_slope >= 0.5 && *mmse_slope <= 1.5;
  report(7, "diversity slopes: ML order R, simple MMSE order one", ok,
         fmt("ml slope %.2f (band 1.25..2.75), mmse slope %.2f (band "
             "0.5..1.5)",
             ml_slope.value_or(-1.0), mmse_slope.value_or(-1.0)));
}

void criterion_8() {
  SystemConfig llr =
      desk_config(Scheme::MimoOfdmIm, DetectorKind::MmseLlr, 4, 4, 4, 3,
                  Modulation::Qpsk, IndexMode::Table);
  SystemConfig simple = llr;
  simple.detector = DetectorKind::MmseSimple;
  SystemConfig osic = llr;
  osic.detector = DetectorKind::MmseLlrOsic;
  SystemConfig vb =
      desk_config(Scheme::Vblast, DetectorKind::VblastMmse, 4, 4, 4, 4,
                  Modulation::Qpsk, IndexMode::Combinatorial);

  const double matched_snr = 15.0;
  Curve llr_curve = sweep(llr, {15, 20, 25}, 300, 60000);
  Curve vb_curve = sweep(vb, {15, 20, 25}, 300, 60000);
  Curve simple_pt = sweep(simple, {matched_snr}, 300, 60000);
  Curve osic_pt = sweep(osic, {matched_snr}, 300, 60000);

  const double b_llr = llr_curve.ber[0];
  const double b_simple = simple_pt.ber[0];
  const double b_osic = osic_pt.ber[0];
  bool osic_better = b_osic < b_llr;
  // Two-proportion z-test at 2 sigma for "performs the same".
  double pooled = std::sqrt(
      b_llr * (1 - b_llr) / static_cast<double>(llr_curve.bits[0]) +
      b_simple * (1 - b_simple) / static_cast<double>(simple_pt.bits[0]));
  bool same = std::abs(b_llr - b_simple) <= 2.0 * pooled;

  auto llr_cross = crossing(llr_curve, 1e-3);
  auto vb_cross = crossing(vb_curve, 1e-3);
  bool gap_ok = llr_cross && vb_cross && (*vb_cross - *llr_cross >= 1.0);

  report(8, "MMSE detector ordering at 4x4", osic_better && same && gap_ok,
         fmt("llr %.2e ~ simple %.2e (2s %.1e), osic %.2e, gap to "
             "spatial-multiplexing MMSE %.2f dB",
             b_llr, b_simple, 2.0 * pooled, b_osic,
             (vb_cross && llr_cross) ? *vb_cross - *llr_cross : -1.0));
}

void criterion_9(const Curve& sim) {
  SystemConfig cfg =
      desk_config(Scheme::MimoOfdmIm, DetectorKind::MmseSimple, 2, 2, 4, 3,
                  Modulation::Qpsk, IndexMode::Table);
  AbepCurve semi =
      abep_mmse(cfg, MmseUpepEstimator::SemiAnalytic, sim.snr, 100000, kSeed);
  AbepCurve bound = abep_mmse(cfg, MmseUpepEstimator::Bound, sim.snr);
  bool ok = true;
  int used = 0;
  std::string detail;
  for (size_t i = 0; i < sim.snr.size(); ++i) {
    if (sim.ber[i] > 1e-3 || sim.errors[i] == 0) continue;
    ++used;
    double guard = rel2sigma(sim.errors[i]);
    double lo = sim.ber[i] * (1.0 - guard);
    double hi = sim.ber[i] * (1.0 + guard);
    bool tracks = semi.abep[i] <= 2.0 * hi && semi.abep[i] >= lo / 2.0;
    bool dominated = bound.abep[i] >= semi.abep[i] && bound.abep[i] >= lo;
    ok = ok && tracks && dominated;
    detail +=
        fmt("%.0fdB semi/sim %.2f ", sim.snr[i], semi.abep[i] / sim.ber[i]);
  }
  ok = ok && used >= 2;
  report(9, "semi-analytical MMSE curve tracks simulation (factor 2)", ok,
         detail + fmt("(%d points)", used));
}

void criterion_10() {
  SystemConfig cfg =
      desk_config(Scheme::MimoOfdmIm, DetectorKind::Ml, 2, 2, 4, 2,
                  Modulation::Bpsk, IndexMode::Table);
  cfg.nfft = 64;
  RunOptions opt;
  opt.seed = kSeed;
  opt.stop.max_frames = 100;
  opt.stop.min_bit_errors = 1ull << 62;
  BerPoint freq = run_point(cfg, 8.0, opt);
  opt.path = ChannelPath::TimeDomain;
  BerPoint time = run_point(cfg, 8.0, opt);
  bool ok = freq.bit_errors == time.bit_errors && freq.bits == time.bits &&
            freq.index_bit_errors == time.index_bit_errors &&
            freq.symbol_bit_errors == time.symbol_bit_errors &&
            freq.bit_errors > 0;
  report(10, "frequency and time-domain paths match exactly", ok,
         fmt("%llu vs %llu bit errors in %llu frames",
             static_cast<unsigned long long>(freq.bit_errors),
             static_cast<unsigned long long>(time.bit_errors),
             static_cast<unsigned long long>(freq.frames)));
}

void criterion_11() {
  struct SchemeCase {
    const char* name;
    SystemConfig cfg;
  };
  SystemConfig im =
      desk_config(Scheme::MimoOfdmIm, DetectorKind::MmseLlr, 2, 4, 4, 3,
                  Modulation::Qpsk, IndexMode::Table);
  SystemConfig vb =
      desk_config(Scheme::Vblast, DetectorKind::VblastMmse, 2, 4, 4, 4,
                  Modulation::Qpsk, IndexMode::Combinatorial);
  SystemConfig al =
      desk_config(Scheme::Alamouti, DetectorKind::Alamouti, 2, 4, 4, 4,
                  Modulation::Qam16, IndexMode::Combinatorial);
  for (SystemConfig* cfg : {&im, &vb, &al}) {
    cfg->channel_profile = ChannelProfile::Epa;
    cfg->taps = 4;
  }
  std::vector<SchemeCase> cases = {
      {"mimo-ofdm-im", im}, {"vblast", vb}, {"alamouti", al}};
  const std::vector<double> grid = {3, 7, 11};
  bool ok = true;
  std::string detail;
  for (auto& sc : cases) {
    SystemConfig impaired = sc.cfg;
    impaired.csi_q = 1.0;
    Curve p = sweep(sc.cfg, grid, 300, 40000);
    Curve q = sweep(impaired, grid, 300, 40000);
    uint64_t p_total = 0, q_total = 0;
    for (size_t i = 0; i < grid.size(); ++i) {
      // Degradation at every point; crossovers allowed only inside the
      // two-proportion noise band.
      double sigma = std::sqrt(
          p.ber[i] * (1 - p.ber[i]) / static_cast<double>(p.bits[i]) +
          q.ber[i] * (1 - q.ber[i]) / static_cast<double>(q.bits[i]));
      ok = ok && (q.ber[i] >= p.ber[i] - 2.0 * sigma);
      p_total += p.errors[i];
      q_total += q.errors[i];
    }
    ok = ok && q_total > p_total;
    detail += fmt("%s x%.1f ", sc.name,
                  static_cast<double>(q_total) /
                      std::max<uint64_t>(p_total, 1));
  }
  report(11, "imperfect CSI (Q=1) degrades every scheme at every SNR", ok,
         detail + "error inflation");
}

void criterion_12() {
  SystemConfig cfg =
      desk_config(Scheme::MimoOfdmIm, DetectorKind::MmseLlr, 2, 2, 4, 2,
                  Modulation::Bpsk, IndexMode::Table);
  cfg.nfft = 64;
  RunOptions opt;
  opt.seed = kSeed;
  opt.stop.max_frames = 192;
  std::vector<double> grid = {5, 15};
  opt.workers = 1;
  std::string a = campaign_csv(run_campaign(cfg, grid, opt));
  opt.workers = 2;
  std::string b = campaign_csv(run_campaign(cfg, grid, opt));
  opt.workers = 5;
  std::string c = campaign_csv(run_campaign(cfg, grid, opt));
  bool ok = a == b && b == c && !a.empty();
  report(12, "campaign CSV is byte-identical for any worker count", ok,
         fmt("%zu bytes x 3 runs", a.size()));
}

}  // namespace

int main() {
  g_t0 = std::chrono::steady_clock::now();
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_4();

  MlCurves ml_curves = run_ml_curves();
  criterion_5(ml_curves);
  criterion_6(ml_curves);

  SystemConfig mmse22 =
      desk_config(Scheme::MimoOfdmIm, DetectorKind::MmseSimple, 2, 2, 4, 3,
                  Modulation::Qpsk, IndexMode::Table);
  Curve mmse22_curve = sweep(mmse22, {20, 25, 30, 35}, 300, 60000);
  criterion_7(ml_curves, mmse22_curve);
  criterion_8();
  criterion_9(mmse22_curve);
  criterion_10();
  criterion_11();
  criterion_12();

  std::printf("%s: %d criterion(s) failed\n",
              g_failures == 0 ? "ACCEPTANCE PASSED" : "ACCEPTANCE FAILED",
              g_failures);
  return g_failures == 0 ? 0 : 1;
}
