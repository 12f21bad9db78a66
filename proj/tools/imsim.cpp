// Command-line front end: Monte Carlo campaigns, analytical curves, codec
// self-checks and configuration info for the MIMO-OFDM index-modulation
// simulator.

#include <CLI11.hpp>
#include <cstdio>
#include <iostream>
#include <string>

#include "imsim/channel.hpp"
#include "imsim/detect.hpp"
#include "imsim/harness.hpp"
#include "imsim/kernels.hpp"
#include "imsim/rng.hpp"
#include "imsim/theory.hpp"

using namespace imsim;

namespace {

struct CliFlags {
  std::string preset;
  std::string scheme = "mimo-ofdm-im";
  std::string detector = "ml";
  int n_tx = 2, n_rx = 2;
  int subblock_n = 4, subblock_k = 2;
  std::string mod = "bpsk";
  std::string index_mode = "table";
  int nfft = 512, cp = 36;
  std::string channel = "uniform";
  int taps = 10;
  double csi_q = -1.0;  // <= 0 means perfect CSI
  std::string snr = "0:5:30";
  uint64_t seed = 1;
  uint64_t min_errors = 200;
  uint64_t max_frames = 100000;
  int workers = 0;
  std::string out = "results.csv";
  std::string theory = "none";
  std::string path = "freq";
  std::string estimator = "ml-union";
  size_t samples = 100000;
};

struct OptionRefs {
  CLI::Option* scheme = nullptr;
  CLI::Option* detector = nullptr;
  CLI::Option* n_tx = nullptr;
  CLI::Option* n_rx = nullptr;
  CLI::Option* subblock_n = nullptr;
  CLI::Option* subblock_k = nullptr;
  CLI::Option* mod = nullptr;
  CLI::Option* index_mode = nullptr;
  CLI::Option* nfft = nullptr;
  CLI::Option* cp = nullptr;
  CLI::Option* channel = nullptr;
  CLI::Option* taps = nullptr;
  CLI::Option* csi_q = nullptr;
  CLI::Option* snr = nullptr;
};

OptionRefs add_config_flags(CLI::App* cmd, CliFlags& f) {
  OptionRefs refs;
  cmd->add_option("--preset", f.preset,
                  "Named setup: fig3a (2x2 BPSK N4K2 ML), fig4a (2x2 QPSK "
                  "N4K3 MMSE-LLR), fig5 (4x4 8-QAM N16K13 combinatorial), "
                  "fig6a (2x4 QPSK N4K3, LTE-EPA channel). Presets use the "
                  "desk-scale FFT size 128; explicit flags override.")
      ->check(CLI::IsMember({"fig3a", "fig4a", "fig5", "fig6a"}));
  refs.scheme = cmd->add_option("--scheme", f.scheme,
                                "mimo-ofdm-im | vblast | alamouti");
  refs.detector =
      cmd->add_option("--detector", f.detector,
                      "ml | near_ml | mmse_simple | mmse_llr | mmse_llr_osic "
                      "| vblast_ml | vblast_mmse | vblast_mmse_osic | "
                      "alamouti");
  refs.n_tx = cmd->add_option("--t", f.n_tx, "Transmit antennas");
  refs.n_rx = cmd->add_option("--r", f.n_rx, "Receive antennas");
  refs.subblock_n = cmd->add_option("--n", f.subblock_n, "Subblock length");
  refs.subblock_k =
      cmd->add_option("--k", f.subblock_k, "Active subcarriers per subblock");
  refs.mod = cmd->add_option("--mod", f.mod,
                             "bpsk | qpsk | qam8 | qam16 | qam64");
  refs.index_mode = cmd->add_option("--index-mode", f.index_mode,
                                    "table | combinatorial");
  refs.nfft = cmd->add_option("--nfft", f.nfft, "FFT size (power of two)");
  refs.cp = cmd->add_option("--cp", f.cp, "Cyclic prefix length");
  refs.channel = cmd->add_option("--channel", f.channel, "uniform | epa");
  refs.taps = cmd->add_option("--taps", f.taps, "Channel taps (uniform)");
  refs.csi_q = cmd->add_option(
      "--csi-q", f.csi_q,
      "CSI quality Q (error variance N0F/Q); omit or <=0 for perfect CSI");
  refs.snr = cmd->add_option("--snr", f.snr,
                             "SNR grid in dB: start:step:stop or a,b,c");
  return refs;
}

void apply_preset(const std::string& name, CliFlags& f,
                  const OptionRefs& refs) {
  if (name.empty()) return;
  struct Values {
    std::string scheme, detector, mod, index_mode, channel, snr;
    int t, r, n, k, taps;
  } v;
  if (name == "fig3a")
    v = {"mimo-ofdm-im", "ml", "bpsk", "table", "uniform", "0:4:28",
         2, 2, 4, 2, 10};
  else if (name == "fig4a")
    v = {"mimo-ofdm-im", "mmse_llr", "qpsk", "table", "uniform", "0:5:40",
         2, 2, 4, 3, 10};
  else if (name == "fig5")
    v = {"mimo-ofdm-im", "mmse_llr", "qam8", "combinatorial", "uniform",
         "0:5:35", 4, 4, 16, 13, 10};
  else if (name == "fig6a")
    v = {"mimo-ofdm-im", "mmse_llr", "qpsk", "table", "epa", "0:5:30",
         2, 4, 4, 3, 4};
  else
    throw ConfigError("unknown preset '" + name + "'");

  if (!*refs.scheme) f.scheme = v.scheme;
  if (!*refs.detector) f.detector = v.detector;
  if (!*refs.mod) f.mod = v.mod;
  if (!*refs.index_mode) f.index_mode = v.index_mode;
  if (!*refs.channel) f.channel = v.channel;
  if (!*refs.snr) f.snr = v.snr;
  if (!*refs.n_tx) f.n_tx = v.t;
  if (!*refs.n_rx) f.n_rx = v.r;
  if (!*refs.subblock_n) f.subblock_n = v.n;
  if (!*refs.subblock_k) f.subblock_k = v.k;
  if (!*refs.taps) f.taps = v.taps;
  if (!*refs.nfft) f.nfft = 128;  // desk scale
}

SystemConfig make_config(const CliFlags& f, const OptionRefs& refs) {
  CliFlags resolved = f;
  apply_preset(f.preset, resolved, refs);
  SystemConfig cfg;
  cfg.scheme = scheme_from_string(resolved.scheme);
  cfg.detector = detector_from_string(resolved.detector);
  cfg.n_tx = resolved.n_tx;
  cfg.n_rx = resolved.n_rx;
  cfg.subblock_n = resolved.subblock_n;
  cfg.subblock_k = resolved.subblock_k;
  cfg.modulation = modulation_from_string(resolved.mod);
  cfg.index_mode = index_mode_from_string(resolved.index_mode);
  cfg.nfft = resolved.nfft;
  cfg.cp_len = resolved.cp;
  cfg.channel_profile = channel_profile_from_string(resolved.channel);
  cfg.taps = cfg.channel_profile == ChannelProfile::Epa ? 4 : resolved.taps;
  cfg.csi_q = resolved.csi_q > 0.0
                  ? resolved.csi_q
                  : std::numeric_limits<double>::infinity();
  cfg.validate();
  return cfg;
}

std::vector<double> make_grid(const CliFlags& f, const OptionRefs& refs) {
  CliFlags resolved = f;
  apply_preset(f.preset, resolved, refs);
  return parse_snr_grid(resolved.snr);
}

int cmd_simulate(const CliFlags& f, const OptionRefs& refs) {
  SystemConfig cfg = make_config(f, refs);
  auto grid = make_grid(f, refs);
  RunOptions opt;
  opt.stop.min_bit_errors = f.min_errors;
  opt.stop.max_frames = f.max_frames;
  opt.seed = f.seed;
  opt.workers = f.workers;
  if (f.path == "time")
    opt.path = ChannelPath::TimeDomain;
  else if (f.path != "freq")
    throw ConfigError("bad --path (expected freq|time)");
  if (f.theory == "ml-union")
    opt.theory = TheoryAttach::MlUnion;
  else if (f.theory == "mmse-bound")
    opt.theory = TheoryAttach::MmseBound;
  else if (f.theory == "mmse-semi")
    opt.theory = TheoryAttach::MmseSemiAnalytic;
  else if (f.theory != "none")
    throw ConfigError("bad --theory (none|ml-union|mmse-bound|mmse-semi)");
  opt.theory_v_samples = f.samples;

  std::fprintf(stderr,
               "simulate: %s/%s %dx%d N=%d K=%d %s, %.2f bits/s/Hz, "
               "kernels=%s\n",
               scheme_name(cfg.scheme), detector_name(cfg.detector), cfg.n_tx,
               cfg.n_rx, cfg.eff_n(), cfg.eff_k(),
               modulation_name(cfg.modulation), cfg.spectral_efficiency(),
               kernels::impl_name());
  CampaignResult res = run_campaign(cfg, grid, opt);
  write_file_atomic(f.out, campaign_csv(res));
  if (res.theory)
    write_file_atomic(f.out + ".theory.csv", theory_csv(res));
  for (size_t i = 0; i < res.points.size(); ++i) {
    const auto& p = res.points[i];
    std::printf("snr %6.2f dB  frames %8llu  errors %8llu  ber %.4e  "
                "(%.1fs)\n",
                p.snr_db, static_cast<unsigned long long>(p.frames),
                static_cast<unsigned long long>(p.bit_errors), p.ber(),
                res.seconds_per_point[i]);
  }
  std::printf("wrote %s\n", f.out.c_str());
  return 0;
}

int cmd_bound(const CliFlags& f, const OptionRefs& refs) {
  SystemConfig cfg = make_config(f, refs);
  auto grid = make_grid(f, refs);
  AbepCurve curve;
  if (f.estimator == "ml-union") {
    curve = abep_ml_union(cfg, grid);
  } else if (f.estimator == "mmse-bound") {
    curve = abep_mmse(cfg, MmseUpepEstimator::Bound, grid);
  } else if (f.estimator == "mmse-semi") {
    curve = abep_mmse(cfg, MmseUpepEstimator::SemiAnalytic, grid, f.samples,
                      f.seed);
  } else {
    throw ConfigError("bad --estimator (ml-union|mmse-bound|mmse-semi)");
  }
  std::string out = "snr_db,abep\n";
  char buf[128];
  for (size_t i = 0; i < curve.snr_db.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.4f,%.10e\n", curve.snr_db[i],
                  curve.abep[i]);
    out += buf;
  }
  write_file_atomic(f.out, out);
  std::printf("%s", out.c_str());
  std::fprintf(stderr, "%zu realizations, %zu ordered pairs; wrote %s\n",
               curve.realizations, curve.ordered_pairs, f.out.c_str());
  return 0;
}

int cmd_info(const CliFlags& f, const OptionRefs& refs) {
  SystemConfig cfg = make_config(f, refs);
  std::printf("scheme              %s\n", scheme_name(cfg.scheme));
  std::printf("antennas            %d x %d\n", cfg.n_tx, cfg.n_rx);
  std::printf("modulation          %s (M=%d)\n",
              modulation_name(cfg.modulation), 1 << cfg.bits_per_symbol());
  std::printf("subblock            N=%d K=%d, %s index mode\n", cfg.eff_n(),
              cfg.eff_k(), index_mode_name(cfg.eff_index_mode()));
  std::printf("bits per subblock   p = p1 + p2 = %d + %d = %d\n", cfg.p1(),
              cfg.p2(), cfg.p());
  std::printf("subblocks per block G = %d\n", cfg.groups());
  std::printf("bits per branch     m = %llu\n",
              static_cast<unsigned long long>(cfg.bits_per_branch()));
  std::printf("energy per bit      %.6f\n", cfg.energy_per_bit());
  std::printf("spectral efficiency %.2f bits/s/Hz  (%.6f, m T / (N_F + C_p))\n",
              cfg.spectral_efficiency(), cfg.spectral_efficiency());
  if (cfg.scheme == Scheme::MimoOfdmIm)
    std::printf("  tabulated variant %.6f bits/s/Hz  "
                "[N T (p1 + K log2 M) / (K (N_F + C_p))]\n",
                tabulated_im_spectral_efficiency(cfg));
  std::printf("decoding cost (complex multiplications per subcarrier):\n");
  const std::vector<DetectorKind> dets =
      cfg.scheme == Scheme::Vblast
          ? std::vector<DetectorKind>{DetectorKind::VblastMl,
                                      DetectorKind::VblastMmse,
                                      DetectorKind::VblastMmseOsic}
      : cfg.scheme == Scheme::Alamouti
          ? std::vector<DetectorKind>{DetectorKind::Alamouti}
          : std::vector<DetectorKind>{
                DetectorKind::Ml, DetectorKind::NearMl,
                DetectorKind::MmseSimple, DetectorKind::MmseLlr,
                DetectorKind::MmseLlrOsic};
  for (auto d : dets)
    std::printf("  %-18s %.6g\n", detector_name(d), complexity_cm(cfg, d));
  return 0;
}

int cmd_codec_test(const CliFlags& f, const OptionRefs& refs) {
  SystemConfig cfg = make_config(f, refs);
  IndexCodec codec(cfg.eff_n(), cfg.eff_k(), cfg.eff_index_mode());
  Constellation cst = Constellation::make(cfg.modulation);
  const int p = cfg.p();
  uint64_t failures = 0;
  uint64_t total = 0;
  auto check_word = [&](std::span<const uint8_t> bits) {
    auto sb = subblock_encode(bits, codec, cst);
    int nonzero = 0;
    for (auto v : sb) nonzero += v != cplx{0, 0};
    bool ok = nonzero == cfg.eff_k() &&
              std::ranges::equal(subblock_decode(sb, codec, cst), bits);
    failures += !ok;
    ++total;
  };
  if (p <= 16) {
    for (uint64_t w = 0; w < (1ull << p); ++w)
      check_word(word_to_bits(w, p));
  } else {
    Rng rng(f.seed);
    std::vector<uint8_t> bits(static_cast<size_t>(p));
    for (int rep = 0; rep < 10000; ++rep) {
      rng.fill_bits(bits.data(), bits.size());
      check_word(bits);
    }
  }
  std::printf("codec-test: %llu round trips, %llu failures\n",
              static_cast<unsigned long long>(total),
              static_cast<unsigned long long>(failures));
  return failures == 0 ? 0 : 1;
}

int cmd_selftest() {
  int failures = 0;
  auto report = [&](const char* name, bool ok) {
    std::printf("[%s] %s\n", ok ? "PASS" : "FAIL", name);
    failures += !ok;
  };

  {
    bool ok = true;
#if IMSIM_HAVE_AVX2
    if (__builtin_cpu_supports("avx2")) {
      Rng rng(1);
      for (int rep = 0; rep < 100 && ok; ++rep) {
        size_t n_pos = 1 + rng.next_u64() % 8;
        size_t stride = 1 + rng.next_u64() % 9;
        size_t count = 1 + rng.next_u64() % 200;
        std::vector<double> table(n_pos * stride);
        for (auto& v : table) v = rng.uniform() - 0.5;
        std::vector<int32_t> opts(n_pos * count);
        for (auto& o : opts)
          o = static_cast<int32_t>(rng.next_u64() % stride);
        for (bool maximize : {false, true}) {
          auto a = kernels::scan_best_scalar(table.data(), stride,
                                             opts.data(), n_pos, count,
                                             maximize);
          auto b = kernels::scan_best_avx2(table.data(), stride, opts.data(),
                                           n_pos, count, maximize);
          ok = ok && a.index == b.index && a.score == b.score;
        }
      }
    }
#endif
    report("kernel variants agree (scalar vs avx2)", ok);
  }

  {
    IndexCodec codec(4, 2, IndexMode::Table);
    Constellation cst = Constellation::make(Modulation::Qpsk);
    auto cb = SubblockCodebook::build(codec, cst);
    Rng rng(2);
    bool ok = true;
    for (int rep = 0; rep < 200 && ok; ++rep) {
      SubblockObservation obs;
      obs.n0f = 0.4;
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
          obs.y[static_cast<size_t>(n)](r) += rng.cnormal(0.4);
      ok = ml_detect(obs, cb).bits == ml_detect_reference(obs, cb).bits;
    }
    report("joint ML scan matches the per-branch reference form", ok);
  }

  {
    SystemConfig cfg;
    cfg.nfft = 64;
    cfg.cp_len = 16;
    RunOptions opt;
    opt.stop.max_frames = 50;
    opt.stop.min_bit_errors = 1ull << 62;
    opt.seed = 3;
    auto freq = run_point(cfg, 8.0, opt);
    opt.path = ChannelPath::TimeDomain;
    auto time = run_point(cfg, 8.0, opt);
    report("frequency and time-domain paths count identical errors",
           freq.bit_errors == time.bit_errors && freq.bits == time.bits);
  }

  {
    std::vector<double> d = {1.3, 0.0};
    double g = 1.3 / (4.0 * 0.05);
    double closed = 0.5 * (1.0 - std::sqrt(g / (1.0 + g)));
    report("pairwise-error quadrature matches the closed form",
           std::abs(upep_ml(d, 0.05, 1) - closed) < 1e-8);
  }

  {
    IndexCodec codec(8, 4, IndexMode::Combinatorial);
    Constellation cst = Constellation::make(Modulation::Qpsk);
    bool ok = true;
    const int p = codec.index_bits() + 4 * cst.bits_per_symbol();
    for (uint64_t w = 0; w < (1ull << p) && ok; ++w) {
      auto bits = word_to_bits(w, p);
      ok = std::ranges::equal(
          subblock_decode(subblock_encode(bits, codec, cst), codec, cst),
          bits);
    }
    report("codec round trips (N=8 K=4 QPSK, exhaustive)", ok);
  }

  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MIMO-OFDM index-modulation link-level simulator"};
  app.require_subcommand(1);

  CliFlags f;
  auto* sim = app.add_subcommand("simulate", "Run a Monte Carlo BER sweep");
  auto sim_refs = add_config_flags(sim, f);
  sim->add_option("--seed", f.seed, "RNG seed")->envname("IMSIM_SEED");
  sim->add_option("--min-errors", f.min_errors,
                  "Stop a point after this many bit errors");
  sim->add_option("--max-frames", f.max_frames, "Frame cap per point");
  sim->add_option("--workers", f.workers, "Worker threads (0 = hardware)")
      ->envname("IMSIM_WORKERS");
  sim->add_option("--out", f.out, "Output CSV path")->envname("IMSIM_OUT");
  sim->add_option("--theory", f.theory,
                  "Attach an analytical curve: none | ml-union | mmse-bound "
                  "| mmse-semi");
  sim->add_option("--samples", f.samples,
                  "Monte Carlo samples for the semi-analytical curve");
  sim->add_option("--path", f.path,
                  "Channel simulation path: freq | time (validation)");
  sim->set_config("--config", "", "key=value configuration file");

  auto* bnd = app.add_subcommand("bound", "Evaluate analytical ABEP curves");
  auto bnd_refs = add_config_flags(bnd, f);
  bnd->add_option("--estimator", f.estimator,
                  "ml-union | mmse-bound | mmse-semi");
  bnd->add_option("--samples", f.samples, "Samples for mmse-semi");
  bnd->add_option("--seed", f.seed, "RNG seed")->envname("IMSIM_SEED");
  bnd->add_option("--out", f.out, "Output CSV path")->envname("IMSIM_OUT");
  bnd->set_config("--config", "", "key=value configuration file");

  auto* inf = app.add_subcommand(
      "info", "Print derived parameters, spectral efficiency and "
              "decoding-cost formulas");
  auto inf_refs = add_config_flags(inf, f);

  auto* cod = app.add_subcommand("codec-test",
                                 "Exhaustive/random codec round trips");
  auto cod_refs = add_config_flags(cod, f);
  cod->add_option("--seed", f.seed, "RNG seed for sampled round trips");

  auto* self = app.add_subcommand("selftest", "Run oracle equivalence checks");

  try {
    app.parse(argc, argv);
    if (*sim) return cmd_simulate(f, sim_refs);
    if (*bnd) return cmd_bound(f, bnd_refs);
    if (*inf) return cmd_info(f, inf_refs);
    if (*cod) return cmd_codec_test(f, cod_refs);
    if (*self) return cmd_selftest();
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
