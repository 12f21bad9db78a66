#include "imsim/harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "imsim/channel.hpp"
#include "imsim/codebook.hpp"
#include "imsim/detect.hpp"
#include "imsim/frame.hpp"
#include "imsim/kernels.hpp"
#include "imsim/rng.hpp"

namespace imsim {

namespace {

constexpr uint64_t kFramesPerBatch = 64;

struct FrameCounts {
  uint64_t bits = 0;
  uint64_t bit_errors = 0;
  uint64_t index_bit_errors = 0;
  uint64_t symbol_bit_errors = 0;
  uint64_t illegal_pattern_events = 0;

  FrameCounts& operator+=(const FrameCounts& o) {
    bits += o.bits;
    bit_errors += o.bit_errors;
    index_bit_errors += o.index_bit_errors;
    symbol_bit_errors += o.symbol_bit_errors;
    illegal_pattern_events += o.illegal_pattern_events;
    return *this;
  }
};

bool detector_needs_codebook(DetectorKind d) {
  return d == DetectorKind::Ml || d == DetectorKind::NearMl ||
         d == DetectorKind::MmseSimple || d == DetectorKind::VblastMl ||
         d == DetectorKind::VblastMmse;
}

// Everything shared read-only by the workers of one SNR point.
struct SimContext {
  SystemConfig cfg;
  Constellation cst;
  IndexCodec codec;
  std::optional<SubblockCodebook> cb;
  NoiseLevels noise;
  ChannelPath path;
  std::vector<cplx> twiddle;  // e^{-j 2 pi f l / N_F}, [l * nfft + f]

  SimContext(const SystemConfig& config, double snr_db, ChannelPath p)
      : cfg(config),
        cst(Constellation::make(config.modulation)),
        codec(config.eff_n(), config.eff_k(), config.eff_index_mode()),
        noise(snr_to_noise(snr_db, config)),
        path(p) {
    if (detector_needs_codebook(cfg.detector))
      cb = SubblockCodebook::build(codec, cst);
    twiddle.resize(static_cast<size_t>(cfg.taps) * cfg.nfft);
    for (int l = 0; l < cfg.taps; ++l)
      for (int f = 0; f < cfg.nfft; ++f) {
        double ang = -2.0 * kPi * f * l / static_cast<double>(cfg.nfft);
        twiddle[static_cast<size_t>(l) * cfg.nfft + f] =
            cplx{std::cos(ang), std::sin(ang)};
      }
  }
};

// Frequency responses from the already drawn taps via the twiddle table.
void fill_responses(const SimContext& ctx, ChannelRealization& ch) {
  const int nfft = ctx.cfg.nfft;
  for (auto& h : ch.freq) h.assign(static_cast<size_t>(nfft), cplx{0, 0});
  for (size_t pair = 0; pair < ch.taps.size(); ++pair) {
    const auto& g = ch.taps[pair];
    auto& h = ch.freq[pair];
    for (size_t l = 0; l < g.size(); ++l) {
      const cplx* tw = ctx.twiddle.data() + l * static_cast<size_t>(nfft);
      const cplx gl = g[l];
      for (int f = 0; f < nfft; ++f) h[static_cast<size_t>(f)] += gl * tw[f];
    }
  }
}

ChannelRealization draw_frame_channel(const SimContext& ctx, Rng& rng) {
  const auto& cfg = ctx.cfg;
  std::vector<double> powers;
  if (cfg.channel_profile == ChannelProfile::Uniform)
    powers.assign(static_cast<size_t>(cfg.taps), 1.0 / cfg.taps);
  else
    powers = epa_tap_powers();

  ChannelRealization ch;
  ch.n_tx = cfg.n_tx;
  ch.n_rx = cfg.n_rx;
  ch.nfft = cfg.nfft;
  ch.taps.resize(static_cast<size_t>(cfg.n_tx) * cfg.n_rx);
  ch.freq.resize(ch.taps.size());
  for (auto& g : ch.taps) {
    g.resize(static_cast<size_t>(cfg.taps));
    for (int l = 0; l < cfg.taps; ++l)
      g[static_cast<size_t>(l)] = rng.cnormal(powers[static_cast<size_t>(l)]);
  }
  fill_responses(ctx, ch);
  return ch;
}

DetectionResult run_detector(const SimContext& ctx,
                             const SubblockObservation& obs) {
  switch (ctx.cfg.detector) {
    case DetectorKind::Ml:
    case DetectorKind::VblastMl:
      return ml_detect(obs, *ctx.cb);
    case DetectorKind::NearMl:
      return near_ml_detect(obs, *ctx.cb);
    case DetectorKind::MmseSimple:
    case DetectorKind::VblastMmse:
      return mmse_simple_detect(mmse_filter(obs, ctx.cfg.sigma_x2()),
                                *ctx.cb);
    case DetectorKind::MmseLlr:
      return mmse_llr_detect(mmse_filter(obs, ctx.cfg.sigma_x2()), ctx.codec,
                             ctx.cst);
    case DetectorKind::MmseLlrOsic:
    case DetectorKind::VblastMmseOsic:
      return mmse_llr_osic_detect(obs, ctx.codec, ctx.cst,
                                  ctx.cfg.sigma_x2());
    default:
      throw ConfigError("detector not dispatchable on this scheme");
  }
}

// One index-modulation (or degenerate V-BLAST) frame: draw order is bits,
// taps, noise, CSI error, so perfect- and imperfect-CSI runs share every
// other draw.
FrameCounts simulate_im_frame(const SimContext& ctx, uint64_t seed,
                              uint64_t frame) {
  Rng rng = Rng::substream(seed, frame);
  const auto& cfg = ctx.cfg;
  const int n_tx = cfg.n_tx;
  const int n_rx = cfg.n_rx;
  const int n = cfg.eff_n();
  const int g_count = cfg.groups();
  const int p = cfg.p();
  const int p1 = cfg.p1();
  const uint64_t m_bits = cfg.bits_per_branch();
  const double n0f = ctx.noise.n0f;

  std::vector<std::vector<uint8_t>> tx_bits(static_cast<size_t>(n_tx));
  for (auto& b : tx_bits) {
    b.resize(m_bits);
    rng.fill_bits(b.data(), b.size());
  }

  // Per-branch blocks in subblock (deinterleaved) order.
  std::vector<std::vector<cplx>> x(static_cast<size_t>(n_tx));
  for (int t = 0; t < n_tx; ++t) {
    auto& xt = x[static_cast<size_t>(t)];
    xt.reserve(static_cast<size_t>(cfg.nfft));
    for (int g = 0; g < g_count; ++g) {
      auto sb = subblock_encode(
          std::span(tx_bits[static_cast<size_t>(t)])
              .subspan(static_cast<size_t>(g) * p, static_cast<size_t>(p)),
          ctx.codec, ctx.cst);
      xt.insert(xt.end(), sb.begin(), sb.end());
    }
  }

  ChannelRealization ch = draw_frame_channel(ctx, rng);

  // Noise drawn in the frequency domain, deinterleaved order.
  std::vector<std::vector<cplx>> w(static_cast<size_t>(n_rx));
  for (auto& wr : w) {
    wr.resize(static_cast<size_t>(cfg.nfft));
    for (auto& v : wr) v = rng.cnormal(n0f);
  }

  corrupt_csi(ch, cfg.csi_q, n0f, rng);

  // Received blocks in deinterleaved order.
  std::vector<std::vector<cplx>> y(static_cast<size_t>(n_rx));
  if (ctx.path == ChannelPath::Frequency) {
    for (int r = 0; r < n_rx; ++r) {
      auto& yr = y[static_cast<size_t>(r)];
      yr = w[static_cast<size_t>(r)];
      for (int t = 0; t < n_tx; ++t) {
        const auto& hrt = ch.response(r, t);
        const auto& xt = x[static_cast<size_t>(t)];
        for (int g = 0; g < g_count; ++g)
          for (int i = 0; i < n; ++i) {
            const size_t pos = static_cast<size_t>(g) * n + i;
            // Deinterleaved position (g,i) rides physical subcarrier i*G+g.
            yr[pos] += hrt[static_cast<size_t>(i) * g_count + g] * xt[pos];
          }
      }
    }
  } else {
    // Time-domain oracle path: same draws, explicit transmit chain.
    const double sx2 = cfg.sigma_x2();
    std::vector<std::vector<cplx>> tx_time(static_cast<size_t>(n_tx));
    for (int t = 0; t < n_tx; ++t)
      tx_time[static_cast<size_t>(t)] =
          ofdm_modulate(interleave(x[static_cast<size_t>(t)], n), cfg.cp_len,
                        sx2);
    const size_t frame_len = static_cast<size_t>(cfg.nfft + cfg.cp_len);
    for (int r = 0; r < n_rx; ++r) {
      std::vector<cplx> rx(frame_len, cplx{0, 0});
      for (int t = 0; t < n_tx; ++t) {
        const auto& g = ch.impulse(r, t);
        const auto& q = tx_time[static_cast<size_t>(t)];
        for (size_t i = 0; i < frame_len; ++i)
          for (size_t l = 0; l < g.size() && l <= i; ++l)
            rx[i] += g[l] * q[i - l];
      }
      // Receiver noise enters on the retained samples; the CP is discarded.
      std::vector<cplx> w_time =
          dft_unitary(interleave(w[static_cast<size_t>(r)], n), true);
      for (size_t i = 0; i < static_cast<size_t>(cfg.nfft); ++i)
        rx[static_cast<size_t>(cfg.cp_len) + i] +=
            w_time[i] / std::sqrt(sx2);
      y[static_cast<size_t>(r)] =
          deinterleave(ofdm_demodulate(rx, cfg.cp_len, sx2), n);
    }
  }

  FrameCounts counts;
  counts.bits = m_bits * static_cast<uint64_t>(n_tx);
  SubblockObservation obs;
  obs.n0f = n0f;
  obs.y.resize(static_cast<size_t>(n));
  obs.h.resize(static_cast<size_t>(n));
  for (int g = 0; g < g_count; ++g) {
    for (int i = 0; i < n; ++i) {
      auto& yv = obs.y[static_cast<size_t>(i)];
      yv.resize(n_rx);
      for (int r = 0; r < n_rx; ++r)
        yv(r) = y[static_cast<size_t>(r)][static_cast<size_t>(g) * n + i];
      obs.h[static_cast<size_t>(i)] = ch.sub_matrix(g, i, n, true);
    }
    DetectionResult det = run_detector(ctx, obs);
    counts.illegal_pattern_events += det.illegal_pattern_events;
    for (int t = 0; t < n_tx; ++t) {
      const uint8_t* sent = tx_bits[static_cast<size_t>(t)].data() +
                            static_cast<size_t>(g) * p;
      const uint8_t* got = det.bits[static_cast<size_t>(t)].data();
      uint64_t idx_err = kernels::hamming(sent, got, static_cast<size_t>(p1));
      uint64_t sym_err = kernels::hamming(sent + p1, got + p1,
                                          static_cast<size_t>(p - p1));
      counts.index_bit_errors += idx_err;
      counts.symbol_bit_errors += sym_err;
      counts.bit_errors += idx_err + sym_err;
    }
  }
  return counts;
}

// One Alamouti code block: two OFDM symbols over a common channel.
FrameCounts simulate_alamouti_frame(const SimContext& ctx, uint64_t seed,
                                    uint64_t frame) {
  if (ctx.path != ChannelPath::Frequency)
    throw ConfigError(
        "the time-domain validation path covers the subblock schemes only");
  Rng rng = Rng::substream(seed, frame);
  const auto& cfg = ctx.cfg;
  const int n_rx = cfg.n_rx;
  const int nfft = cfg.nfft;
  const int bps = ctx.cst.bits_per_symbol();
  const double n0f = ctx.noise.n0f;

  std::vector<uint8_t> bits(cfg.bits_per_frame());
  rng.fill_bits(bits.data(), bits.size());
  std::vector<cplx> sym = map_symbols(bits, ctx.cst);

  ChannelRealization ch = draw_frame_channel(ctx, rng);

  std::vector<std::vector<cplx>> w(2ull * n_rx);
  for (auto& wr : w) {
    wr.resize(static_cast<size_t>(nfft));
    for (auto& v : wr) v = rng.cnormal(n0f);
  }

  corrupt_csi(ch, cfg.csi_q, n0f, rng);

  FrameCounts counts;
  counts.bits = bits.size();
  Eigen::VectorXcd y1(n_rx), y2(n_rx);
  std::vector<uint8_t> got(static_cast<size_t>(2 * bps));
  for (int f = 0; f < nfft; ++f) {
    const cplx s1 = sym[static_cast<size_t>(2 * f)];
    const cplx s2 = sym[static_cast<size_t>(2 * f) + 1];
    for (int r = 0; r < n_rx; ++r) {
      const cplx h1 = ch.response(r, 0)[static_cast<size_t>(f)];
      const cplx h2 = ch.response(r, 1)[static_cast<size_t>(f)];
      y1(r) = h1 * s1 + h2 * s2 +
              w[static_cast<size_t>(r)][static_cast<size_t>(f)];
      y2(r) = -h1 * std::conj(s2) + h2 * std::conj(s1) +
              w[static_cast<size_t>(n_rx + r)][static_cast<size_t>(f)];
    }
    AlamoutiDecision d =
        alamouti_detect(y1, y2, ch.sub_matrix(f, 0, 1, true), ctx.cst);
    word_to_bits(static_cast<uint64_t>(d.label1), bps, got.data());
    word_to_bits(static_cast<uint64_t>(d.label2), bps, got.data() + bps);
    counts.symbol_bit_errors += kernels::hamming(
        bits.data() + static_cast<size_t>(2 * f) * bps, got.data(),
        static_cast<size_t>(2 * bps));
  }
  counts.bit_errors = counts.symbol_bit_errors;
  return counts;
}

FrameCounts simulate_frame(const SimContext& ctx, uint64_t seed,
                           uint64_t frame) {
  return ctx.cfg.scheme == Scheme::Alamouti
             ? simulate_alamouti_frame(ctx, seed, frame)
             : simulate_im_frame(ctx, seed, frame);
}

}  // namespace

BerPoint run_point(const SystemConfig& config, double snr_db,
                   const RunOptions& opt) {
  config.validate();
  const SimContext ctx(config, snr_db, opt.path);
  int workers = opt.workers > 0
                    ? opt.workers
                    : static_cast<int>(std::thread::hardware_concurrency());
  if (workers < 1) workers = 1;

  BerPoint point;
  point.snr_db = snr_db;
  uint64_t frame = 0;
  // Frames are consumed in fixed-size batches with a stop check in between;
  // only the contiguous split of a batch depends on the worker count, so
  // totals do not.
  while (frame < opt.stop.max_frames &&
         point.bit_errors < opt.stop.min_bit_errors) {
    const uint64_t batch =
        std::min(kFramesPerBatch, opt.stop.max_frames - frame);
    const int nthreads =
        static_cast<int>(std::min<uint64_t>(batch, workers));
    std::vector<FrameCounts> partial(static_cast<size_t>(nthreads));
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(nthreads));
    for (int j = 0; j < nthreads; ++j) {
      const uint64_t lo = frame + batch * j / nthreads;
      const uint64_t hi = frame + batch * (j + 1) / nthreads;
      pool.emplace_back([&, j, lo, hi] {
        FrameCounts acc;
        for (uint64_t i = lo; i < hi; ++i)
          acc += simulate_frame(ctx, opt.seed, i);
        partial[static_cast<size_t>(j)] = acc;
      });
    }
    for (auto& th : pool) th.join();
    for (const auto& acc : partial) {
      point.bits += acc.bits;
      point.bit_errors += acc.bit_errors;
      point.index_bit_errors += acc.index_bit_errors;
      point.symbol_bit_errors += acc.symbol_bit_errors;
      point.illegal_pattern_events += acc.illegal_pattern_events;
    }
    frame += batch;
  }
  point.frames = frame;
  return point;
}

CampaignResult run_campaign(const SystemConfig& config,
                            std::span<const double> snr_grid,
                            const RunOptions& opt) {
  if (snr_grid.empty()) throw ConfigError("empty SNR grid");
  config.validate();
  CampaignResult result;
  result.config = config;
  result.seed = opt.seed;
  std::vector<double> grid(snr_grid.begin(), snr_grid.end());
  std::sort(grid.begin(), grid.end());
  for (double snr : grid) {
    auto t0 = std::chrono::steady_clock::now();
    result.points.push_back(run_point(config, snr, opt));
    result.seconds_per_point.push_back(
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count());
  }
  switch (opt.theory) {
    case TheoryAttach::None:
      break;
    case TheoryAttach::MlUnion:
      result.theory = abep_ml_union(config, grid);
      break;
    case TheoryAttach::MmseBound:
      result.theory = abep_mmse(config, MmseUpepEstimator::Bound, grid);
      break;
    case TheoryAttach::MmseSemiAnalytic:
      result.theory = abep_mmse(config, MmseUpepEstimator::SemiAnalytic, grid,
                                opt.theory_v_samples, opt.seed);
      break;
  }
  return result;
}

std::vector<double> parse_snr_grid(const std::string& text) {
  std::vector<double> grid;
  if (text.find(':') != std::string::npos) {
    double start = 0, step = 0, stop = 0;
    if (std::sscanf(text.c_str(), "%lf:%lf:%lf", &start, &step, &stop) != 3 ||
        step <= 0.0 || stop < start)
      throw ConfigError("bad SNR range '" + text +
                        "' (expected start:step:stop)");
    for (double v = start; v <= stop + 1e-9; v += step) grid.push_back(v);
    return grid;
  }
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) grid.push_back(std::stod(item));
  if (grid.empty()) throw ConfigError("empty SNR grid '" + text + "'");
  return grid;
}

namespace {

void append_config_header(std::string& out, const CampaignResult& r) {
  char buf[256];
  const auto& c = r.config;
  out += "# imsim results\n";
  std::snprintf(buf, sizeof buf,
                "# scheme=%s detector=%s t=%d r=%d nfft=%d cp=%d\n",
                scheme_name(c.scheme), detector_name(c.detector), c.n_tx,
                c.n_rx, c.nfft, c.cp_len);
  out += buf;
  std::snprintf(buf, sizeof buf,
                "# n=%d k=%d mod=%s index_mode=%s channel=%s taps=%d\n",
                c.eff_n(), c.eff_k(), modulation_name(c.modulation),
                index_mode_name(c.eff_index_mode()),
                channel_profile_name(c.channel_profile), c.taps);
  out += buf;
  if (std::isinf(c.csi_q))
    std::snprintf(buf, sizeof buf, "# csi_q=inf seed=%llu\n",
                  static_cast<unsigned long long>(r.seed));
  else
    std::snprintf(buf, sizeof buf, "# csi_q=%.6g seed=%llu\n", c.csi_q,
                  static_cast<unsigned long long>(r.seed));
  out += buf;
  std::snprintf(buf, sizeof buf,
                "# spectral_efficiency_bits_s_hz=%.6f bits_per_frame=%llu\n",
                c.spectral_efficiency(),
                static_cast<unsigned long long>(c.bits_per_frame()));
  out += buf;
}

}  // namespace

std::string campaign_csv(const CampaignResult& result) {
  std::string out;
  append_config_header(out, result);
  out += "snr_db,frames,bits,bit_errors,index_bit_errors,symbol_bit_errors,"
         "ber\n";
  char buf[256];
  for (const auto& p : result.points) {
    std::snprintf(buf, sizeof buf,
                  "%.4f,%llu,%llu,%llu,%llu,%llu,%.10e\n", p.snr_db,
                  static_cast<unsigned long long>(p.frames),
                  static_cast<unsigned long long>(p.bits),
                  static_cast<unsigned long long>(p.bit_errors),
                  static_cast<unsigned long long>(p.index_bit_errors),
                  static_cast<unsigned long long>(p.symbol_bit_errors),
                  p.ber());
    out += buf;
  }
  return out;
}

std::string theory_csv(const CampaignResult& result) {
  if (!result.theory) return {};
  std::string out;
  append_config_header(out, result);
  out += "snr_db,abep\n";
  char buf[128];
  for (size_t i = 0; i < result.theory->snr_db.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.4f,%.10e\n", result.theory->snr_db[i],
                  result.theory->abep[i]);
    out += buf;
  }
  return out;
}

void write_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open '" + tmp + "' for writing");
    f << content;
    if (!f.good())
      throw std::runtime_error("write failed for '" + tmp + "'");
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace imsim
