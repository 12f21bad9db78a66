#pragma once

#include <limits>
#include <string>

#include "imsim/common.hpp"
#include "imsim/constellation.hpp"
#include "imsim/index_codec.hpp"

namespace imsim {

enum class Scheme { MimoOfdmIm, Vblast, Alamouti };
enum class DetectorKind {
  Ml,
  NearMl,
  MmseSimple,
  MmseLlr,
  MmseLlrOsic,
  VblastMl,
  VblastMmse,
  VblastMmseOsic,
  Alamouti,
};
enum class ChannelProfile { Uniform, Epa };

Scheme scheme_from_string(const std::string& name);
const char* scheme_name(Scheme s);
DetectorKind detector_from_string(const std::string& name);
const char* detector_name(DetectorKind d);
ChannelProfile channel_profile_from_string(const std::string& name);
const char* channel_profile_name(ChannelProfile p);

// All link-level knobs. The V-BLAST baseline reuses the index-modulation
// chain with a degenerate one-subcarrier subblock (N = K = 1), which reduces
// it exactly to classical OFDM spatial multiplexing.
struct SystemConfig {
  Scheme scheme = Scheme::MimoOfdmIm;
  DetectorKind detector = DetectorKind::Ml;
  int n_tx = 2;
  int n_rx = 2;
  int nfft = 512;
  int cp_len = 36;
  int subblock_n = 4;
  int subblock_k = 2;
  Modulation modulation = Modulation::Bpsk;
  IndexMode index_mode = IndexMode::Table;
  ChannelProfile channel_profile = ChannelProfile::Uniform;
  int taps = 10;
  double csi_q = std::numeric_limits<double>::infinity();

  void validate() const;

  // Subblock geometry as simulated (baselines collapse to N = K = 1).
  int eff_n() const;
  int eff_k() const;
  IndexMode eff_index_mode() const;

  int bits_per_symbol() const;
  int p1() const;  // index-selection bits per subblock
  int p2() const;  // modulated bits per subblock
  int p() const { return p1() + p2(); }
  int groups() const { return nfft / eff_n(); }  // subblocks per OFDM block

  // Information bits per transmit branch per frame (m). For Alamouti the
  // frame is the two-symbol code block and the bits are carried jointly.
  uint64_t bits_per_branch() const;
  uint64_t bits_per_frame() const;

  double sigma_x2() const;  // mean per-subcarrier symbol energy, K/N

  // Average transmitted energy per information bit, counting every antenna's
  // unit-energy time-domain frame.
  double energy_per_bit() const;

  double spectral_efficiency() const;  // bits/s/Hz
};

}  // namespace imsim
