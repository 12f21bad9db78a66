#include "imsim/config.hpp"

#include <cmath>

namespace imsim {

Scheme scheme_from_string(const std::string& name) {
  if (name == "mimo-ofdm-im") return Scheme::MimoOfdmIm;
  if (name == "vblast") return Scheme::Vblast;
  if (name == "alamouti") return Scheme::Alamouti;
  throw ConfigError("unknown scheme '" + name +
                    "' (expected mimo-ofdm-im|vblast|alamouti)");
}

const char* scheme_name(Scheme s) {
  switch (s) {
    case Scheme::MimoOfdmIm: return "mimo-ofdm-im";
    case Scheme::Vblast: return "vblast";
    case Scheme::Alamouti: return "alamouti";
  }
  return "?";
}

DetectorKind detector_from_string(const std::string& name) {
  if (name == "ml") return DetectorKind::Ml;
  if (name == "near_ml") return DetectorKind::NearMl;
  if (name == "mmse_simple") return DetectorKind::MmseSimple;
  if (name == "mmse_llr") return DetectorKind::MmseLlr;
  if (name == "mmse_llr_osic") return DetectorKind::MmseLlrOsic;
  if (name == "vblast_ml") return DetectorKind::VblastMl;
  if (name == "vblast_mmse") return DetectorKind::VblastMmse;
  if (name == "vblast_mmse_osic") return DetectorKind::VblastMmseOsic;
  if (name == "alamouti") return DetectorKind::Alamouti;
  throw ConfigError("unknown detector '" + name + "'");
}

const char* detector_name(DetectorKind d) {
  switch (d) {
    case DetectorKind::Ml: return "ml";
    case DetectorKind::NearMl: return "near_ml";
    case DetectorKind::MmseSimple: return "mmse_simple";
    case DetectorKind::MmseLlr: return "mmse_llr";
    case DetectorKind::MmseLlrOsic: return "mmse_llr_osic";
    case DetectorKind::VblastMl: return "vblast_ml";
    case DetectorKind::VblastMmse: return "vblast_mmse";
    case DetectorKind::VblastMmseOsic: return "vblast_mmse_osic";
    case DetectorKind::Alamouti: return "alamouti";
  }
  return "?";
}

ChannelProfile channel_profile_from_string(const std::string& name) {
  if (name == "uniform") return ChannelProfile::Uniform;
  if (name == "epa") return ChannelProfile::Epa;
  throw ConfigError("unknown channel profile '" + name +
                    "' (expected uniform|epa)");
}

const char* channel_profile_name(ChannelProfile p) {
  return p == ChannelProfile::Uniform ? "uniform" : "epa";
}

namespace {

bool detector_matches_scheme(Scheme s, DetectorKind d) {
  switch (s) {
    case Scheme::MimoOfdmIm:
      return d == DetectorKind::Ml || d == DetectorKind::NearMl ||
             d == DetectorKind::MmseSimple || d == DetectorKind::MmseLlr ||
             d == DetectorKind::MmseLlrOsic;
    case Scheme::Vblast:
      return d == DetectorKind::VblastMl || d == DetectorKind::VblastMmse ||
             d == DetectorKind::VblastMmseOsic;
    case Scheme::Alamouti:
      return d == DetectorKind::Alamouti;
  }
  return false;
}

}  // namespace

void SystemConfig::validate() const {
  const int m = 1 << bits_per_symbol();
  if (m != 2 && m != 4 && m != 8 && m != 16 && m != 64)
    throw ConfigError("modulation order must be in {2,4,8,16,64}");
  if (n_tx < 1 || n_rx < 1) throw ConfigError("antenna counts must be >= 1");
  if (nfft < 2 || (nfft & (nfft - 1)) != 0)
    throw ConfigError("nfft must be a power of two");
  if (cp_len < 0 || cp_len >= nfft) throw ConfigError("bad cyclic prefix");
  if (scheme == Scheme::MimoOfdmIm) {
    if (subblock_k < 1 || subblock_k > subblock_n)
      throw ConfigError("need 1 <= K <= N");
    if (nfft % subblock_n != 0)
      throw ConfigError("subblock size must divide nfft");
    // Constructor rejects table mode outside (4,2)/(4,3).
    IndexCodec probe(subblock_n, subblock_k, index_mode);
  }
  if (scheme == Scheme::Alamouti && n_tx != 2)
    throw ConfigError("alamouti requires exactly 2 transmit antennas");
  if (!detector_matches_scheme(scheme, detector))
    throw ConfigError(std::string("detector '") + detector_name(detector) +
                      "' does not apply to scheme '" + scheme_name(scheme) +
                      "'");
  int l = taps;
  if (channel_profile == ChannelProfile::Epa && l != 4)
    throw ConfigError("epa profile fixes the channel at 4 taps");
  if (l < 1) throw ConfigError("need at least one channel tap");
  if (cp_len < l)
    throw ConfigError("cyclic prefix must cover the channel memory");
  if (!(csi_q > 0.0))  // infinity allowed
    throw ConfigError("csi_q must be positive (or infinite for perfect CSI)");
}

int SystemConfig::eff_n() const {
  return scheme == Scheme::MimoOfdmIm ? subblock_n : 1;
}

int SystemConfig::eff_k() const {
  return scheme == Scheme::MimoOfdmIm ? subblock_k : 1;
}

IndexMode SystemConfig::eff_index_mode() const {
  return scheme == Scheme::MimoOfdmIm ? index_mode : IndexMode::Combinatorial;
}

int SystemConfig::bits_per_symbol() const {
  switch (modulation) {
    case Modulation::Bpsk: return 1;
    case Modulation::Qpsk: return 2;
    case Modulation::Qam8: return 3;
    case Modulation::Qam16: return 4;
    case Modulation::Qam64: return 6;
  }
  return 0;
}

int SystemConfig::p1() const { return int_log2(binomial(eff_n(), eff_k())); }

int SystemConfig::p2() const { return eff_k() * bits_per_symbol(); }

uint64_t SystemConfig::bits_per_branch() const {
  if (scheme == Scheme::Alamouti)
    return static_cast<uint64_t>(nfft) * bits_per_symbol();
  return static_cast<uint64_t>(groups()) * p();
}

uint64_t SystemConfig::bits_per_frame() const {
  if (scheme == Scheme::Alamouti)
    return 2ull * static_cast<uint64_t>(nfft) * bits_per_symbol();
  return bits_per_branch() * static_cast<uint64_t>(n_tx);
}

double SystemConfig::sigma_x2() const {
  return static_cast<double>(eff_k()) / static_cast<double>(eff_n());
}

double SystemConfig::energy_per_bit() const {
  // Each antenna transmits N_F + C_p unit-energy samples per OFDM symbol;
  // the Alamouti code block spans two OFDM symbols on two antennas.
  double frame_energy = static_cast<double>(nfft + cp_len) * n_tx *
                        (scheme == Scheme::Alamouti ? 2.0 : 1.0);
  return frame_energy / static_cast<double>(bits_per_frame());
}

double SystemConfig::spectral_efficiency() const {
  double symbols = scheme == Scheme::Alamouti ? 2.0 : 1.0;
  return static_cast<double>(bits_per_frame()) /
         (symbols * static_cast<double>(nfft + cp_len));
}

}  // namespace imsim
