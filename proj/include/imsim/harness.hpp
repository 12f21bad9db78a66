#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "imsim/config.hpp"
#include "imsim/theory.hpp"

namespace imsim {

struct StopRule {
  uint64_t min_bit_errors = 200;
  uint64_t max_frames = 100000;
};

// The frequency-domain path simulates the per-subcarrier input-output model
// directly; the time-domain path runs IDFT + CP + tap convolution and is kept
// as a validation oracle (both consume identical random draws and agree
// sample-for-sample when the prefix covers the channel memory).
enum class ChannelPath { Frequency, TimeDomain };

enum class TheoryAttach { None, MlUnion, MmseBound, MmseSemiAnalytic };

struct RunOptions {
  StopRule stop;
  uint64_t seed = 1;
  int workers = 0;  // 0 = hardware concurrency
  ChannelPath path = ChannelPath::Frequency;
  TheoryAttach theory = TheoryAttach::None;
  size_t theory_v_samples = 100000;
};

struct BerPoint {
  double snr_db = 0.0;
  uint64_t frames = 0;
  uint64_t bits = 0;
  uint64_t bit_errors = 0;
  uint64_t index_bit_errors = 0;
  uint64_t symbol_bit_errors = 0;
  uint64_t illegal_pattern_events = 0;
  double ber() const {
    return bits ? static_cast<double>(bit_errors) / static_cast<double>(bits)
                : 0.0;
  }
};

BerPoint run_point(const SystemConfig& config, double snr_db,
                   const RunOptions& opt);

struct CampaignResult {
  SystemConfig config;
  uint64_t seed = 1;
  std::vector<BerPoint> points;
  std::vector<double> seconds_per_point;
  std::optional<AbepCurve> theory;
};

CampaignResult run_campaign(const SystemConfig& config,
                            std::span<const double> snr_grid,
                            const RunOptions& opt);

// "start:step:stop" (inclusive), a comma list, or a single value.
std::vector<double> parse_snr_grid(const std::string& text);

std::string campaign_csv(const CampaignResult& result);
std::string theory_csv(const CampaignResult& result);

// Atomic write (temp file + rename).
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace imsim
