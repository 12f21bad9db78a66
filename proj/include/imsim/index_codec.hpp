#pragma once

#include <optional>
#include <span>
#include <vector>

#include "imsim/common.hpp"
#include "imsim/constellation.hpp"

namespace imsim {

enum class IndexMode { Table, Combinatorial };

IndexMode index_mode_from_string(const std::string& name);
const char* index_mode_name(IndexMode mode);

uint64_t binomial(int n, int k);

// Maps p1 index-selection bits to the set of K active subcarriers of an
// N-subcarrier subblock and back. Table mode uses the fixed reference tables
// for (N,K) = (4,2) and (4,3); combinatorial mode ranks K-combinations in the
// combinatorial number system and supports any (N,K).
//
// Subcarrier positions are 0-based throughout.
class IndexCodec {
 public:
  IndexCodec(int n, int k, IndexMode mode);

  int subblock_len() const { return n_; }
  int active_count() const { return k_; }
  IndexMode mode() const { return mode_; }
  int index_bits() const { return p1_; }          // p1 = floor(log2 C(N,K))
  uint64_t rows() const { return 1ull << p1_; }   // encodable patterns

  // Active positions for an index word (word < rows()).
  std::vector<int> pattern_encode(uint64_t word) const;

  // Exact inverse of pattern_encode; IllegalPatternError when the pattern is
  // not an encodable row (callers owning a fallback policy should use
  // pattern_rank instead).
  uint64_t pattern_decode(std::span<const int> pattern) const;

  // Rank of a legal K-combination in this mode's ordering. Table mode returns
  // nullopt for patterns outside the table; combinatorial mode always returns
  // the combinadic rank, which may be >= rows().
  std::optional<uint64_t> pattern_rank(std::span<const int> pattern) const;

  // Combinatorial number system, independent of mode (positions 0-based,
  // strictly increasing): rank = sum over k of C(pattern[k-1], k).
  uint64_t comb_rank(std::span<const int> pattern) const;
  std::vector<int> comb_unrank(uint64_t rank) const;

 private:
  int n_, k_, p1_;
  IndexMode mode_;
  std::vector<std::vector<int>> table_;  // table mode rows, by word value
};

// Full subblock map: p = p1 + K*log2(M) bits -> length-N vector with the K
// active entries carrying constellation symbols in increasing position order.
std::vector<cplx> subblock_encode(std::span<const uint8_t> bits,
                                  const IndexCodec& codec,
                                  const Constellation& c);

// Exact inverse; IllegalPatternError if the activation pattern is unmappable.
std::vector<uint8_t> subblock_decode(std::span<const cplx> subblock,
                                     const IndexCodec& codec,
                                     const Constellation& c);

}  // namespace imsim
