#include "imsim/index_codec.hpp"

#include <algorithm>

namespace imsim {

namespace {

// Reference activation tables for small subblocks (positions 0-based, row
// order = index word value).
const std::vector<std::vector<int>> kTable42 = {
    {0, 2}, {1, 3}, {0, 3}, {1, 2}};
const std::vector<std::vector<int>> kTable43 = {
    {0, 1, 2}, {0, 1, 3}, {0, 2, 3}, {1, 2, 3}};

}  // namespace

IndexMode index_mode_from_string(const std::string& name) {
  if (name == "table") return IndexMode::Table;
  if (name == "combinatorial" || name == "comb") return IndexMode::Combinatorial;
  throw ConfigError("unknown index mode '" + name +
                    "' (expected table|combinatorial)");
}

const char* index_mode_name(IndexMode mode) {
  return mode == IndexMode::Table ? "table" : "combinatorial";
}

uint64_t binomial(int n, int k) {
  if (k < 0 || k > n || n < 0) return 0;
  k = std::min(k, n - k);
  uint64_t c = 1;
  for (int i = 1; i <= k; ++i)
    c = c * static_cast<uint64_t>(n - k + i) / static_cast<uint64_t>(i);
  return c;
}

IndexCodec::IndexCodec(int n, int k, IndexMode mode)
    : n_(n), k_(k), mode_(mode) {
  if (n < 1 || n > 62 || k < 1 || k > n)
    throw ConfigError("index codec requires 1 <= K <= N <= 62");
  p1_ = int_log2(binomial(n, k));
  if (mode_ == IndexMode::Table) {
    if (n == 4 && k == 2) table_ = kTable42;
    else if (n == 4 && k == 3) table_ = kTable43;
    else
      throw ConfigError(
          "table index mode is only defined for (N,K)=(4,2) and (4,3); "
          "use combinatorial mode");
  }
}

std::vector<int> IndexCodec::pattern_encode(uint64_t word) const {
  if (word >= rows()) throw InputError("index word out of range");
  if (mode_ == IndexMode::Table) return table_[word];
  return comb_unrank(word);
}

std::optional<uint64_t> IndexCodec::pattern_rank(
    std::span<const int> pattern) const {
  if (mode_ == IndexMode::Table) {
    for (size_t row = 0; row < table_.size(); ++row)
      if (std::equal(pattern.begin(), pattern.end(), table_[row].begin(),
                     table_[row].end()))
        return row;
    return std::nullopt;
  }
  return comb_rank(pattern);
}

uint64_t IndexCodec::pattern_decode(std::span<const int> pattern) const {
  auto rank = pattern_rank(pattern);
  if (!rank || *rank >= rows())
    throw IllegalPatternError("activation pattern has no index word");
  return *rank;
}

uint64_t IndexCodec::comb_rank(std::span<const int> pattern) const {
  uint64_t z = 0;
  for (int k = 1; k <= k_; ++k) z += binomial(pattern[k - 1], k);
  return z;
}

std::vector<int> IndexCodec::comb_unrank(uint64_t rank) const {
  std::vector<int> pattern(k_);
  for (int k = k_; k >= 1; --k) {
    // Largest c with C(c,k) <= rank; c < N is guaranteed for rank < C(N,K).
    int c = k - 1;
    while (c + 1 < n_ && binomial(c + 1, k) <= rank) ++c;
    pattern[k - 1] = c;
    rank -= binomial(c, k);
  }
  return pattern;
}

std::vector<cplx> subblock_encode(std::span<const uint8_t> bits,
                                  const IndexCodec& codec,
                                  const Constellation& c) {
  const int p1 = codec.index_bits();
  const int p2 = codec.active_count() * c.bits_per_symbol();
  if (bits.size() != static_cast<size_t>(p1 + p2))
    throw InputError("subblock_encode: expected p1+p2 bits");
  std::vector<int> pattern =
      codec.pattern_encode(bits_to_word(bits.first(p1)));
  std::vector<cplx> symbols = map_symbols(bits.subspan(p1), c);
  std::vector<cplx> out(codec.subblock_len(), cplx{0.0, 0.0});
  for (int k = 0; k < codec.active_count(); ++k)
    out[static_cast<size_t>(pattern[k])] = symbols[static_cast<size_t>(k)];
  return out;
}

std::vector<uint8_t> subblock_decode(std::span<const cplx> subblock,
                                     const IndexCodec& codec,
                                     const Constellation& c) {
  std::vector<int> pattern;
  for (size_t i = 0; i < subblock.size(); ++i)
    if (subblock[i] != cplx{0.0, 0.0}) pattern.push_back(static_cast<int>(i));
  if (static_cast<int>(pattern.size()) != codec.active_count())
    throw InputError("subblock_decode: wrong number of active entries");
  uint64_t word = codec.pattern_decode(pattern);
  std::vector<uint8_t> bits = word_to_bits(word, codec.index_bits());
  for (int pos : pattern) {
    auto d = demap_symbol(subblock[static_cast<size_t>(pos)], c);
    bits.insert(bits.end(), d.bits.begin(), d.bits.end());
  }
  return bits;
}

}  // namespace imsim
