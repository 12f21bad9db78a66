#include "imsim/codebook.hpp"

#include <string>

namespace imsim {

SubblockCodebook SubblockCodebook::build(const IndexCodec& codec,
                                         const Constellation& c, size_t cap) {
  SubblockCodebook cb;
  cb.n = codec.subblock_len();
  cb.k = codec.active_count();
  cb.m = c.order();
  cb.p1 = codec.index_bits();
  cb.p2 = cb.k * c.bits_per_symbol();
  cb.p = cb.p1 + cb.p2;
  cb.points.assign(c.points().begin(), c.points().end());

  double entries = static_cast<double>(codec.rows()) *
                   std::pow(static_cast<double>(cb.m), cb.k);
  if (entries > static_cast<double>(cap))
    throw ConfigError("subblock codebook would hold " +
                      std::to_string(entries) + " entries (cap " +
                      std::to_string(cap) + "); use an LLR detector");
  cb.count = static_cast<size_t>(entries + 0.5);

  cb.bits.resize(cb.count);
  cb.values.resize(cb.count);
  cb.opts.assign(static_cast<size_t>(cb.n) * cb.count, 0);
  for (size_t e = 0; e < cb.count; ++e) {
    cb.bits[e] = word_to_bits(e, cb.p);
    cb.values[e] = subblock_encode(cb.bits[e], codec, c);
    std::vector<int> pattern =
        codec.pattern_encode(bits_to_word(std::span(cb.bits[e]).first(cb.p1)));
    for (int j = 0; j < cb.k; ++j) {
      uint64_t label = bits_to_word(std::span(cb.bits[e]).subspan(
          static_cast<size_t>(cb.p1 + j * c.bits_per_symbol()),
          static_cast<size_t>(c.bits_per_symbol())));
      cb.opts[static_cast<size_t>(pattern[j]) * cb.count + e] =
          static_cast<int32_t>(1 + label);
    }
  }
  return cb;
}

}  // namespace imsim
