#include "focktomo/rng.hpp"

namespace focktomo {

std::uint64_t derive_seed(std::uint64_t seed, Stream stream, std::uint64_t shard) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(shard),
                    static_cast<std::uint32_t>(shard >> 32)};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

Engine make_engine(std::uint64_t seed, Stream stream, std::uint64_t shard) {
  return Engine(derive_seed(seed, stream, shard));
}

}  // namespace focktomo
