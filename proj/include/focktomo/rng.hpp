#pragma once

#include <cstdint>
#include <random>

namespace focktomo {

using Engine = std::mt19937_64;

/// Named random substreams. Every random draw in a run descends from one
/// user seed through one of these.
enum class Stream : std::uint32_t {
  Sampling = 1,
  Noise = 2,
  DarkCounts = 3,
  ShotNoiseSweep = 4,
  DarkPulse = 5,
};

/// Child seed for (seed, stream, shard).
std::uint64_t derive_seed(std::uint64_t seed, Stream stream, std::uint64_t shard = 0);

Engine make_engine(std::uint64_t seed, Stream stream, std::uint64_t shard = 0);

/// Fixed work-partition size for shard-seeded loops; independent of thread count.
inline constexpr std::size_t kShardSize = 1 << 14;

}  // namespace focktomo
