#pragma once

#include <cstdint>
#include <random>

namespace polarlock {

using Rng = std::mt19937_64;

/// Independent substreams of one trial seed.
enum class Stream : std::uint32_t { input_sop = 1, noise = 2, anneal = 3, disturbance = 4 };

inline Rng make_stream(std::uint64_t seed, Stream stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream)};
  return Rng(seq);
}

}  // namespace polarlock
