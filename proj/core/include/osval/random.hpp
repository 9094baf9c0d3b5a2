#pragma once

#include <cstdint>
#include <random>

namespace osval {

using Rng = std::mt19937_64;

/// Mixes a base seed with a stream index (user id, round, repeat, ...) into an
/// independent 64-bit seed. Stable across platforms.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) noexcept;

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) noexcept {
  return derive_seed(derive_seed(base, a), b);
}

}  // namespace osval
