#pragma once

#include <cstdint>

namespace bbsim {

// SplitMix64 finalizer; a bijection on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Seed for run `run_index` at sweep point `sweep_index`:
//   mix64(mix64(master) + 0x9E3779B97F4A7C15 * ((sweep_index << 32 | run_index) + 1))
// For a fixed master this is injective over all index pairs, since the
// multiplier is odd and mix64 is a bijection. Frozen: changing it changes
// every recorded experiment.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint32_t run_index,
                                    std::uint32_t sweep_index) noexcept {
    const std::uint64_t packed = (static_cast<std::uint64_t>(sweep_index) << 32) | run_index;
    return mix64(mix64(master) + 0x9E3779B97F4A7C15ULL * (packed + 1));
}

}  // namespace bbsim
