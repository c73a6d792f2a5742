#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "bbsim/market.hpp"

namespace bbsim {

// End-of-step snapshot, little-endian throughout:
//
//   "BBSIM"                      5 magic bytes
//   u16 version                  currently 1
//   then five sections, each a u64 byte length followed by the payload:
//   1 params   u32 n_sellers, f64 gamma, f64 delta, f64 overhead, f64 p_max,
//              u8 scheme, u8 price_policy, u8 overhead_pool, u8 source_draw,
//              u32 island_count, f64 coupling, u32 memory_length, u64 seed
//   2 clock    u64 t
//   3 sites    u64 count, then per site: u8 occupancy, u32 label,
//              f64 price, f64 capital
//   4 history  u64 capacity, then per site: u32 count, count x f64 oldest first
//   5 rng      4 x u64 xoshiro256** state words
//
// The ledger is not stored; it is reset at the start of every step.
inline constexpr std::uint16_t checkpoint_version = 1;

std::string encode_checkpoint(const MarketState& state);
MarketState decode_checkpoint(const std::string& bytes);

void save_checkpoint(const MarketState& state, const std::filesystem::path& path);
MarketState load_checkpoint(const std::filesystem::path& path);

}  // namespace bbsim
