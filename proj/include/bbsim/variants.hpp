#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "bbsim/market.hpp"

namespace bbsim {

// Contiguous equal-sized islands. Only price copying sees the boundaries;
// buyers purchase across them freely.
struct IslandPolicy {
    std::uint32_t n_sellers = 0;
    std::uint32_t island_count = 1;
    double coupling = 1.0;

    static IslandPolicy from(const ModelParams& p) { return {p.n_sellers, p.island_count, p.coupling}; }

    std::size_t island_of(std::size_t site) const noexcept {
        return static_cast<std::size_t>(static_cast<std::uint64_t>(site) * island_count / n_sellers);
    }
    std::size_t island_begin(std::size_t island) const noexcept {
        return static_cast<std::size_t>(static_cast<std::uint64_t>(island) * n_sellers / island_count);
    }
};

struct MemoryPolicy {
    std::uint32_t memory_length = 1;

    static MemoryPolicy from(const ModelParams& p) { return {p.memory_length}; }
};

// Live sellers at the start of one repopulation pass, in ascending site order,
// with the offsets where each island's block begins. Sellers born during the
// pass are never added, so they cannot act as sources in the same pass.
// Only SourceDraw::live uses it.
class SourcePools {
public:
    void rebuild(const MarketState& state, const IslandPolicy& islands);

    std::span<const std::uint32_t> global() const noexcept { return live_; }
    std::span<const std::uint32_t> island(std::size_t k) const noexcept {
        return std::span<const std::uint32_t>(live_).subspan(offsets_[k], offsets_[k + 1] - offsets_[k]);
    }

private:
    std::vector<std::uint32_t> live_;
    std::vector<std::size_t> offsets_;
};

// The pool one birth copies from: the whole ring, or a single island.
struct PoolChoice {
    bool global = true;
    std::size_t island = 0;
};

// Chooses the global pool with probability `coupling`, otherwise the home
// island of `vacant_site`. Draws nothing when there is a single island.
PoolChoice select_source_pool(std::size_t vacant_site, const IslandPolicy& islands, Rng& rng);

// The seller a newborn copies, or nothing when the birth fails: an empty pool
// under SourceDraw::live, a vacant site under SourceDraw::sites. `pools` is
// read only in live mode.
std::optional<std::size_t> draw_source(const MarketState& state, const SourcePools& pools, PoolChoice choice,
                                       const IslandPolicy& islands, Rng& rng);

// Uniform draw over the prices currently held in the source site's history.
// A single available entry is returned without consuming a draw.
double sample_copy_price(const PriceHistory& history, std::size_t source_site, const MemoryPolicy& memory,
                         Rng& rng);

// Same, for a source born earlier in the current pass whose birth price is
// not yet recorded: that price counts as the newest of the m entries.
double sample_copy_price(const PriceHistory& history, std::size_t source_site, const MemoryPolicy& memory,
                         Rng& rng, double unrecorded_price);

// Discrete-time step: every live seller pays the overhead once, buyers act
// once each in a fresh random order, then bankruptcy, repopulation, history.
StepMetrics discrete_timestep(MarketState& state);

}  // namespace bbsim
