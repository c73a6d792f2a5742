#include "bbsim/variants.hpp"

#include <algorithm>
#include <numeric>

namespace bbsim {

void SourcePools::rebuild(const MarketState& state, const IslandPolicy& islands) {
    live_.clear();
    live_.reserve(state.live_count);
    for (std::size_t i = 0; i < state.size(); ++i)
        if (state.sites[i].live()) live_.push_back(static_cast<std::uint32_t>(i));

    offsets_.assign(islands.island_count + 1, live_.size());
    offsets_[0] = 0;
    for (std::size_t k = 1; k < islands.island_count; ++k) {
        const auto begin = static_cast<std::uint32_t>(islands.island_begin(k));
        offsets_[k] = static_cast<std::size_t>(std::lower_bound(live_.begin(), live_.end(), begin) - live_.begin());
    }
}

PoolChoice select_source_pool(std::size_t vacant_site, const IslandPolicy& islands, Rng& rng) {
    if (islands.island_count <= 1) return {};
    if (rng.bernoulli(islands.coupling)) return {};
    return {false, islands.island_of(vacant_site)};
}

std::optional<std::size_t> draw_source(const MarketState& state, const SourcePools& pools, PoolChoice choice,
                                       const IslandPolicy& islands, Rng& rng) {
    if (state.params.source_draw == SourceDraw::live) {
        const auto pool = choice.global ? pools.global() : pools.island(choice.island);
        if (pool.empty()) return std::nullopt;
        return pool[rng.uniform_index(pool.size())];
    }
    const std::size_t begin = choice.global ? 0 : islands.island_begin(choice.island);
    const std::size_t end = choice.global ? state.size() : islands.island_begin(choice.island + 1);
    const std::size_t site = begin + rng.uniform_index(end - begin);
    if (!state.sites[site].live()) return std::nullopt;
    return site;
}

double sample_copy_price(const PriceHistory& history, std::size_t source_site, const MemoryPolicy& memory,
                         Rng& rng) {
    const std::size_t available = std::min<std::size_t>(history.size(source_site), memory.memory_length);
    const std::size_t skip = history.size(source_site) - available;
    if (available <= 1) return history.at(source_site, history.size(source_site) - 1);
    return history.at(source_site, skip + rng.uniform_index(available));
}

double sample_copy_price(const PriceHistory& history, std::size_t source_site, const MemoryPolicy& memory,
                         Rng& rng, double unrecorded_price) {
    const std::size_t recorded = std::min<std::size_t>(history.size(source_site), memory.memory_length - 1);
    if (recorded == 0) return unrecorded_price;
    const std::size_t k = rng.uniform_index(recorded + 1);
    if (k == recorded) return unrecorded_price;
    return history.at(source_site, history.size(source_site) - recorded + k);
}

StepMetrics discrete_timestep(MarketState& state) {
    state.ledger = {};
    for (auto& site : state.sites) {
        if (!site.live()) continue;
        site.capital -= state.params.overhead;
        ++state.ledger.overheads_paid;
    }

    const std::size_t n = state.size();
    std::vector<std::uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0u);
    for (std::size_t i = n - 1; i > 0; --i) std::swap(order[i], order[state.rng.uniform_index(i + 1)]);
    for (auto buyer : order) resolve_purchase(state, buyer);

    bankruptcy_phase(state);
    record_history(state);
    ++state.t;
    return snapshot_metrics(state);
}

}  // namespace bbsim
