#include "bbsim/market.hpp"

#include <algorithm>
#include <stdexcept>

#include "bbsim/variants.hpp"

namespace bbsim {

PriceHistory::PriceHistory(std::size_t sites, std::size_t capacity)
    : capacity_(capacity), values_(sites * capacity, 0.0), head_(sites, 0), count_(sites, 0) {
    if (capacity == 0) throw std::invalid_argument("history capacity must be positive");
}

std::vector<double> PriceHistory::entries(std::size_t site) const {
    std::vector<double> out(size(site));
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = at(site, i);
    return out;
}

void PriceHistory::assign(std::size_t site, const std::vector<double>& oldest_first) {
    if (oldest_first.size() > capacity_) throw std::invalid_argument("history longer than capacity");
    head_[site] = 0;
    count_[site] = 0;
    for (double p : oldest_first) push(site, p);
}

bool operator==(const PriceHistory& a, const PriceHistory& b) {
    if (a.capacity_ != b.capacity_ || a.count_ != b.count_) return false;
    for (std::size_t s = 0; s < a.sites(); ++s)
        for (std::size_t i = 0; i < a.size(s); ++i)
            if (a.at(s, i) != b.at(s, i)) return false;
    return true;
}

MarketState init_state(const ModelParams& params) {
    params.validate();
    MarketState state;
    state.params = params;
    state.rng = Rng(params.seed);
    const std::size_t n = params.n_sellers;
    state.sites.resize(n);
    state.history = PriceHistory(n, params.memory_length);
    for (std::size_t i = 0; i < n; ++i) {
        auto& site = state.sites[i];
        site.occupancy = Occupancy::live;
        site.label = static_cast<std::uint32_t>(i);
        site.capital = 0.0;
        site.price = params.price_policy == PricePolicy::bertrand_fixed ? 1.0 : state.rng.unit() * params.p_max;
        state.history.push(i, site.price);
    }
    state.live_count = params.n_sellers;
    return state;
}

void overhead_draw(MarketState& state) {
    const std::size_t n = state.size();
    if (state.params.overhead_pool == OverheadPool::live) {
        if (state.live_count == 0) return;
        for (;;) {
            auto& site = state.sites[state.rng.uniform_index(n)];
            if (site.live()) {
                site.capital -= state.params.overhead;
                ++state.ledger.overheads_paid;
                return;
            }
        }
    }
    auto& site = state.sites[state.rng.uniform_index(n)];
    if (site.live()) {
        site.capital -= state.params.overhead;
        ++state.ledger.overheads_paid;
    }
}

std::optional<Sale> resolve_purchase(MarketState& state, std::size_t buyer) {
    const std::size_t n = state.size();
    const std::size_t left = buyer;
    const std::size_t right = buyer + 1 == n ? 0 : buyer + 1;
    const auto& l = state.sites[left];
    const auto& r = state.sites[right];

    std::size_t seller;
    if (l.live() && r.live()) {
        if (l.price < r.price)
            seller = left;
        else if (r.price < l.price)
            seller = right;
        else
            seller = state.rng.coin() ? right : left;
    } else if (l.live()) {
        seller = left;
    } else if (r.live()) {
        seller = right;
    } else {
        ++state.ledger.unsatisfied;
        return std::nullopt;
    }

    auto& s = state.sites[seller];
    s.capital += s.price;
    ++state.ledger.sales;
    state.ledger.revenue += s.price;
    return Sale{seller, s.price};
}

double mutate_price(double parent_price, double delta, Rng& rng) {
    const double lo = -std::min(delta, parent_price);
    const double dp = lo + rng.unit_closed() * (delta - lo);
    return std::max(0.0, parent_price + dp);
}

std::uint32_t repopulate(MarketState& state) {
    const auto islands = IslandPolicy::from(state.params);
    const auto memory = MemoryPolicy::from(state.params);
    const bool bertrand = state.params.price_policy == PricePolicy::bertrand_fixed;

    SourcePools pools;
    // Site draws may hit a seller born earlier in this pass; its price is not
    // in the history until the end of the step.
    std::vector<std::uint8_t> born;
    if (state.params.source_draw == SourceDraw::live) pools.rebuild(state, islands);
    else born.assign(state.size(), 0);

    std::uint32_t births = 0;
    for (std::size_t i = 0; i < state.size(); ++i) {
        auto& site = state.sites[i];
        if (site.live()) continue;
        if (!state.rng.bernoulli(state.params.gamma)) continue;
        const auto choice = select_source_pool(i, islands, state.rng);
        const auto drawn = draw_source(state, pools, choice, islands, state.rng);
        if (!drawn) continue;
        const std::size_t source = *drawn;

        double price = 1.0;
        if (!bertrand) {
            const double copied = !born.empty() && born[source]
                                      ? sample_copy_price(state.history, source, memory, state.rng,
                                                          state.sites[source].price)
                                      : sample_copy_price(state.history, source, memory, state.rng);
            price = mutate_price(copied, state.params.delta, state.rng);
        }
        site.occupancy = Occupancy::live;
        site.label = state.sites[source].label;
        site.price = price;
        site.capital = 0.0;
        if (!born.empty()) born[i] = 1;
        ++births;
    }
    state.live_count += births;
    state.ledger.births += births;
    return births;
}

BankruptcyResult bankruptcy_phase(MarketState& state) {
    BankruptcyResult result;
    for (auto& site : state.sites) {
        if (site.live() && site.capital < 0.0) {
            state.ledger.written_off += site.capital;
            site.occupancy = Occupancy::vacant;
            ++result.deaths;
        }
    }
    state.live_count -= result.deaths;
    state.ledger.deaths += result.deaths;
    result.births = repopulate(state);
    return result;
}

void record_history(MarketState& state) {
    for (std::size_t i = 0; i < state.size(); ++i)
        if (state.sites[i].live()) state.history.push(i, state.sites[i].price);
}

StepMetrics run_timestep(MarketState& state) {
    if (state.params.scheme != Scheme::continuous)
        throw std::logic_error("run_timestep requires the continuous scheme");
    state.ledger = {};
    const std::size_t n = state.size();
    for (std::size_t k = 0; k < n; ++k) {
        overhead_draw(state);
        resolve_purchase(state, state.rng.uniform_index(n));
    }
    bankruptcy_phase(state);
    record_history(state);
    ++state.t;
    return snapshot_metrics(state);
}

StepMetrics step(MarketState& state) {
    return state.params.scheme == Scheme::continuous ? run_timestep(state) : discrete_timestep(state);
}

StepMetrics snapshot_metrics(const MarketState& state) {
    StepMetrics m;
    const auto n = static_cast<double>(state.size());
    m.t = state.t;

    const std::size_t islands = state.params.island_count;
    const std::size_t block = state.size() / islands;
    std::size_t live = 0;
    double price_sum = 0.0;
    double capital_sum = 0.0;
    if (islands > 1) m.island_mean_price.resize(islands);
    for (std::size_t k = 0; k < islands; ++k) {
        std::size_t island_live = 0;
        double island_price = 0.0;
        for (std::size_t i = k * block; i < (k + 1) * block; ++i) {
            const auto& s = state.sites[i];
            if (!s.live()) continue;
            ++island_live;
            island_price += s.price;
            capital_sum += s.capital;
        }
        live += island_live;
        price_sum += island_price;
        if (islands > 1 && island_live > 0)
            m.island_mean_price[k] = island_price / static_cast<double>(island_live);
    }

    m.live_fraction = static_cast<double>(live) / n;
    if (live > 0) {
        m.mean_price = price_sum / static_cast<double>(live);
        m.mean_capital = capital_sum / static_cast<double>(live);
    }
    m.unsatisfied_demand = static_cast<double>(state.ledger.unsatisfied) / n;
    m.births = state.ledger.births;
    m.deaths = state.ledger.deaths;
    m.revenue = state.ledger.revenue;
    m.overheads_paid = state.ledger.overheads_paid;
    m.overhead_cost = static_cast<double>(state.ledger.overheads_paid) * state.params.overhead;
    m.written_off = state.ledger.written_off;
    return m;
}

double total_capital(const MarketState& state) {
    double sum = 0.0;
    for (const auto& s : state.sites)
        if (s.live()) sum += s.capital;
    return sum;
}

}  // namespace bbsim
