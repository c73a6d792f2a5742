#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "bbsim/params.hpp"
#include "bbsim/rng.hpp"

namespace bbsim {

enum class Occupancy : std::uint8_t { vacant, live };

// One seller position on the ring. Price is fixed for the lifetime of an
// occupant; capital may go negative until the end-of-step bankruptcy pass.
// Price, capital and label are meaningless while the site is vacant.
struct SellerSite {
    Occupancy occupancy = Occupancy::vacant;
    std::uint32_t label = 0;
    double price = 0.0;
    double capital = 0.0;

    bool live() const noexcept { return occupancy == Occupancy::live; }

    friend bool operator==(const SellerSite&, const SellerSite&) = default;
};

// Bounded FIFO of recent prices for every site, stored in one flat buffer.
// The history belongs to the site, not the occupant, and survives turnover.
class PriceHistory {
public:
    PriceHistory() = default;
    PriceHistory(std::size_t sites, std::size_t capacity);

    std::size_t sites() const noexcept { return count_.size(); }
    std::size_t capacity() const noexcept { return capacity_; }
    std::size_t size(std::size_t site) const noexcept { return count_[site]; }

    // i = 0 is the oldest retained entry.
    double at(std::size_t site, std::size_t i) const noexcept {
        std::size_t slot = head_[site] + i;
        if (slot >= capacity_) slot -= capacity_;
        return values_[site * capacity_ + slot];
    }

    // Appends, evicting the oldest entry once the site holds `capacity` prices.
    void push(std::size_t site, double price) noexcept {
        const std::size_t base = site * capacity_;
        if (count_[site] < capacity_) {
            std::size_t slot = head_[site] + count_[site];
            if (slot >= capacity_) slot -= capacity_;
            values_[base + slot] = price;
            ++count_[site];
        } else {
            values_[base + head_[site]] = price;
            if (++head_[site] == capacity_) head_[site] = 0;
        }
    }

    std::vector<double> entries(std::size_t site) const;
    void assign(std::size_t site, const std::vector<double>& oldest_first);

    friend bool operator==(const PriceHistory&, const PriceHistory&);

private:
    std::size_t capacity_ = 1;
    std::vector<double> values_;
    std::vector<std::uint32_t> head_;
    std::vector<std::uint32_t> count_;
};

// Accumulators for the current timestep; zeroed when a step begins.
struct Ledger {
    std::uint64_t overheads_paid = 0;
    double revenue = 0.0;
    std::uint64_t sales = 0;
    std::uint64_t unsatisfied = 0;
    // Sum of the (negative) capitals removed by bankruptcy.
    double written_off = 0.0;
    std::uint32_t births = 0;
    std::uint32_t deaths = 0;

    friend bool operator==(const Ledger&, const Ledger&) = default;
};

struct StepMetrics {
    std::uint64_t t = 0;
    double live_fraction = 0.0;
    // Empty when no seller is live.
    std::optional<double> mean_price;
    std::optional<double> mean_capital;
    double unsatisfied_demand = 0.0;
    std::uint32_t births = 0;
    std::uint32_t deaths = 0;
    double revenue = 0.0;
    std::uint64_t overheads_paid = 0;
    double overhead_cost = 0.0;
    double written_off = 0.0;
    // One entry per island, only filled when island_count > 1.
    std::vector<std::optional<double>> island_mean_price;
};

// Complete simulation state. Buyers are implicit: buyer i sits between
// seller sites i and (i + 1) mod N. Not safe for concurrent mutation.
struct MarketState {
    ModelParams params;
    std::vector<SellerSite> sites;
    PriceHistory history;
    std::uint64_t t = 0;
    Rng rng;
    Ledger ledger;
    std::uint32_t live_count = 0;

    std::size_t size() const noexcept { return sites.size(); }

    friend bool operator==(const MarketState&, const MarketState&) = default;
};

struct Sale {
    std::size_t site;
    double price;
};

struct BankruptcyResult {
    std::uint32_t deaths = 0;
    std::uint32_t births = 0;
};

MarketState init_state(const ModelParams& params);

// One overhead payment. With OverheadPool::sites a vacant draw is a no-op;
// with OverheadPool::live vacant draws are rejected and redrawn.
void overhead_draw(MarketState& state);

// The cheaper live neighbour of `buyer` sells; nullopt when both are vacant.
std::optional<Sale> resolve_purchase(MarketState& state, std::size_t buyer);

// Continuous-time step: N micro-iterations (overhead then purchase), then
// bankruptcy and repopulation, then history recording.
StepMetrics run_timestep(MarketState& state);

// Dispatches on params.scheme.
StepMetrics step(MarketState& state);

BankruptcyResult bankruptcy_phase(MarketState& state);

// Refills vacant sites in ascending index order. Returns the number of births.
std::uint32_t repopulate(MarketState& state);

// parent + dp with dp uniform on [-min(delta, parent), delta].
double mutate_price(double parent_price, double delta, Rng& rng);

// Appends every live site's current price to its history.
void record_history(MarketState& state);

StepMetrics snapshot_metrics(const MarketState& state);

// Sum of capital over live sites.
double total_capital(const MarketState& state);

}  // namespace bbsim
