#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "bbsim/market.hpp"

namespace testing {

inline constexpr double vacant = std::numeric_limits<double>::quiet_NaN();

// State with the given prices (NaN marks a vacant site), capital 0, labels by
// site index and a history holding only the current prices.
inline bbsim::MarketState make_state(const std::vector<double>& prices, bbsim::ModelParams p = {}) {
    p.n_sellers = static_cast<std::uint32_t>(prices.size());
    bbsim::MarketState s = bbsim::init_state(p);
    s.live_count = 0;
    for (std::size_t i = 0; i < prices.size(); ++i) {
        auto& site = s.sites[i];
        site.capital = 0.0;
        if (std::isnan(prices[i])) {
            site.occupancy = bbsim::Occupancy::vacant;
        } else {
            site.occupancy = bbsim::Occupancy::live;
            site.price = prices[i];
            ++s.live_count;
        }
    }
    s.history = bbsim::PriceHistory(prices.size(), p.memory_length);
    bbsim::record_history(s);
    return s;
}

inline std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("bbsim_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace testing
