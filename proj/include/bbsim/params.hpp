#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

#include "bbsim/errors.hpp"

namespace bbsim {

enum class Scheme : std::uint8_t { continuous, discrete };
enum class PricePolicy : std::uint8_t { evolving, bertrand_fixed };
// Which sellers the per-iteration overhead draw ranges over.
enum class OverheadPool : std::uint8_t { sites, live };
// How a newborn picks the seller it copies. `sites`: one uniform draw over the
// sites of the chosen pool; a vacant site means no birth, and sellers born
// earlier in the same pass count as live. `live`: uniform over the sellers
// that were live when the pass began.
enum class SourceDraw : std::uint8_t { sites, live };

std::string_view to_string(Scheme s);
std::string_view to_string(PricePolicy p);
std::string_view to_string(OverheadPool p);
std::string_view to_string(SourceDraw d);
std::optional<Scheme> parse_scheme(std::string_view s);
std::optional<PricePolicy> parse_price_policy(std::string_view s);
std::optional<OverheadPool> parse_overhead_pool(std::string_view s);
std::optional<SourceDraw> parse_source_draw(std::string_view s);

struct ModelParams {
    std::uint32_t n_sellers = 1000;
    double gamma = 0.5;        // repopulation probability
    double delta = 0.04;       // mutation half-width
    double overhead = 2.0;
    double p_max = 2.0;        // initial prices uniform on [0, p_max)
    Scheme scheme = Scheme::continuous;
    PricePolicy price_policy = PricePolicy::evolving;
    OverheadPool overhead_pool = OverheadPool::sites;
    SourceDraw source_draw = SourceDraw::sites;
    std::uint32_t island_count = 1;
    double coupling = 1.0;     // probability of copying from the whole system
    std::uint32_t memory_length = 1;
    std::uint64_t seed = 0;

    // Throws ValidationError naming the first offending field.
    void validate() const;

    friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

}  // namespace bbsim
