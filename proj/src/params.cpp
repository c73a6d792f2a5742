#include "bbsim/params.hpp"

#include <cmath>

namespace bbsim {

std::string_view to_string(Scheme s) { return s == Scheme::continuous ? "continuous" : "discrete"; }

std::string_view to_string(PricePolicy p) {
    return p == PricePolicy::evolving ? "evolving" : "bertrand_fixed";
}

std::string_view to_string(OverheadPool p) { return p == OverheadPool::sites ? "sites" : "live"; }

std::string_view to_string(SourceDraw d) { return d == SourceDraw::sites ? "sites" : "live"; }

std::optional<Scheme> parse_scheme(std::string_view s) {
    if (s == "continuous") return Scheme::continuous;
    if (s == "discrete") return Scheme::discrete;
    return std::nullopt;
}

std::optional<PricePolicy> parse_price_policy(std::string_view s) {
    if (s == "evolving") return PricePolicy::evolving;
    if (s == "bertrand_fixed" || s == "bertrand") return PricePolicy::bertrand_fixed;
    return std::nullopt;
}

std::optional<OverheadPool> parse_overhead_pool(std::string_view s) {
    if (s == "sites") return OverheadPool::sites;
    if (s == "live") return OverheadPool::live;
    return std::nullopt;
}

std::optional<SourceDraw> parse_source_draw(std::string_view s) {
    if (s == "sites") return SourceDraw::sites;
    if (s == "live") return SourceDraw::live;
    return std::nullopt;
}

namespace {

bool is_probability(double x) { return std::isfinite(x) && x >= 0.0 && x <= 1.0; }

}  // namespace

void ModelParams::validate() const {
    if (n_sellers < 2) throw ValidationError("n_sellers", "must be at least 2");
    if (!is_probability(gamma)) throw ValidationError("gamma", "must lie in [0, 1]");
    if (!std::isfinite(delta) || delta < 0.0) throw ValidationError("delta", "must be >= 0");
    if (!std::isfinite(overhead) || overhead <= 0.0) throw ValidationError("overhead", "must be > 0");
    if (!std::isfinite(p_max) || p_max <= 0.0) throw ValidationError("p_max", "must be > 0");
    if (island_count < 1) throw ValidationError("island_count", "must be at least 1");
    if (n_sellers % island_count != 0)
        throw ValidationError("island_count", "must divide n_sellers");
    if (!is_probability(coupling)) throw ValidationError("coupling", "must lie in [0, 1]");
    if (memory_length < 1) throw ValidationError("memory_length", "must be at least 1");
}

}  // namespace bbsim
