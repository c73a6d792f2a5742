#include "bbsim/lineage.hpp"

#include <cmath>
#include <map>
#include <span>

#include "bbsim/errors.hpp"

namespace bbsim {

const char* to_string(DecayForm form) {
    switch (form) {
        case DecayForm::exponential: return "exponential";
        case DecayForm::power_law: return "power_law";
        case DecayForm::indeterminate: break;
    }
    return "indeterminate";
}

std::size_t ancestor_census(const MarketState& state) {
    std::vector<bool> seen(state.size(), false);
    std::size_t distinct = 0;
    for (const auto& s : state.sites) {
        if (!s.live()) continue;
        if (s.label >= seen.size()) seen.resize(s.label + 1, false);
        if (!seen[s.label]) {
            seen[s.label] = true;
            ++distinct;
        }
    }
    return distinct;
}

std::vector<FranchiseRecord> franchise_table(const MarketState& state) {
    struct Tally {
        std::size_t members = 0;
        double price_sum = 0.0;
    };
    std::map<std::uint32_t, Tally> tallies;
    for (const auto& s : state.sites) {
        if (!s.live()) continue;
        auto& t = tallies[s.label];
        ++t.members;
        t.price_sum += s.price;
    }
    std::vector<FranchiseRecord> out;
    out.reserve(tallies.size());
    const auto n = static_cast<double>(state.size());
    for (const auto& [label, t] : tallies)
        out.push_back({label, static_cast<double>(t.members) / n, t.price_sum / static_cast<double>(t.members)});
    return out;
}

namespace {

struct LineFit {
    double slope = 0.0;
    double rss = 0.0;
    double r2 = 0.0;
};

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
    const auto n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    LineFit fit;
    fit.slope = sxx > 0.0 ? sxy / sxx : 0.0;
    const double intercept = my - fit.slope * mx;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - (intercept + fit.slope * x[i]);
        fit.rss += r * r;
    }
    fit.r2 = syy > 0.0 ? 1.0 - fit.rss / syy : 0.0;
    return fit;
}

}  // namespace

DecayFit classify_decay(const AncestorCensusSeries& census, const DecayFitOptions& options) {
    std::vector<double> t, log_t, log_count;
    for (const auto& p : census) {
        const auto time = static_cast<double>(p.t);
        if (time < options.transient_cutoff || time <= 0.0 || p.distinct_labels == 0) continue;
        t.push_back(time);
        log_t.push_back(std::log(time));
        log_count.push_back(std::log(static_cast<double>(p.distinct_labels)));
    }
    if (t.size() < options.min_points)
        throw PreconditionError("census fit needs at least " + std::to_string(options.min_points) +
                                " points after the transient, got " + std::to_string(t.size()));
    if (t.back() < 10.0 * t.front())
        throw PreconditionError("census fit window must span at least one decade in t");

    const LineFit exp_fit = fit_line(t, log_count);
    const LineFit pow_fit = fit_line(log_t, log_count);

    DecayFit result;
    result.exponential_r2 = exp_fit.r2;
    result.power_law_r2 = pow_fit.r2;
    const bool power_wins = pow_fit.rss < exp_fit.rss;
    const LineFit& best = power_wins ? pow_fit : exp_fit;
    result.exponent_or_rate = -best.slope;
    result.fit_quality = best.r2;
    if (exp_fit.r2 < options.min_r2 && pow_fit.r2 < options.min_r2)
        result.form = DecayForm::indeterminate;
    else
        result.form = power_wins ? DecayForm::power_law : DecayForm::exponential;
    return result;
}

}  // namespace bbsim
