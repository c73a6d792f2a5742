#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "bbsim/market.hpp"

namespace bbsim {

// Ancestry labels are the site indices at t = 0. Every newborn inherits the
// label of the seller it copied, so a label identifies a franchise root.

struct FranchiseRecord {
    std::uint32_t label = 0;
    double size_fraction = 0.0;  // members / N
    double mean_price = 0.0;
};

struct CensusPoint {
    std::uint64_t t = 0;
    std::size_t distinct_labels = 0;
};

using AncestorCensusSeries = std::vector<CensusPoint>;

enum class DecayForm { exponential, power_law, indeterminate };

const char* to_string(DecayForm form);

struct DecayFit {
    DecayForm form = DecayForm::indeterminate;
    // Rate 1/tau for exponential decay, exponent for count ~ t^-exponent.
    // Reported for the better-fitting form even when indeterminate.
    double exponent_or_rate = 0.0;
    double fit_quality = 0.0;  // R^2 of the better fit
    double exponential_r2 = 0.0;
    double power_law_r2 = 0.0;
};

struct DecayFitOptions {
    double transient_cutoff = 100.0;
    double min_r2 = 0.9;
    std::size_t min_points = 20;
};

// Number of distinct labels among live sellers.
std::size_t ancestor_census(const MarketState& state);

// One record per live label, ascending by label.
std::vector<FranchiseRecord> franchise_table(const MarketState& state);

// Least-squares fits of log(count) against t and against log(t) over the
// points with t >= transient_cutoff. The smaller residual sum of squares
// wins; the result is indeterminate when neither R^2 reaches min_r2.
// Throws PreconditionError for fewer than min_points points or a window
// spanning less than one decade in t.
DecayFit classify_decay(const AncestorCensusSeries& census, const DecayFitOptions& options = {});

}  // namespace bbsim
