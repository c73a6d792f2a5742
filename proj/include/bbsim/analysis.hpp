#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "bbsim/market.hpp"

namespace bbsim {

// Uniformly spaced samples: value i sits at t0 + i * dt.
struct TimeSeries {
    double t0 = 0.0;
    double dt = 1.0;
    std::vector<double> values;

    std::size_t size() const noexcept { return values.size(); }
    double t(std::size_t i) const noexcept { return t0 + static_cast<double>(i) * dt; }
};

// Centred moving average; output sample j averages inputs j..j+window-1 and is
// placed at the input time of index j + (window - 1) / 2 (rounded down).
// Throws PreconditionError when the series is shorter than the window.
TimeSeries moving_average(const TimeSeries& series, std::size_t window);

struct Extremum {
    double t = 0.0;
    bool maximum = false;
};

// Zeros of the first difference: one per strict sign change. A run of exactly
// flat steps between opposite slopes contributes a single zero at the
// midpoint of the plateau. Requires at least 3 samples.
std::vector<Extremum> extrema_positions(const TimeSeries& series);

enum class PeriodMode { extremum_gap, peak_to_peak };

const char* to_string(PeriodMode mode);

struct DistributionSummary {
    std::size_t count = 0;
    double mean = 0.0;
    double variance = 0.0;  // n - 1 denominator
    double skewness = 0.0;  // m3 / m2^(3/2) with population moments
};

DistributionSummary summarize(std::span<const double> values);

struct Histogram {
    double bin_width = 0.0;
    std::vector<double> counts;  // bin k covers [k*w, (k+1)*w)
};

Histogram make_histogram(std::span<const double> values, double bin_width);

struct PeriodDistribution {
    std::vector<double> lengths;

    DistributionSummary summary() const { return summarize(lengths); }
    Histogram histogram(double bin_width) const { return make_histogram(lengths, bin_width); }
};

// Smooths, finds derivative zeros and returns the spacing between consecutive
// zeros (extremum_gap) or between consecutive maxima (peak_to_peak).
// Throws InsufficientCyclesError when fewer than 3 extrema are found.
PeriodDistribution period_lengths(const TimeSeries& raw, std::size_t window = 40,
                                  PeriodMode mode = PeriodMode::extremum_gap);

// Probability density of live-seller prices, averaged over snapshots.
struct PriceHistogram {
    double bin_width = 0.02;
    std::vector<double> density;
    std::vector<double> standard_error;  // zero with a single snapshot
    std::size_t snapshots = 0;

    double bin_lower(std::size_t k) const noexcept { return static_cast<double>(k) * bin_width; }
};

// Index of the bin [k*w, (k+1)*w) holding x, robust to rounding in x / w.
std::size_t bin_index(double x, double bin_width);

// Accumulates per-snapshot densities so that large states need not be kept.
class PriceHistogramAccumulator {
public:
    explicit PriceHistogramAccumulator(double bin_width = 0.02);

    // Snapshots with no live seller are ignored.
    void add(std::span<const double> prices);
    void add(const MarketState& state);

    std::size_t snapshots() const noexcept { return snapshots_; }
    PriceHistogram result() const;

private:
    double bin_width_;
    std::size_t snapshots_ = 0;
    std::vector<double> sum_;
    std::vector<double> sum_sq_;
};

std::vector<double> live_prices(const MarketState& state);

// With time_average the per-bin mean and standard error over all snapshots
// are returned; otherwise only the last snapshot is used.
// Throws PreconditionError when no snapshot holds a live seller.
PriceHistogram price_histogram(std::span<const std::vector<double>> snapshots, double bin_width = 0.02,
                               bool time_average = true);

struct EnsembleStats {
    double mean = 0.0;
    double std = 0.0;  // n - 1 denominator
    double standard_error = 0.0;
};

// Requires at least two values.
EnsembleStats ensemble_stats(std::span<const double> values);

struct DeltaVariance {
    double delta = 0.0;
    double variance = 0.0;
};

std::vector<DeltaVariance> variance_vs_delta(std::span<const std::pair<double, PeriodDistribution>> sweep);

// Pearson correlation; NaN when either input is constant.
double correlation(std::span<const double> a, std::span<const double> b);

}  // namespace bbsim
