#include "bbsim/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "bbsim/errors.hpp"

namespace bbsim {

TimeSeries moving_average(const TimeSeries& series, std::size_t window) {
    if (window == 0) throw PreconditionError("moving average window must be positive");
    if (series.size() < window)
        throw PreconditionError("series of length " + std::to_string(series.size()) +
                                " is shorter than the window " + std::to_string(window));
    TimeSeries out;
    out.dt = series.dt;
    out.t0 = series.t((window - 1) / 2);
    out.values.resize(series.size() - window + 1);
    const auto w = static_cast<double>(window);
    // Each window is summed afresh, and the mean is clamped to the window's
    // range so a constant input comes back bit-for-bit.
    for (std::size_t j = 0; j < out.values.size(); ++j) {
        double sum = 0.0;
        double lo = series.values[j];
        double hi = lo;
        for (std::size_t k = j; k < j + window; ++k) {
            const double v = series.values[k];
            sum += v;
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        out.values[j] = std::clamp(sum / w, lo, hi);
    }
    return out;
}

std::vector<Extremum> extrema_positions(const TimeSeries& series) {
    if (series.size() < 3) throw PreconditionError("extrema need at least 3 samples");
    std::vector<Extremum> out;
    // Last nonzero difference: its index and sign.
    std::size_t last = 0;
    int last_sign = 0;
    for (std::size_t k = 0; k + 1 < series.size(); ++k) {
        const double d = series.values[k + 1] - series.values[k];
        const int sign = (d > 0.0) - (d < 0.0);
        if (sign == 0) continue;
        if (last_sign != 0 && sign != last_sign) {
            // The turning samples run from last + 1 to k.
            const double t = 0.5 * (series.t(last + 1) + series.t(k));
            out.push_back({t, last_sign > 0});
        }
        last = k;
        last_sign = sign;
    }
    return out;
}

const char* to_string(PeriodMode mode) {
    return mode == PeriodMode::extremum_gap ? "extremum_gap" : "peak_to_peak";
}

DistributionSummary summarize(std::span<const double> values) {
    DistributionSummary s;
    s.count = values.size();
    if (values.empty()) {
        s.mean = s.variance = s.skewness = std::numeric_limits<double>::quiet_NaN();
        return s;
    }
    const auto n = static_cast<double>(values.size());
    for (double v : values) s.mean += v;
    s.mean /= n;
    double m2 = 0.0, m3 = 0.0;
    for (double v : values) {
        const double d = v - s.mean;
        m2 += d * d;
        m3 += d * d * d;
    }
    s.variance = values.size() > 1 ? m2 / (n - 1.0) : std::numeric_limits<double>::quiet_NaN();
    m2 /= n;
    m3 /= n;
    s.skewness = m2 > 0.0 ? m3 / std::pow(m2, 1.5) : 0.0;
    return s;
}

std::size_t bin_index(double x, double bin_width) {
    auto k = static_cast<std::size_t>(std::floor(x / bin_width));
    if (static_cast<double>(k + 1) * bin_width <= x)
        ++k;
    else if (k > 0 && static_cast<double>(k) * bin_width > x)
        --k;
    return k;
}

Histogram make_histogram(std::span<const double> values, double bin_width) {
    if (!(bin_width > 0.0)) throw PreconditionError("bin width must be positive");
    Histogram h{bin_width, {}};
    for (double v : values) {
        const std::size_t k = bin_index(v, bin_width);
        if (k >= h.counts.size()) h.counts.resize(k + 1, 0.0);
        h.counts[k] += 1.0;
    }
    return h;
}

PeriodDistribution period_lengths(const TimeSeries& raw, std::size_t window, PeriodMode mode) {
    const TimeSeries smooth = moving_average(raw, window);
    if (smooth.size() < 3) throw InsufficientCyclesError("smoothed series has fewer than 3 samples");
    const auto extrema = extrema_positions(smooth);
    if (extrema.size() < 3)
        throw InsufficientCyclesError("found " + std::to_string(extrema.size()) + " extrema, need at least 3");

    PeriodDistribution out;
    if (mode == PeriodMode::extremum_gap) {
        for (std::size_t i = 1; i < extrema.size(); ++i) out.lengths.push_back(extrema[i].t - extrema[i - 1].t);
    } else {
        // Extrema alternate, so consecutive maxima are two zeros apart; the
        // length is formed from the two gaps to keep the sums exact.
        for (std::size_t i = 0; i + 2 < extrema.size(); ++i) {
            if (!extrema[i].maximum) continue;
            out.lengths.push_back((extrema[i + 1].t - extrema[i].t) + (extrema[i + 2].t - extrema[i + 1].t));
        }
        if (out.lengths.empty()) throw InsufficientCyclesError("fewer than two maxima");
    }
    return out;
}

PriceHistogramAccumulator::PriceHistogramAccumulator(double bin_width) : bin_width_(bin_width) {
    if (!(bin_width > 0.0)) throw PreconditionError("bin width must be positive");
}

void PriceHistogramAccumulator::add(std::span<const double> prices) {
    if (prices.empty()) return;
    std::vector<double> counts;
    for (double p : prices) {
        const std::size_t k = bin_index(p, bin_width_);
        if (k >= counts.size()) counts.resize(k + 1, 0.0);
        counts[k] += 1.0;
    }
    if (counts.size() > sum_.size()) {
        sum_.resize(counts.size(), 0.0);
        sum_sq_.resize(counts.size(), 0.0);
    }
    const double norm = 1.0 / (static_cast<double>(prices.size()) * bin_width_);
    for (std::size_t k = 0; k < counts.size(); ++k) {
        const double density = counts[k] * norm;
        sum_[k] += density;
        sum_sq_[k] += density * density;
    }
    ++snapshots_;
}

void PriceHistogramAccumulator::add(const MarketState& state) {
    const auto prices = live_prices(state);
    add(prices);
}

PriceHistogram PriceHistogramAccumulator::result() const {
    PriceHistogram h;
    h.bin_width = bin_width_;
    h.snapshots = snapshots_;
    h.density.resize(sum_.size());
    h.standard_error.assign(sum_.size(), 0.0);
    if (snapshots_ == 0) return h;
    const auto k = static_cast<double>(snapshots_);
    for (std::size_t b = 0; b < sum_.size(); ++b) {
        const double mean = sum_[b] / k;
        h.density[b] = mean;
        if (snapshots_ > 1) {
            const double var = std::max(0.0, (sum_sq_[b] - k * mean * mean) / (k - 1.0));
            h.standard_error[b] = std::sqrt(var / k);
        }
    }
    return h;
}

std::vector<double> live_prices(const MarketState& state) {
    std::vector<double> out;
    out.reserve(state.live_count);
    for (const auto& s : state.sites)
        if (s.live()) out.push_back(s.price);
    return out;
}

PriceHistogram price_histogram(std::span<const std::vector<double>> snapshots, double bin_width,
                               bool time_average) {
    PriceHistogramAccumulator acc(bin_width);
    if (time_average) {
        for (const auto& s : snapshots) acc.add(s);
    } else if (!snapshots.empty()) {
        acc.add(snapshots.back());
    }
    if (acc.snapshots() == 0) throw PreconditionError("price histogram needs a snapshot with a live seller");
    return acc.result();
}

EnsembleStats ensemble_stats(std::span<const double> values) {
    if (values.size() < 2) throw PreconditionError("ensemble statistics need at least two values");
    const auto n = static_cast<double>(values.size());
    EnsembleStats s;
    for (double v : values) s.mean += v;
    s.mean /= n;
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(ss / (n - 1.0));
    s.standard_error = s.std / std::sqrt(n);
    return s;
}

std::vector<DeltaVariance> variance_vs_delta(std::span<const std::pair<double, PeriodDistribution>> sweep) {
    std::vector<DeltaVariance> out;
    out.reserve(sweep.size());
    for (const auto& [delta, dist] : sweep) out.push_back({delta, dist.summary().variance});
    return out;
}

double correlation(std::span<const double> a, std::span<const double> b) {
    const std::size_t n = std::min(a.size(), b.size());
    if (n < 2) return std::numeric_limits<double>::quiet_NaN();
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= static_cast<double>(n);
    mb /= static_cast<double>(n);
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    if (saa == 0.0 || sbb == 0.0) return std::numeric_limits<double>::quiet_NaN();
    return sab / std::sqrt(saa * sbb);
}

}  // namespace bbsim
