#include <doctest.h>

#include <cmath>
#include <numbers>
#include <numeric>

#include "bbsim/analysis.hpp"
#include "support.hpp"

using namespace bbsim;

namespace {

TimeSeries sine(double period, std::size_t n) {
    TimeSeries s;
    for (std::size_t i = 0; i < n; ++i) s.values.push_back(std::sin(2.0 * std::numbers::pi * double(i) / period));
    return s;
}

TimeSeries from(std::vector<double> v) {
    TimeSeries s;
    s.values = std::move(v);
    return s;
}

}  // namespace

TEST_CASE("window 1 is the identity") {
    const auto s = sine(37.0, 200);
    const auto m = moving_average(s, 1);
    CHECK(m.values == s.values);
    CHECK(m.t0 == s.t0);
}

TEST_CASE("a constant series is reproduced exactly") {
    const auto s = from(std::vector<double>(100, 0.1));
    const auto m = moving_average(s, 40);
    REQUIRE(m.size() == 61);
    for (double v : m.values) CHECK(v == 0.1);
}

TEST_CASE("moving average placement and length") {
    const auto s = from({1, 2, 3, 4, 5, 6});
    const auto even = moving_average(s, 4);
    CHECK(even.values == std::vector<double>{2.5, 3.5, 4.5});
    CHECK(even.t0 == 1.0);  // centre of 0..3 rounded down
    const auto odd = moving_average(s, 3);
    CHECK(odd.values == std::vector<double>{2, 3, 4, 5});
    CHECK(odd.t0 == 1.0);
}

TEST_CASE("moving average stays inside the input range") {
    Rng rng(3);
    TimeSeries s;
    for (int i = 0; i < 500; ++i) s.values.push_back(rng.unit());
    const auto [lo, hi] = std::minmax_element(s.values.begin(), s.values.end());
    for (double v : moving_average(s, 40).values) {
        CHECK(v >= *lo);
        CHECK(v <= *hi);
    }
}

TEST_CASE("series shorter than the window is rejected") {
    CHECK_THROWS_AS(moving_average(from(std::vector<double>(39, 1.0)), 40), PreconditionError);
}

TEST_CASE("monotone series have no extrema") {
    CHECK(extrema_positions(from({1, 2, 3, 4, 5})).empty());
    CHECK(extrema_positions(from({5, 4, 4, 3})).empty());
}

TEST_CASE("sine extrema are half a period apart") {
    const auto e = extrema_positions(sine(100.0, 1000));
    REQUIRE(e.size() >= 19);
    for (std::size_t i = 1; i < e.size(); ++i) {
        CHECK(std::abs(e[i].t - e[i - 1].t - 50.0) <= 1.0);
        CHECK(e[i].maximum != e[i - 1].maximum);
    }
    CHECK(e.front().maximum);
    CHECK(std::abs(e.front().t - 25.0) <= 1.0);
}

TEST_CASE("a plateau gives one extremum at its midpoint") {
    // Triangle wave with a 10-sample flat top.
    std::vector<double> v;
    for (int i = 0; i <= 20; ++i) v.push_back(i);
    for (int i = 0; i < 9; ++i) v.push_back(20);
    for (int i = 19; i >= 0; --i) v.push_back(i);
    const auto e = extrema_positions(from(v));
    REQUIRE(e.size() == 1);
    CHECK(e[0].maximum);
    CHECK(e[0].t == 24.5);  // flat samples 20..29
}

TEST_CASE("sine periods: gaps and peak to peak") {
    const auto raw = sine(100.0, 2000);
    const auto gaps = period_lengths(raw, 40, PeriodMode::extremum_gap);
    REQUIRE(gaps.lengths.size() >= 30);
    for (double g : gaps.lengths) CHECK(std::abs(g - 50.0) <= 1.0);

    const auto peaks = period_lengths(raw, 40, PeriodMode::peak_to_peak);
    REQUIRE(peaks.lengths.size() >= 15);
    for (double p : peaks.lengths) CHECK(std::abs(p - 100.0) <= 1.0);
}

TEST_CASE("peak to peak lengths are sums of adjacent gaps") {
    Rng rng(21);
    TimeSeries s;
    double x = 0.0;
    for (int i = 0; i < 4000; ++i) s.values.push_back(x += rng.unit() - 0.5);
    const auto smooth = moving_average(s, 40);
    const auto ext = extrema_positions(smooth);
    const auto gaps = period_lengths(s, 40, PeriodMode::extremum_gap).lengths;
    const auto peaks = period_lengths(s, 40, PeriodMode::peak_to_peak).lengths;
    REQUIRE(gaps.size() == ext.size() - 1);
    std::size_t k = 0;
    for (std::size_t i = 0; i + 2 < ext.size(); ++i) {
        if (!ext[i].maximum) continue;
        REQUIRE(k < peaks.size());
        CHECK(peaks[k++] == gaps[i] + gaps[i + 1]);
    }
    CHECK(k == peaks.size());
}

TEST_CASE("too few extrema is an error") {
    CHECK_THROWS_AS(period_lengths(sine(400.0, 500), 40), InsufficientCyclesError);
    CHECK_THROWS_AS(period_lengths(from(std::vector<double>(200, 1.0)), 40), InsufficientCyclesError);
}

TEST_CASE("summary statistics") {
    const std::vector<double> v{1, 2, 3, 4, 10};
    const auto s = summarize(v);
    CHECK(s.count == 5);
    CHECK(s.mean == doctest::Approx(4.0));
    CHECK(s.variance == doctest::Approx(12.5));
    // Population moments about the mean 4.
    const double m2 = (9 + 4 + 1 + 0 + 36) / 5.0;
    const double m3 = (-27 - 8 - 1 + 0 + 216) / 5.0;
    CHECK(s.skewness == doctest::Approx(m3 / std::pow(m2, 1.5)));
    const std::vector<double> sym{1, 2, 3};
    CHECK(summarize(sym).skewness == doctest::Approx(0.0));
}

TEST_CASE("histogram of identical prices") {
    const std::vector<std::vector<double>> snaps{std::vector<double>(1000, 1.0)};
    const auto h = price_histogram(snaps, 0.02, false);
    const auto k = bin_index(1.0, 0.02);
    CHECK(k == 50);
    CHECK(h.bin_lower(k) == doctest::Approx(1.0));
    for (std::size_t i = 0; i < h.density.size(); ++i) CHECK(h.density[i] == (i == k ? doctest::Approx(50.0) : 0.0));
}

TEST_CASE("bin edges land in the upper bin") {
    CHECK(bin_index(0.0, 0.02) == 0);
    CHECK(bin_index(0.02, 0.02) == 1);
    CHECK(bin_index(0.06, 0.02) == 3);
    CHECK(bin_index(0.059999, 0.02) == 2);
    for (int k = 0; k < 200; ++k) CHECK(bin_index(k * 0.02, 0.02) == static_cast<std::size_t>(k));
}

TEST_CASE("uniform prices give a flat density of one half") {
    Rng rng(5);
    std::vector<double> prices(200'000);
    for (auto& p : prices) p = 2.0 * rng.unit();
    const std::vector<std::vector<double>> snaps{prices};
    const auto h = price_histogram(snaps, 0.02, false);
    REQUIRE(h.density.size() >= 100);
    const double sigma = std::sqrt(0.01 * 0.99 / prices.size()) / 0.02;
    for (std::size_t k = 0; k < 100; ++k) CHECK(std::abs(h.density[k] - 0.5) < 5.0 * sigma);
}

TEST_CASE("densities integrate to one and average over snapshots") {
    Rng rng(6);
    std::vector<std::vector<double>> snaps(20);
    for (auto& s : snaps) {
        s.resize(500);
        for (auto& p : s) p = rng.unit() * 3.0;
        const std::vector<std::vector<double>> one{s};
        const auto h = price_histogram(one, 0.05, false);
        CHECK(std::accumulate(h.density.begin(), h.density.end(), 0.0) * 0.05 == doctest::Approx(1.0).epsilon(1e-9));
    }
    const auto avg = price_histogram(snaps, 0.05, true);
    CHECK(avg.snapshots == 20);
    CHECK(std::accumulate(avg.density.begin(), avg.density.end(), 0.0) * 0.05 == doctest::Approx(1.0).epsilon(1e-9));
    for (double se : avg.standard_error) CHECK(se >= 0.0);

    // Two snapshots: mean and standard error of the per-bin densities by hand.
    const std::vector<std::vector<double>> two{{0.01, 0.01}, {0.01, 0.03}};
    const auto h = price_histogram(two, 0.02, true);
    CHECK(h.density[0] == doctest::Approx(37.5));
    CHECK(h.density[1] == doctest::Approx(12.5));
    CHECK(h.standard_error[0] == doctest::Approx(12.5));
}

TEST_CASE("histogram needs a live seller") {
    const std::vector<std::vector<double>> empty{{}};
    CHECK_THROWS_AS(price_histogram(empty), PreconditionError);
}

TEST_CASE("ensemble statistics") {
    const std::vector<double> a{1, 1, 1};
    auto s = ensemble_stats(a);
    CHECK(s.mean == 1.0);
    CHECK(s.std == 0.0);
    CHECK(s.standard_error == 0.0);
    const std::vector<double> b{0, 2};
    s = ensemble_stats(b);
    CHECK(s.mean == 1.0);
    CHECK(s.std == doctest::Approx(std::sqrt(2.0)));
    CHECK(s.standard_error == doctest::Approx(1.0));
    const std::vector<double> one{3};
    CHECK_THROWS_AS(ensemble_stats(one), PreconditionError);
}

TEST_CASE("variance against delta") {
    std::vector<std::pair<double, PeriodDistribution>> sweep{
        {0.02, {{10, 20, 30}}}, {0.04, {{10, 20, 30}}}, {0.06, {{5, 5, 5, 9}}}};
    const auto table = variance_vs_delta(sweep);
    REQUIRE(table.size() == 3);
    CHECK(table[0].delta == 0.02);
    CHECK(table[0].variance == table[1].variance);
    CHECK(table[0].variance == doctest::Approx(100.0));
    CHECK(table[2].variance == doctest::Approx(4.0));
}

TEST_CASE("correlation") {
    const std::vector<double> a{1, 2, 3, 4};
    const std::vector<double> b{2, 4, 6, 8};
    const std::vector<double> c{4, 3, 2, 1};
    const std::vector<double> k{1, 1, 1, 1};
    CHECK(correlation(a, b) == doctest::Approx(1.0));
    CHECK(correlation(a, c) == doctest::Approx(-1.0));
    CHECK(std::isnan(correlation(a, k)));
}
