#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>

#include "bbsim/csv.hpp"
#include "bbsim/errors.hpp"
#include "bbsim/harness.hpp"

namespace bbsim {

namespace fs = std::filesystem;

namespace {

const std::vector<std::string> timeseries_columns{"t",      "live_fraction", "mean_price", "mean_capital",
                                                  "unsatisfied_demand", "births", "deaths", "revenue",
                                                  "overheads"};

TimeSeries series_from(const csv::Table& table, const std::string& column) {
    const auto t = table.numeric_column("t");
    TimeSeries ts;
    ts.values = table.numeric_column(column);
    if (t.empty()) return ts;
    ts.t0 = t.front();
    ts.dt = t.size() > 1 ? t[1] - t[0] : 1.0;
    for (std::size_t i = 1; i < t.size(); ++i)
        if (t[i] - t[i - 1] != ts.dt) throw ValidationError("t", "rows are not uniformly spaced");
    return ts;
}

double mean_defined(const std::vector<double>& v) {
    double sum = 0.0;
    std::size_t n = 0;
    for (double x : v)
        if (!std::isnan(x)) {
            sum += x;
            ++n;
        }
    return n ? sum / static_cast<double>(n) : std::nan("");
}

void make_directory(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw IoError("cannot create directory " + dir.string());
}

}  // namespace

fs::path analyze_outputs(const fs::path& input, const AnalyzeOptions& options) {
    const Manifest manifest = read_manifest(input);
    const fs::path out_dir = options.output_dir ? *options.output_dir : input / "analysis";

    std::vector<ManifestRun> runs;
    for (const auto& r : manifest.runs)
        if (!r.directory.empty()) runs.push_back(r);
    if (runs.empty()) throw PreconditionError("no per-run outputs in " + input.string());
    make_directory(out_dir);

    csv::Writer fits(out_dir / "census_fit.csv");
    fits.row({"sweep_index", "run", "form", "exponent_or_rate", "fit_quality", "exponential_r2", "power_law_r2"});
    csv::Writer diagnostics(out_dir / "diagnostics.csv");
    diagnostics.row({"sweep_index", "run", "cycles", "period_mean", "corr_live_fraction_half_price"});

    std::vector<double> live_means, price_means, capital_means, unsatisfied_means, period_means;
    for (const auto& run : runs) {
        const fs::path run_dir = input / run.directory;
        const auto table = csv::read(run_dir / "timeseries.csv");
        for (const auto& c : timeseries_columns) table.column(c);
        const TimeSeries series = series_from(table, options.column);

        PeriodDistribution periods;
        try {
            periods = period_lengths(series, options.window, options.mode);
        } catch (const InsufficientCyclesError& e) {
            throw InsufficientCyclesError(run.directory + ": " + e.what());
        }
        const auto summary = periods.summary();
        make_directory(out_dir / run.directory);
        {
            csv::Writer w(out_dir / run.directory / "periods.csv");
            w.row({"kind", "length", "count", "mean", "variance", "skewness"});
            for (double len : periods.lengths) w.row({"cycle", csv::format(len), "", "", "", ""});
            w.row({"summary", "", std::to_string(summary.count), csv::format(summary.mean),
                   csv::format(summary.variance), csv::format(summary.skewness)});
            w.close();
        }
        {
            const auto h = periods.histogram(options.period_bin);
            csv::Writer w(out_dir / run.directory / "period_histogram.csv");
            w.row({"bin_lower", "bin_upper", "count"});
            for (std::size_t k = 0; k < h.counts.size(); ++k)
                w.row({csv::format(static_cast<double>(k) * h.bin_width),
                       csv::format(static_cast<double>(k + 1) * h.bin_width), csv::format(h.counts[k])});
            w.close();
        }

        const auto census_table = csv::read(run_dir / "census.csv");
        const auto ct = census_table.numeric_column("t");
        const auto cc = census_table.numeric_column("distinct_labels");
        AncestorCensusSeries census;
        for (std::size_t i = 0; i < ct.size(); ++i)
            census.push_back({static_cast<std::uint64_t>(ct[i]), static_cast<std::size_t>(cc[i])});
        DecayFit fit;
        try {
            fit = classify_decay(census, options.census);
        } catch (const PreconditionError& e) {
            throw PreconditionError(run.directory + ": " + e.what());
        }
        fits.row({std::to_string(run.sweep_index), std::to_string(run.run), to_string(fit.form),
                  csv::format(fit.exponent_or_rate), csv::format(fit.fit_quality), csv::format(fit.exponential_r2),
                  csv::format(fit.power_law_r2)});

        const auto live = table.numeric_column("live_fraction");
        const auto price = table.numeric_column("mean_price");
        std::vector<double> a, half_price;
        for (std::size_t i = 0; i < live.size(); ++i)
            if (!std::isnan(price[i])) {
                a.push_back(live[i]);
                half_price.push_back(price[i] / 2.0);
            }
        diagnostics.row({std::to_string(run.sweep_index), std::to_string(run.run), std::to_string(summary.count),
                         csv::format(summary.mean), csv::format(correlation(a, half_price))});

        live_means.push_back(mean_defined(live));
        price_means.push_back(mean_defined(price));
        capital_means.push_back(mean_defined(table.numeric_column("mean_capital")));
        unsatisfied_means.push_back(mean_defined(table.numeric_column("unsatisfied_demand")));
        period_means.push_back(summary.mean);
    }
    fits.close();
    diagnostics.close();

    if (runs.size() >= 2) {
        csv::Writer w(out_dir / "ensemble.csv");
        w.row({"metric", "mean", "std", "standard_error", "runs"});
        const std::pair<const char*, const std::vector<double>*> metrics[] = {
            {"live_fraction", &live_means},           {"mean_price", &price_means},
            {"mean_capital", &capital_means},         {"unsatisfied_demand", &unsatisfied_means},
            {"period_mean", &period_means}};
        for (const auto& [name, values] : metrics) {
            const auto s = ensemble_stats(*values);
            w.row({name, csv::format(s.mean), csv::format(s.std), csv::format(s.standard_error),
                   std::to_string(values->size())});
        }
        w.close();
    }
    return out_dir;
}

ReplayReport replay_check(const fs::path& dir, const fs::path& scratch) {
    const Manifest recorded = read_manifest(dir);
    ExperimentSpec spec = recorded.spec;
    spec.output_dir = scratch;
    const Manifest rerun = recorded.command == "sweep" ? run_sweep(spec) : run_experiment(spec);

    auto slurp = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        if (!in) throw IoError("cannot read " + p.string());
        return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    };

    ReplayReport report;
    for (const auto& f : recorded.files) {
        report.compared.push_back(f.path);
        if (!fs::exists(scratch / f.path) || slurp(dir / f.path) != slurp(scratch / f.path))
            report.mismatched.push_back(f.path);
    }
    for (const auto& f : rerun.files) {
        const bool listed = std::any_of(recorded.files.begin(), recorded.files.end(),
                                        [&](const ManifestFile& r) { return r.path == f.path; });
        if (!listed) report.mismatched.push_back(f.path + " (not in recorded manifest)");
    }
    return report;
}

}  // namespace bbsim
