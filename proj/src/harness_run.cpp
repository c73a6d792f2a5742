#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <thread>

#include "bbsim/checkpoint.hpp"
#include "bbsim/csv.hpp"
#include "bbsim/errors.hpp"
#include "bbsim/harness.hpp"
#include "bbsim/seed.hpp"

#ifndef BBSIM_VERSION
#define BBSIM_VERSION "unknown"
#endif

namespace bbsim {

namespace fs = std::filesystem;

const char* code_version() { return BBSIM_VERSION; }

void ExperimentSpec::validate() const {
    if (run_count < 1) throw ValidationError("runs", "must be at least 1");
    if (timesteps < 1) throw ValidationError("steps", "must be at least 1");
    if (warmup >= timesteps) throw ValidationError("warmup", "must be smaller than steps");
    if (stride < 1) throw ValidationError("stride", "must be at least 1");
    if (histogram_stride < 1) throw ValidationError("hist-stride", "must be at least 1");
    if (!(histogram_bin > 0.0)) throw ValidationError("hist-bin", "must be positive");
    if (period_window < 1) throw ValidationError("window", "must be at least 1");
    if (jobs < 1) throw ValidationError("jobs", "must be at least 1");
    if (resume_from && run_count != 1) throw ValidationError("resume", "resuming supports a single run");
    for (const auto& p : sweep_points()) p.validate();
}

std::vector<ModelParams> ExperimentSpec::sweep_points() const {
    auto axis = [](const auto& values, auto base) {
        using T = decltype(base);
        return values.empty() ? std::vector<T>{base} : std::vector<T>(values.begin(), values.end());
    };
    std::vector<ModelParams> points;
    for (auto policy : axis(axes.policies, base.price_policy))
        for (double gamma : axis(axes.gammas, base.gamma))
            for (double delta : axis(axes.deltas, base.delta))
                for (double coupling : axis(axes.couplings, base.coupling))
                    for (std::uint32_t memory : axis(axes.memories, base.memory_length)) {
                        ModelParams p = base;
                        p.price_policy = policy;
                        p.gamma = gamma;
                        p.delta = delta;
                        p.coupling = coupling;
                        p.memory_length = memory;
                        points.push_back(p);
                    }
    return points;
}

RunSummary summarize_run(const std::vector<StepMetrics>& series, std::size_t period_window) {
    RunSummary s;
    if (series.empty()) return s;
    double live = 0.0, unsatisfied = 0.0, price = 0.0, price_sq = 0.0, capital = 0.0;
    std::size_t priced = 0;
    for (const auto& m : series) {
        live += m.live_fraction;
        unsatisfied += m.unsatisfied_demand;
        if (m.mean_price) {
            price += *m.mean_price;
            capital += *m.mean_capital;
            ++priced;
        }
    }
    const auto n = static_cast<double>(series.size());
    s.mean_live_fraction = live / n;
    s.mean_unsatisfied = unsatisfied / n;
    if (priced > 0) {
        s.mean_price = price / static_cast<double>(priced);
        s.mean_capital = capital / static_cast<double>(priced);
        for (const auto& m : series)
            if (m.mean_price) price_sq += (*m.mean_price - s.mean_price) * (*m.mean_price - s.mean_price);
        s.std_mean_price = priced > 1 ? std::sqrt(price_sq / static_cast<double>(priced - 1)) : 0.0;
    } else {
        s.mean_price = s.mean_capital = std::nan("");
    }

    TimeSeries ts;
    ts.t0 = static_cast<double>(series.front().t);
    ts.dt = series.size() > 1 ? static_cast<double>(series[1].t - series[0].t) : 1.0;
    ts.values.reserve(series.size());
    for (const auto& m : series) ts.values.push_back(m.live_fraction);
    if (ts.size() >= period_window + 2) {
        try {
            s.gap_lengths = period_lengths(ts, period_window, PeriodMode::extremum_gap).lengths;
            s.peak_lengths = period_lengths(ts, period_window, PeriodMode::peak_to_peak).lengths;
        } catch (const InsufficientCyclesError&) {
        }
    }
    return s;
}

RunOutput simulate(const ModelParams& params, const ExperimentSpec& spec, std::optional<MarketState> initial) {
    RunOutput out;
    MarketState state = initial ? std::move(*initial) : init_state(params);
    PriceHistogramAccumulator histogram(spec.histogram_bin);

    out.census.push_back({state.t, ancestor_census(state)});
    for (std::uint64_t k = 1; k <= spec.timesteps; ++k) {
        StepMetrics m = step(state);
        if (k > spec.warmup && (k - spec.warmup - 1) % spec.stride == 0) out.series.push_back(std::move(m));
        if (k % spec.stride == 0) out.census.push_back({state.t, ancestor_census(state)});
        // Snapshots are spaced back from the final step, so the end state is always included.
        if (k > spec.warmup && (spec.timesteps - k) % spec.histogram_stride == 0) histogram.add(state);
    }
    out.histogram = histogram.result();
    out.franchises = franchise_table(state);
    out.summary = summarize_run(out.series, spec.period_window);
    out.summary.params = state.params;
    out.final_state = std::move(state);
    return out;
}

namespace {

template <class Fn>
void parallel_for(std::size_t count, unsigned jobs, Fn&& fn) {
    if (jobs <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(count);
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next++;
            if (i >= count) return;
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    {
        std::vector<std::jthread> pool;
        for (unsigned j = 0; j < std::min<std::size_t>(jobs, count); ++j) pool.emplace_back(worker);
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

void make_directory(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw IoError("cannot create directory " + dir.string());
}

std::string numbered(const char* prefix, std::size_t index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s_%04zu", prefix, index);
    return buf;
}

std::string u64_string(std::uint64_t v) { return std::to_string(v); }

// Writes the per-run tables into `dir` and returns their names.
std::vector<std::string> write_run_files(const RunOutput& out, const fs::path& dir, bool checkpoint) {
    make_directory(dir);
    std::vector<std::string> names;

    {
        const auto islands = out.final_state.params.island_count;
        csv::Writer w(dir / "timeseries.csv");
        std::vector<std::string> header{"t",      "live_fraction", "mean_price", "mean_capital", "unsatisfied_demand",
                                        "births", "deaths",        "revenue",    "overheads"};
        if (islands > 1)
            for (std::size_t k = 0; k < islands; ++k) header.push_back("island_" + std::to_string(k) + "_mean_price");
        w.row(header);
        for (const auto& m : out.series) {
            std::vector<std::string> row{u64_string(m.t),          csv::format(m.live_fraction),
                                         csv::format(m.mean_price), csv::format(m.mean_capital),
                                         csv::format(m.unsatisfied_demand), u64_string(m.births),
                                         u64_string(m.deaths),      csv::format(m.revenue),
                                         csv::format(m.overhead_cost)};
            for (const auto& p : m.island_mean_price) row.push_back(csv::format(p));
            w.row(row);
        }
        w.close();
        names.push_back("timeseries.csv");
    }
    {
        csv::Writer w(dir / "census.csv");
        w.row({"t", "distinct_labels"});
        for (const auto& c : out.census) w.row({u64_string(c.t), u64_string(c.distinct_labels)});
        w.close();
        names.push_back("census.csv");
    }
    {
        csv::Writer w(dir / "histogram.csv");
        w.row({"bin_lower", "bin_upper", "density", "standard_error", "snapshots"});
        const auto& h = out.histogram;
        for (std::size_t k = 0; k < h.density.size(); ++k)
            w.row({csv::format(h.bin_lower(k)), csv::format(h.bin_lower(k + 1)), csv::format(h.density[k]),
                   csv::format(h.standard_error[k]), u64_string(h.snapshots)});
        w.close();
        names.push_back("histogram.csv");
    }
    {
        csv::Writer w(dir / "franchises.csv");
        w.row({"label", "size_fraction", "mean_price"});
        for (const auto& f : out.franchises)
            w.row({u64_string(f.label), csv::format(f.size_fraction), csv::format(f.mean_price)});
        w.close();
        names.push_back("franchises.csv");
    }
    if (checkpoint) {
        save_checkpoint(out.final_state, dir / "checkpoint.bin");
        names.push_back("checkpoint.bin");
    }
    return names;
}

std::vector<std::string> summary_fields(const RunSummary& s) {
    return {csv::format(s.mean_live_fraction), csv::format(s.mean_price), csv::format(s.std_mean_price),
            csv::format(s.mean_capital), csv::format(s.mean_unsatisfied)};
}

std::string utc_now() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void finish_manifest(Manifest& m, const fs::path& dir, const std::vector<std::string>& files) {
    m.code_version = code_version();
    m.created = utc_now();
    for (const auto& f : files) {
        const fs::path p = dir / f;
        m.files.push_back({f, static_cast<std::uint64_t>(fs::file_size(p)), fnv1a64_hex(p)});
    }
    std::ofstream out(dir / manifest_name, std::ios::trunc);
    out << manifest_to_json(m);
    if (!out) throw IoError("cannot write manifest in " + dir.string());
}

std::string stats_or_nan(const std::vector<double>& v, bool se) {
    if (v.size() < 2) return "nan";
    const auto s = ensemble_stats(v);
    return csv::format(se ? s.standard_error : s.mean);
}

}  // namespace

Manifest run_experiment(const ExperimentSpec& spec) {
    spec.validate();
    make_directory(spec.output_dir);

    std::optional<MarketState> resumed;
    if (spec.resume_from) resumed = load_checkpoint(*spec.resume_from);

    const std::uint64_t master = spec.base.seed;
    Manifest manifest;
    manifest.command = "run";
    manifest.spec = spec;
    manifest.runs.resize(spec.run_count);
    std::vector<RunSummary> summaries(spec.run_count);
    std::vector<std::vector<std::string>> files(spec.run_count);

    parallel_for(spec.run_count, spec.jobs, [&](std::size_t k) {
        ModelParams params = spec.base;
        params.seed = derive_seed(master, static_cast<std::uint32_t>(k), 0);
        if (resumed) params = resumed->params;
        const std::string dir = numbered("run", k);
        RunOutput out = simulate(params, spec, resumed);
        files[k] = write_run_files(out, spec.output_dir / dir, spec.checkpoint);
        for (auto& f : files[k]) f = dir + "/" + f;
        summaries[k] = out.summary;
        summaries[k].run = static_cast<std::uint32_t>(k);
        manifest.runs[k] = {0, static_cast<std::uint32_t>(k), params.seed, dir};
    });

    csv::Writer w(spec.output_dir / "runs.csv");
    w.row({"run", "seed", "mean_live_fraction", "mean_price", "std_mean_price", "mean_capital",
           "mean_unsatisfied_demand"});
    for (const auto& s : summaries) {
        std::vector<std::string> row{u64_string(s.run), u64_string(s.params.seed)};
        for (auto& f : summary_fields(s)) row.push_back(std::move(f));
        w.row(row);
    }
    w.close();

    std::vector<std::string> inventory;
    for (const auto& f : files) inventory.insert(inventory.end(), f.begin(), f.end());
    inventory.push_back("runs.csv");
    finish_manifest(manifest, spec.output_dir, inventory);
    return manifest;
}

Manifest run_sweep(const ExperimentSpec& spec) {
    spec.validate();
    make_directory(spec.output_dir);

    const auto points = spec.sweep_points();
    const std::size_t runs = spec.run_count;
    const std::size_t total = points.size() * runs;
    const std::uint64_t master = spec.base.seed;

    Manifest manifest;
    manifest.command = "sweep";
    manifest.spec = spec;
    manifest.runs.resize(total);
    std::vector<RunSummary> summaries(total);
    std::vector<std::vector<std::string>> files(total);

    parallel_for(total, spec.jobs, [&](std::size_t index) {
        const auto point = static_cast<std::uint32_t>(index / runs);
        const auto run = static_cast<std::uint32_t>(index % runs);
        ModelParams params = points[point];
        params.seed = derive_seed(master, run, point);
        RunOutput out = simulate(params, spec);
        std::string dir;
        if (spec.keep_series) {
            dir = numbered("point", point) + "/" + numbered("run", run);
            files[index] = write_run_files(out, spec.output_dir / dir, spec.checkpoint);
            for (auto& f : files[index]) f = dir + "/" + f;
        }
        summaries[index] = std::move(out.summary);
        summaries[index].sweep_index = point;
        summaries[index].run = run;
        manifest.runs[index] = {point, run, params.seed, dir};
    });

    auto point_fields = [](const ModelParams& p) {
        return std::vector<std::string>{std::string(to_string(p.price_policy)), csv::format(p.gamma),
                                        csv::format(p.delta), csv::format(p.coupling),
                                        u64_string(p.memory_length)};
    };

    {
        csv::Writer w(spec.output_dir / "sweep_runs.csv");
        w.row({"sweep_index", "run", "seed", "policy", "gamma", "delta", "coupling", "memory", "mean_live_fraction",
               "mean_price", "std_mean_price", "mean_capital", "mean_unsatisfied_demand", "cycles"});
        for (const auto& s : summaries) {
            std::vector<std::string> row{u64_string(s.sweep_index), u64_string(s.run), u64_string(s.params.seed)};
            for (auto& f : point_fields(s.params)) row.push_back(std::move(f));
            for (auto& f : summary_fields(s)) row.push_back(std::move(f));
            row.push_back(u64_string(s.gap_lengths.size()));
            w.row(row);
        }
        w.close();
    }

    std::vector<PeriodDistribution> pooled_gap(points.size()), pooled_peak(points.size());
    {
        csv::Writer w(spec.output_dir / "sweep_summary.csv");
        w.row({"sweep_index", "policy", "gamma", "delta", "coupling", "memory", "runs", "unsatisfied_mean",
               "unsatisfied_se", "mean_price_mean", "mean_price_se", "std_price_mean", "std_price_se",
               "live_fraction_mean", "live_fraction_se", "gap_count", "gap_mean", "gap_variance", "gap_skewness",
               "peak_count", "peak_mean", "peak_variance"});
        for (std::size_t p = 0; p < points.size(); ++p) {
            std::vector<double> unsatisfied, price, spread, live;
            for (std::size_t r = 0; r < runs; ++r) {
                const auto& s = summaries[p * runs + r];
                unsatisfied.push_back(s.mean_unsatisfied);
                price.push_back(s.mean_price);
                spread.push_back(s.std_mean_price);
                live.push_back(s.mean_live_fraction);
                pooled_gap[p].lengths.insert(pooled_gap[p].lengths.end(), s.gap_lengths.begin(), s.gap_lengths.end());
                pooled_peak[p].lengths.insert(pooled_peak[p].lengths.end(), s.peak_lengths.begin(),
                                              s.peak_lengths.end());
            }
            auto mean_of = [](const std::vector<double>& v) {
                double sum = 0.0;
                for (double x : v) sum += x;
                return csv::format(sum / static_cast<double>(v.size()));
            };
            const auto gap = pooled_gap[p].summary();
            const auto peak = pooled_peak[p].summary();
            std::vector<std::string> row{u64_string(p)};
            for (auto& f : point_fields(points[p])) row.push_back(std::move(f));
            row.push_back(u64_string(runs));
            for (const auto* v : {&unsatisfied, &price, &spread, &live}) {
                row.push_back(mean_of(*v));
                row.push_back(stats_or_nan(*v, true));
            }
            row.insert(row.end(), {u64_string(gap.count), csv::format(gap.mean), csv::format(gap.variance),
                                   csv::format(gap.skewness), u64_string(peak.count), csv::format(peak.mean),
                                   csv::format(peak.variance)});
            w.row(row);
        }
        w.close();
    }

    std::vector<std::string> inventory;
    for (const auto& f : files) inventory.insert(inventory.end(), f.begin(), f.end());
    inventory.push_back("sweep_runs.csv");
    inventory.push_back("sweep_summary.csv");

    if (!spec.axes.deltas.empty()) {
        std::vector<std::pair<double, PeriodDistribution>> by_delta;
        for (std::size_t p = 0; p < points.size(); ++p) by_delta.emplace_back(points[p].delta, pooled_gap[p]);
        const auto table = variance_vs_delta(by_delta);
        csv::Writer w(spec.output_dir / "variance_vs_delta.csv");
        w.row({"sweep_index", "policy", "gamma", "delta", "coupling", "memory", "period_variance",
               "peak_period_variance"});
        for (std::size_t p = 0; p < points.size(); ++p) {
            std::vector<std::string> row{u64_string(p)};
            for (auto& f : point_fields(points[p])) row.push_back(std::move(f));
            row.push_back(csv::format(table[p].variance));
            row.push_back(csv::format(pooled_peak[p].summary().variance));
            w.row(row);
        }
        w.close();
        inventory.push_back("variance_vs_delta.csv");
    }

    finish_manifest(manifest, spec.output_dir, inventory);
    return manifest;
}

}  // namespace bbsim
