#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "bbsim/analysis.hpp"
#include "bbsim/lineage.hpp"
#include "bbsim/market.hpp"
#include "bbsim/params.hpp"

namespace bbsim {

const char* code_version();

// Sweep axes; an empty axis keeps the base value. Points are enumerated with
// policy outermost, then gamma, delta, coupling and memory innermost.
struct SweepAxes {
    std::vector<PricePolicy> policies;
    std::vector<double> gammas;
    std::vector<double> deltas;
    std::vector<double> couplings;
    std::vector<std::uint32_t> memories;

    friend bool operator==(const SweepAxes&, const SweepAxes&) = default;
};

struct ExperimentSpec {
    ModelParams base;  // base.seed is the master seed
    std::uint32_t run_count = 1;
    std::uint64_t timesteps = 1000;
    std::uint64_t warmup = 0;      // leading steps left out of the time series
    std::uint64_t stride = 1;      // record every stride-th step
    std::uint64_t histogram_stride = 1000;
    double histogram_bin = 0.02;
    std::size_t period_window = 40;
    SweepAxes axes;
    std::filesystem::path output_dir = "out";
    unsigned jobs = 1;
    bool checkpoint = false;       // write an end-state checkpoint per run
    bool keep_series = false;      // sweeps: also write per-run files
    std::optional<std::filesystem::path> resume_from;

    void validate() const;
    std::vector<ModelParams> sweep_points() const;
};

// Post-warmup aggregates of one run.
struct RunSummary {
    std::uint32_t sweep_index = 0;
    std::uint32_t run = 0;
    ModelParams params;
    double mean_live_fraction = 0.0;
    double mean_price = 0.0;      // time average over steps with a live seller
    double std_mean_price = 0.0;  // standard deviation of the mean-price series
    double mean_capital = 0.0;
    double mean_unsatisfied = 0.0;
    // Cycle lengths of the live-fraction series; empty when too few extrema.
    std::vector<double> gap_lengths;
    std::vector<double> peak_lengths;
};

struct RunOutput {
    std::vector<StepMetrics> series;
    AncestorCensusSeries census;
    PriceHistogram histogram;
    std::vector<FranchiseRecord> franchises;
    MarketState final_state;
    RunSummary summary;
};

// Runs one simulation according to the recording rules of `spec`. Starts from
// `initial` when given, otherwise from init_state(params).
RunOutput simulate(const ModelParams& params, const ExperimentSpec& spec,
                   std::optional<MarketState> initial = std::nullopt);

RunSummary summarize_run(const std::vector<StepMetrics>& series, std::size_t period_window);

struct ManifestRun {
    std::uint32_t sweep_index = 0;
    std::uint32_t run = 0;
    std::uint64_t seed = 0;
    std::string directory;  // empty when no per-run files were written
};

struct ManifestFile {
    std::string path;  // relative to the output directory
    std::uint64_t bytes = 0;
    std::string fnv1a64;
};

struct Manifest {
    std::string command;  // "run" or "sweep"
    ExperimentSpec spec;
    std::string code_version;
    std::string created;
    std::vector<ManifestRun> runs;
    std::vector<ManifestFile> files;
};

inline constexpr const char* manifest_name = "manifest.json";

std::string manifest_to_json(const Manifest& m);
Manifest manifest_from_json(const std::string& text);
Manifest read_manifest(const std::filesystem::path& dir);

// Executes `run_count` replicates of spec.base and writes per-run
// timeseries, census, histogram and franchise tables plus runs.csv and the
// manifest. Runs execute on spec.jobs threads; output is independent of it.
Manifest run_experiment(const ExperimentSpec& spec);

// Executes every sweep point run_count times and writes sweep_runs.csv,
// sweep_summary.csv and, when deltas are swept, variance_vs_delta.csv.
Manifest run_sweep(const ExperimentSpec& spec);

struct AnalyzeOptions {
    std::size_t window = 40;
    PeriodMode mode = PeriodMode::extremum_gap;
    std::string column = "live_fraction";
    double period_bin = 10.0;
    DecayFitOptions census;
    std::optional<std::filesystem::path> output_dir;  // default <input>/analysis
};

// Derived tables for a `run` output directory: per-run periods.csv and
// period_histogram.csv, census_fit.csv, diagnostics.csv, and ensemble.csv
// when there are at least two runs. Returns the output directory.
std::filesystem::path analyze_outputs(const std::filesystem::path& input, const AnalyzeOptions& options);

struct ReplayReport {
    std::vector<std::string> compared;
    std::vector<std::string> mismatched;
    bool ok() const { return mismatched.empty(); }
};

// Reruns the experiment recorded in `dir`/manifest.json into `scratch` and
// compares every recorded data file byte for byte.
ReplayReport replay_check(const std::filesystem::path& dir, const std::filesystem::path& scratch);

std::string fnv1a64_hex(const std::filesystem::path& file);

}  // namespace bbsim
