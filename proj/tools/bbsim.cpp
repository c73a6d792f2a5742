// Command-line front end: run, sweep, analyze, replay-check.
//
// Exit codes: 0 success, 1 replay mismatch, 2 validation error,
// 3 I/O error, 4 analysis precondition failure.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <unistd.h>

#include "CLI11.hpp"
#include "bbsim/errors.hpp"
#include "bbsim/harness.hpp"

namespace fs = std::filesystem;
using namespace bbsim;

namespace {

constexpr int exit_mismatch = 1;
constexpr int exit_validation = 2;
constexpr int exit_io = 3;
constexpr int exit_precondition = 4;

template <class T>
T parse_or_throw(const std::string& text, const char* flag, std::optional<T> (*parse)(std::string_view)) {
    const auto value = parse(text);
    if (!value) throw ValidationError(flag, "unknown value '" + text + "'");
    return *value;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Continuous-time buyer/seller ring market simulator"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config", "", "Flat key=value file; command-line flags take precedence");

    ExperimentSpec spec;
    auto& p = spec.base;
    std::string out_dir = "out";
    std::string resume;

    app.add_option("--n", p.n_sellers, "Number of seller sites N")->capture_default_str();
    app.add_option("--gamma", p.gamma, "Repopulation probability")->capture_default_str();
    app.add_option("--delta", p.delta, "Mutation half-width")->capture_default_str();
    app.add_option("--overhead", p.overhead, "Overhead paid per draw")->capture_default_str();
    app.add_option("--p-max", p.p_max, "Initial prices are uniform on [0, p-max)")->capture_default_str();
    std::string scheme = "continuous", policy = "evolving", overhead_pool = "sites", source_draw = "sites";
    app.add_option("--scheme", scheme, "Update scheme: continuous | discrete")->capture_default_str();
    app.add_option("--policy", policy, "Price policy: evolving | bertrand_fixed")->capture_default_str();
    app.add_option("--overhead-pool", overhead_pool, "Overhead draw ranges over: sites | live")
        ->capture_default_str();
    app.add_option("--source-draw", source_draw, "Copy source drawn over: sites | live")->capture_default_str();
    app.add_option("--islands", p.island_count, "Number of islands M")->capture_default_str();
    app.add_option("--coupling", p.coupling, "Probability c of copying from the whole system")
        ->capture_default_str();
    app.add_option("--memory", p.memory_length, "Per-site price memory length m")->capture_default_str();
    app.add_option("--seed", p.seed, "Master seed")->capture_default_str();
    app.add_option("--steps", spec.timesteps, "Timesteps per run, warmup included")->capture_default_str();
    app.add_option("--warmup", spec.warmup, "Leading steps left out of the time series")->capture_default_str();
    app.add_option("--runs", spec.run_count, "Runs per configuration")->capture_default_str();
    app.add_option("--stride", spec.stride, "Record every stride-th step")->capture_default_str();
    app.add_option("--hist-stride", spec.histogram_stride, "Spacing of histogram snapshots")->capture_default_str();
    app.add_option("--hist-bin", spec.histogram_bin, "Price histogram bin width")->capture_default_str();
    app.add_option("--window", spec.period_window, "Moving-average window for period extraction")
        ->capture_default_str();
    app.add_option("--jobs", spec.jobs, "Concurrent runs")->capture_default_str();
    app.add_option("--out", out_dir, "Output directory")->capture_default_str();
    app.add_flag("--checkpoint", spec.checkpoint, "Write an end-state checkpoint for every run");

    auto* run_cmd = app.add_subcommand("run", "Run replicates of one configuration");
    run_cmd->add_option("--resume", resume, "Continue from a checkpoint file");

    auto* sweep_cmd = app.add_subcommand("sweep", "Run every point of a parameter grid");
    sweep_cmd->add_option("--gammas", spec.axes.gammas, "Comma-separated gamma values")->delimiter(',');
    sweep_cmd->add_option("--deltas", spec.axes.deltas, "Comma-separated delta values")->delimiter(',');
    sweep_cmd->add_option("--couplings", spec.axes.couplings, "Comma-separated coupling values")->delimiter(',');
    sweep_cmd->add_option("--memories", spec.axes.memories, "Comma-separated memory lengths")->delimiter(',');
    std::vector<std::string> policies;
    sweep_cmd->add_option("--policies", policies, "Comma-separated price policies")->delimiter(',');
    sweep_cmd->add_flag("--keep-series", spec.keep_series, "Also write per-run tables");

    AnalyzeOptions analyze;
    std::string analyze_in;
    std::string analyze_out;
    auto* analyze_cmd = app.add_subcommand("analyze", "Derive period, census and ensemble tables from a run");
    analyze_cmd->add_option("--in", analyze_in, "Directory written by `run`")->required();
    analyze_cmd->add_option("--analysis-out", analyze_out, "Output directory (default <in>/analysis)");
    analyze_cmd->add_option("--mode", analyze.mode, "Period measure")
        ->transform(CLI::CheckedTransformer(std::map<std::string, PeriodMode>{
            {"extremum_gap", PeriodMode::extremum_gap}, {"peak_to_peak", PeriodMode::peak_to_peak}}))
        ->default_str("extremum_gap");
    analyze_cmd->add_option("--column", analyze.column, "Time-series column for periods")->capture_default_str();
    analyze_cmd->add_option("--period-bin", analyze.period_bin, "Period histogram bin width")->capture_default_str();
    analyze_cmd->add_option("--cutoff", analyze.census.transient_cutoff, "Census fit transient cutoff")
        ->capture_default_str();
    analyze_cmd->add_option("--min-r2", analyze.census.min_r2, "Census fit quality threshold")
        ->capture_default_str();

    std::string replay_in;
    std::string replay_scratch;
    auto* replay_cmd = app.add_subcommand("replay-check", "Rerun a recorded experiment and compare outputs");
    replay_cmd->add_option("--in", replay_in, "Directory holding manifest.json")->required();
    replay_cmd->add_option("--scratch", replay_scratch, "Where to write the rerun (default: temporary)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return exit_validation;
    }

    try {
        p.scheme = parse_or_throw(scheme, "scheme", parse_scheme);
        p.price_policy = parse_or_throw(policy, "policy", parse_price_policy);
        p.overhead_pool = parse_or_throw(overhead_pool, "overhead-pool", parse_overhead_pool);
        p.source_draw = parse_or_throw(source_draw, "source-draw", parse_source_draw);
        for (const auto& text : policies)
            spec.axes.policies.push_back(parse_or_throw(text, "policies", parse_price_policy));
        spec.output_dir = out_dir;
        if (!resume.empty()) spec.resume_from = fs::absolute(resume);

        if (*run_cmd) {
            const auto m = run_experiment(spec);
            std::cout << "wrote " << m.files.size() << " files to " << spec.output_dir.string() << "\n";
        } else if (*sweep_cmd) {
            const auto m = run_sweep(spec);
            std::cout << "wrote " << m.files.size() << " files to " << spec.output_dir.string() << "\n";
        } else if (*analyze_cmd) {
            analyze.window = spec.period_window;
            if (!analyze_out.empty()) analyze.output_dir = analyze_out;
            const auto dir = analyze_outputs(analyze_in, analyze);
            std::cout << "wrote analysis to " << dir.string() << "\n";
        } else if (*replay_cmd) {
            fs::path scratch = replay_scratch;
            const bool temporary = scratch.empty();
            if (temporary) {
                scratch = fs::temp_directory_path() / ("bbsim-replay-" + std::to_string(::getpid()));
                fs::remove_all(scratch);
            }
            const auto report = replay_check(replay_in, scratch);
            if (temporary) fs::remove_all(scratch);
            for (const auto& f : report.compared) {
                const bool bad = std::find(report.mismatched.begin(), report.mismatched.end(), f) !=
                                 report.mismatched.end();
                std::cout << (bad ? "MISMATCH " : "ok       ") << f << "\n";
            }
            for (const auto& f : report.mismatched)
                if (std::find(report.compared.begin(), report.compared.end(), f) == report.compared.end())
                    std::cout << "MISMATCH " << f << "\n";
            std::cout << (report.ok() ? "replay identical" : "replay differs") << " (" << report.compared.size()
                      << " files)\n";
            return report.ok() ? 0 : exit_mismatch;
        }
    } catch (const ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return exit_validation;
    } catch (const PreconditionError& e) {
        std::cerr << "analysis precondition failed: " << e.what() << "\n";
        return exit_precondition;
    } catch (const IoError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return exit_io;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return exit_io;
    }
    return 0;
}
