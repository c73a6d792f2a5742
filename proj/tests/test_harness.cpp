#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "bbsim/checkpoint.hpp"
#include "bbsim/csv.hpp"
#include "bbsim/harness.hpp"
#include "bbsim/seed.hpp"
#include "support.hpp"

using namespace bbsim;
namespace fs = std::filesystem;
using testing::scratch_dir;
using testing::slurp;

namespace {

ExperimentSpec small_spec(const fs::path& out) {
    ExperimentSpec spec;
    spec.base.n_sellers = 300;
    spec.base.gamma = 0.7;
    spec.base.seed = 5;
    spec.run_count = 3;
    spec.timesteps = 400;
    spec.warmup = 50;
    spec.histogram_stride = 100;
    spec.output_dir = out;
    return spec;
}

std::vector<std::string> data_files(const Manifest& m) {
    std::vector<std::string> out;
    for (const auto& f : m.files) out.push_back(f.path);
    return out;
}

int cli(const std::string& args) {
    const std::string cmd = std::string(BBSIM_CLI) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("derived seeds are pure and distinct") {
    CHECK(derive_seed(1, 2, 3) == derive_seed(1, 2, 3));
    std::vector<std::uint64_t> seeds;
    seeds.reserve(1u << 20);
    for (std::uint32_t r = 0; r < (1u << 20); ++r) seeds.push_back(derive_seed(42, r, 0));
    for (std::uint32_t s = 1; s < 64; ++s)
        for (std::uint32_t r = 0; r < 1024; ++r) seeds.push_back(derive_seed(42, r, s));
    std::sort(seeds.begin(), seeds.end());
    CHECK(std::adjacent_find(seeds.begin(), seeds.end()) == seeds.end());

    Rng rng(1);
    int equal = 0;
    for (int k = 0; k < 1'000'000; ++k) {
        const auto m = rng.next_u64();
        equal += derive_seed(m, 0, 0) == derive_seed(m, 1, 0);
    }
    CHECK(equal == 0);
}

TEST_CASE("a 5000-step run writes 5000 time-series rows") {
    const auto dir = scratch_dir("rows");
    ExperimentSpec spec;
    spec.base.n_sellers = 10'000;
    spec.base.gamma = 0.7;
    spec.base.delta = 0.04;
    spec.timesteps = 5000;
    spec.output_dir = dir;
    const auto m = run_experiment(spec);
    const auto table = csv::read(dir / m.runs.at(0).directory / "timeseries.csv");
    CHECK(table.rows.size() == 5000);
    CHECK(table.header == std::vector<std::string>{"t", "live_fraction", "mean_price", "mean_capital",
                                                   "unsatisfied_demand", "births", "deaths", "revenue",
                                                   "overheads"});
    CHECK(table.rows.front().at(0) == "1");
    CHECK(table.rows.back().at(0) == "5000");
}

TEST_CASE("warmup and stride select the recorded steps") {
    const auto dir = scratch_dir("stride");
    auto spec = small_spec(dir);
    spec.run_count = 1;
    spec.timesteps = 100;
    spec.warmup = 10;
    spec.stride = 7;
    const auto m = run_experiment(spec);
    const auto t = csv::read(dir / m.runs.at(0).directory / "timeseries.csv").numeric_column("t");
    REQUIRE(!t.empty());
    CHECK(t.front() == 11.0);
    for (std::size_t i = 1; i < t.size(); ++i) CHECK(t[i] - t[i - 1] == 7.0);
    CHECK(t.size() == 13);
}

TEST_CASE("identical specs give byte-identical data files") {
    const auto a = scratch_dir("same_a");
    const auto b = scratch_dir("same_b");
    const auto ma = run_experiment(small_spec(a));
    const auto mb = run_experiment(small_spec(b));
    REQUIRE(data_files(ma) == data_files(mb));
    for (const auto& f : ma.files) CHECK(slurp(a / f.path) == slurp(b / f.path));
}

TEST_CASE("thread count does not change the output") {
    const auto a = scratch_dir("jobs_a");
    const auto b = scratch_dir("jobs_b");
    auto sa = small_spec(a);
    auto sb = small_spec(b);
    sa.run_count = sb.run_count = 5;
    sb.jobs = 4;
    const auto ma = run_experiment(sa);
    const auto mb = run_experiment(sb);
    REQUIRE(data_files(ma) == data_files(mb));
    for (const auto& f : ma.files) CHECK(slurp(a / f.path) == slurp(b / f.path));
}

TEST_CASE("runs get their derived seeds") {
    const auto dir = scratch_dir("seeds");
    const auto m = run_experiment(small_spec(dir));
    REQUIRE(m.runs.size() == 3);
    for (const auto& r : m.runs) CHECK(r.seed == derive_seed(5, r.run, 0));
    const auto back = read_manifest(dir);
    REQUIRE(back.runs.size() == 3);
    CHECK(back.runs[2].seed == m.runs[2].seed);
    CHECK(back.spec.base == m.spec.base);
}

TEST_CASE("the manifest lists every file and every listed file exists") {
    const auto dir = scratch_dir("manifest");
    auto spec = small_spec(dir);
    spec.checkpoint = true;
    const auto m = run_experiment(spec);
    std::vector<std::string> on_disk;
    for (const auto& e : fs::recursive_directory_iterator(dir))
        if (e.is_regular_file() && e.path().filename() != manifest_name)
            on_disk.push_back(fs::relative(e.path(), dir).generic_string());
    auto listed = data_files(m);
    std::sort(on_disk.begin(), on_disk.end());
    std::sort(listed.begin(), listed.end());
    CHECK(on_disk == listed);
    for (const auto& f : m.files) {
        CHECK(fs::file_size(dir / f.path) == f.bytes);
        CHECK(fnv1a64_hex(dir / f.path) == f.fnv1a64);
    }
}

TEST_CASE("manifest JSON round trip") {
    const auto dir = scratch_dir("json");
    auto spec = small_spec(dir);
    spec.axes.gammas = {0.3, 0.6};
    spec.axes.policies = {PricePolicy::evolving, PricePolicy::bertrand_fixed};
    spec.base.source_draw = SourceDraw::live;
    Manifest m;
    m.command = "sweep";
    m.spec = spec;
    m.code_version = "x";
    m.runs = {{1, 2, 99, "d"}};
    m.files = {{"a.csv", 10, "00ff"}};
    const auto back = manifest_from_json(manifest_to_json(m));
    CHECK(back.spec.base == spec.base);
    CHECK(back.spec.axes == spec.axes);
    CHECK(back.spec.timesteps == spec.timesteps);
    CHECK(back.runs.at(0).seed == 99);
    CHECK(back.files.at(0).fnv1a64 == "00ff");
    const auto j = nlohmann::json::parse(manifest_to_json(m));
    CHECK(j.at("master_seed").get<std::uint64_t>() == 5);
}

TEST_CASE("checkpoint round trip") {
    ModelParams p;
    p.n_sellers = 200;
    p.memory_length = 4;
    p.island_count = 4;
    p.coupling = 0.3;
    p.seed = 9;
    auto s = init_state(p);
    for (int t = 0; t < 30; ++t) step(s);
    const auto bytes = encode_checkpoint(s);
    CHECK(bytes.substr(0, 5) == "BBSIM");
    auto back = decode_checkpoint(bytes);
    back.ledger = s.ledger;
    CHECK(back == s);

    CHECK_THROWS_AS(decode_checkpoint(bytes.substr(0, bytes.size() - 3)), IoError);
    CHECK_THROWS_AS(decode_checkpoint("BBSIX" + bytes.substr(5)), IoError);
    CHECK_THROWS_AS(decode_checkpoint(bytes + "x"), IoError);
}

TEST_CASE("resuming from a checkpoint continues bit for bit") {
    const auto whole = scratch_dir("resume_whole");
    const auto first = scratch_dir("resume_first");
    const auto second = scratch_dir("resume_second");

    auto spec = small_spec(whole);
    spec.run_count = 1;
    spec.warmup = 0;
    spec.timesteps = 300;
    spec.checkpoint = true;
    run_experiment(spec);

    spec.output_dir = first;
    spec.timesteps = 200;
    const auto m1 = run_experiment(spec);

    spec.output_dir = second;
    spec.timesteps = 100;
    spec.resume_from = first / m1.runs.at(0).directory / "checkpoint.bin";
    const auto m2 = run_experiment(spec);

    const auto a = load_checkpoint(whole / "run_0000" / "checkpoint.bin");
    const auto b = load_checkpoint(second / m2.runs.at(0).directory / "checkpoint.bin");
    CHECK(a == b);
    CHECK(b.t == 300);

    const auto full = csv::read(whole / "run_0000" / "timeseries.csv");
    const auto tail = csv::read(second / m2.runs.at(0).directory / "timeseries.csv");
    REQUIRE(tail.rows.size() == 100);
    for (std::size_t i = 0; i < 100; ++i) CHECK(tail.rows[i] == full.rows[200 + i]);
}

TEST_CASE("replay check passes on a clean run and catches tampering") {
    const auto dir = scratch_dir("replay");
    const auto scratch = scratch_dir("replay_scratch");
    const auto m = run_experiment(small_spec(dir));
    auto report = replay_check(dir, scratch);
    CHECK(report.ok());
    CHECK(report.compared.size() == m.files.size());

    {
        std::ofstream out(dir / "run_0001" / "census.csv", std::ios::app);
        out << "999,1\n";
    }
    fs::remove_all(scratch);
    report = replay_check(dir, scratch);
    CHECK_FALSE(report.ok());
    CHECK(std::find(report.mismatched.begin(), report.mismatched.end(), "run_0001/census.csv") !=
          report.mismatched.end());
}

TEST_CASE("sweeps write summary tables") {
    const auto dir = scratch_dir("sweep");
    auto spec = small_spec(dir);
    spec.run_count = 2;
    spec.axes.gammas = {0.5, 0.8};
    spec.axes.deltas = {0.02, 0.06};
    spec.axes.policies = {PricePolicy::evolving, PricePolicy::bertrand_fixed};
    const auto m = run_sweep(spec);
    const auto summary = csv::read(dir / "sweep_summary.csv");
    CHECK(summary.rows.size() == 8);
    CHECK_NOTHROW(summary.column("unsatisfied_se"));
    CHECK(csv::read(dir / "sweep_runs.csv").rows.size() == 16);
    CHECK(fs::exists(dir / "variance_vs_delta.csv"));
    CHECK(m.runs.size() == 16);
    for (const auto& r : m.runs) CHECK(r.seed == derive_seed(5, r.run, r.sweep_index));
    CHECK(replay_check(dir, scratch_dir("sweep_scratch")).ok());
}

TEST_CASE("analyze writes period, census and ensemble tables") {
    const auto dir = scratch_dir("analyze");
    ExperimentSpec spec;
    spec.base.n_sellers = 2000;
    spec.base.gamma = 0.7;
    spec.base.seed = 3;
    spec.run_count = 2;
    spec.timesteps = 2500;
    spec.warmup = 200;
    spec.output_dir = dir;
    run_experiment(spec);
    const auto out = analyze_outputs(dir, {});
    const auto periods = csv::read(out / "run_0000" / "periods.csv");
    REQUIRE(periods.rows.size() > 2);
    CHECK(periods.header.front() == "kind");
    CHECK(periods.rows.back().at(0) == "summary");
    CHECK(periods.rows.front().at(0) == "cycle");
    CHECK(fs::exists(out / "run_0000" / "period_histogram.csv"));
    CHECK(csv::read(out / "census_fit.csv").rows.size() == 2);
    CHECK(fs::exists(out / "ensemble.csv"));
    CHECK(fs::exists(out / "diagnostics.csv"));
}

TEST_CASE("analyze names a missing column") {
    const auto dir = scratch_dir("schema");
    auto spec = small_spec(dir);
    spec.run_count = 1;
    run_experiment(spec);
    const auto path = dir / "run_0000" / "timeseries.csv";
    auto text = slurp(path);
    text.replace(text.find("mean_price"), 10, "avg_price");
    std::ofstream(path, std::ios::binary) << text;
    try {
        analyze_outputs(dir, {});
        FAIL("expected a validation error");
    } catch (const ValidationError& e) {
        CHECK(e.field() == "mean_price");
    }
}

TEST_CASE("csv formatting") {
    CHECK(csv::format(0.1) == "0.1");
    CHECK(csv::format(2.0) == "2");
    CHECK(csv::format(std::optional<double>{}) == "nan");
    CHECK(csv::parse_double("0.25") == 0.25);
    CHECK(std::isnan(csv::parse_double("nan")));
    CHECK_THROWS_AS(csv::parse_double("x"), ValidationError);
}

TEST_CASE("command line exit codes") {
    const auto dir = scratch_dir("cli");
    const auto out = (dir / "out").string();
    CHECK(cli("--n 200 --steps 100 --out " + out + " run") == 0);
    CHECK(cli("replay-check --in " + out) == 0);
    CHECK(cli("--gamma 1.5 --out " + out + " run") == 2);
    CHECK(cli("--scheme sideways --out " + out + " run") == 2);
    CHECK(cli("--no-such-flag run") == 2);
    CHECK(cli("analyze --in " + (dir / "missing").string()) == 3);
    // 100 steps cannot hold a census window spanning a decade after t = 100.
    CHECK(cli("analyze --in " + out) == 4);

    {
        std::ofstream(out + "/run_0000/census.csv", std::ios::app) << "1,1\n";
    }
    CHECK(cli("replay-check --in " + out) == 1);
}

TEST_CASE("config file values yield to command line flags") {
    const auto dir = scratch_dir("config");
    {
        std::ofstream cfg(dir / "exp.cfg");
        cfg << "n=150\ngamma=0.4\nsteps=20\n";
    }
    const auto out = dir / "out";
    REQUIRE(cli("--config " + (dir / "exp.cfg").string() + " --gamma 0.6 --out " + out.string() + " run") == 0);
    const auto m = read_manifest(out);
    CHECK(m.spec.base.n_sellers == 150);
    CHECK(m.spec.base.gamma == 0.6);
    CHECK(m.spec.timesteps == 20);
}
