#include <cstdio>
#include <fstream>
#include <iterator>

#include "bbsim/errors.hpp"
#include "bbsim/harness.hpp"
#include "json.hpp"

namespace bbsim {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json params_to_json(const ModelParams& p) {
    return {{"n_sellers", p.n_sellers},
            {"gamma", p.gamma},
            {"delta", p.delta},
            {"overhead", p.overhead},
            {"p_max", p.p_max},
            {"scheme", to_string(p.scheme)},
            {"price_policy", to_string(p.price_policy)},
            {"overhead_pool", to_string(p.overhead_pool)},
            {"source_draw", to_string(p.source_draw)},
            {"island_count", p.island_count},
            {"coupling", p.coupling},
            {"memory_length", p.memory_length},
            {"seed", p.seed}};
}

template <class T>
T parse_enum(const json& j, const char* key, std::optional<T> (*parse)(std::string_view)) {
    const auto text = j.at(key).get<std::string>();
    const auto value = parse(text);
    if (!value) throw ValidationError(key, "unknown value '" + text + "'");
    return *value;
}

ModelParams params_from_json(const json& j) {
    ModelParams p;
    p.n_sellers = j.at("n_sellers").get<std::uint32_t>();
    p.gamma = j.at("gamma").get<double>();
    p.delta = j.at("delta").get<double>();
    p.overhead = j.at("overhead").get<double>();
    p.p_max = j.at("p_max").get<double>();
    p.scheme = parse_enum(j, "scheme", parse_scheme);
    p.price_policy = parse_enum(j, "price_policy", parse_price_policy);
    p.overhead_pool = parse_enum(j, "overhead_pool", parse_overhead_pool);
    p.source_draw = parse_enum(j, "source_draw", parse_source_draw);
    p.island_count = j.at("island_count").get<std::uint32_t>();
    p.coupling = j.at("coupling").get<double>();
    p.memory_length = j.at("memory_length").get<std::uint32_t>();
    p.seed = j.at("seed").get<std::uint64_t>();
    return p;
}

json spec_to_json(const ExperimentSpec& s) {
    json policies = json::array();
    for (auto p : s.axes.policies) policies.push_back(to_string(p));
    return {{"params", params_to_json(s.base)},
            {"run_count", s.run_count},
            {"timesteps", s.timesteps},
            {"warmup", s.warmup},
            {"stride", s.stride},
            {"histogram_stride", s.histogram_stride},
            {"histogram_bin", s.histogram_bin},
            {"period_window", s.period_window},
            {"axes",
             {{"policies", policies},
              {"gammas", s.axes.gammas},
              {"deltas", s.axes.deltas},
              {"couplings", s.axes.couplings},
              {"memories", s.axes.memories}}},
            {"output_dir", s.output_dir.string()},
            {"jobs", s.jobs},
            {"checkpoint", s.checkpoint},
            {"keep_series", s.keep_series},
            {"resume_from", s.resume_from ? json(s.resume_from->string()) : json(nullptr)}};
}

ExperimentSpec spec_from_json(const json& j) {
    ExperimentSpec s;
    s.base = params_from_json(j.at("params"));
    s.run_count = j.at("run_count").get<std::uint32_t>();
    s.timesteps = j.at("timesteps").get<std::uint64_t>();
    s.warmup = j.at("warmup").get<std::uint64_t>();
    s.stride = j.at("stride").get<std::uint64_t>();
    s.histogram_stride = j.at("histogram_stride").get<std::uint64_t>();
    s.histogram_bin = j.at("histogram_bin").get<double>();
    s.period_window = j.at("period_window").get<std::size_t>();
    const auto& axes = j.at("axes");
    for (const auto& p : axes.at("policies")) {
        const auto policy = parse_price_policy(p.get<std::string>());
        if (!policy) throw ValidationError("policies", "unknown policy");
        s.axes.policies.push_back(*policy);
    }
    s.axes.gammas = axes.at("gammas").get<std::vector<double>>();
    s.axes.deltas = axes.at("deltas").get<std::vector<double>>();
    s.axes.couplings = axes.at("couplings").get<std::vector<double>>();
    s.axes.memories = axes.at("memories").get<std::vector<std::uint32_t>>();
    s.output_dir = j.at("output_dir").get<std::string>();
    s.jobs = j.at("jobs").get<unsigned>();
    s.checkpoint = j.at("checkpoint").get<bool>();
    s.keep_series = j.at("keep_series").get<bool>();
    if (!j.at("resume_from").is_null()) s.resume_from = j.at("resume_from").get<std::string>();
    return s;
}

}  // namespace

std::string manifest_to_json(const Manifest& m) {
    json runs = json::array();
    for (const auto& r : m.runs)
        runs.push_back({{"sweep_index", r.sweep_index}, {"run", r.run}, {"seed", r.seed}, {"directory", r.directory}});
    json files = json::array();
    for (const auto& f : m.files) files.push_back({{"path", f.path}, {"bytes", f.bytes}, {"fnv1a64", f.fnv1a64}});
    const json j = {{"format", "bbsim-manifest"},
                    {"format_version", 1},
                    {"command", m.command},
                    {"code_version", m.code_version},
                    {"created", m.created},
                    {"master_seed", m.spec.base.seed},
                    {"spec", spec_to_json(m.spec)},
                    {"runs", runs},
                    {"files", files}};
    return j.dump(2) + "\n";
}

Manifest manifest_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw IoError(std::string("malformed manifest: ") + e.what());
    }
    try {
        if (j.at("format") != "bbsim-manifest") throw IoError("not a bbsim manifest");
        Manifest m;
        m.command = j.at("command").get<std::string>();
        m.code_version = j.at("code_version").get<std::string>();
        m.created = j.at("created").get<std::string>();
        m.spec = spec_from_json(j.at("spec"));
        for (const auto& r : j.at("runs"))
            m.runs.push_back({r.at("sweep_index").get<std::uint32_t>(), r.at("run").get<std::uint32_t>(),
                              r.at("seed").get<std::uint64_t>(), r.at("directory").get<std::string>()});
        for (const auto& f : j.at("files"))
            m.files.push_back(
                {f.at("path").get<std::string>(), f.at("bytes").get<std::uint64_t>(), f.at("fnv1a64").get<std::string>()});
        return m;
    } catch (const json::exception& e) {
        throw IoError(std::string("incomplete manifest: ") + e.what());
    }
}

Manifest read_manifest(const fs::path& dir) {
    std::ifstream in(dir / manifest_name);
    if (!in) throw IoError("no manifest in " + dir.string());
    const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return manifest_from_json(text);
}

std::string fnv1a64_hex(const fs::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw IoError("cannot read " + file.string());
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char buf[1 << 16];
    while (in) {
        in.read(buf, sizeof buf);
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ULL;
        }
    }
    char out[17];
    std::snprintf(out, sizeof out, "%016llx", static_cast<unsigned long long>(h));
    return out;
}

}  // namespace bbsim
