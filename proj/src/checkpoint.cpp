#include "bbsim/checkpoint.hpp"

#include <bit>
#include <fstream>
#include <iterator>
#include <stdexcept>

#include "bbsim/errors.hpp"

namespace bbsim {

namespace {

constexpr char magic[5] = {'B', 'B', 'S', 'I', 'M'};

class Encoder {
public:
    void u8(std::uint8_t v) { out_.push_back(static_cast<char>(v)); }
    void u16(std::uint16_t v) { put(v, 2); }
    void u32(std::uint32_t v) { put(v, 4); }
    void u64(std::uint64_t v) { put(v, 8); }
    void f64(double v) { put(std::bit_cast<std::uint64_t>(v), 8); }
    void bytes(const std::string& s) { out_ += s; }

    // Appends `section` prefixed with its byte length.
    void section(const Encoder& section) {
        u64(section.out_.size());
        out_ += section.out_;
    }

    const std::string& str() const { return out_; }

private:
    void put(std::uint64_t v, int n) {
        for (int i = 0; i < n; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
    }
    std::string out_;
};

class Decoder {
public:
    explicit Decoder(std::string_view in) : in_(in) {}

    std::uint8_t u8() { return static_cast<std::uint8_t>(get(1)); }
    std::uint16_t u16() { return static_cast<std::uint16_t>(get(2)); }
    std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }
    std::uint64_t u64() { return get(8); }
    double f64() { return std::bit_cast<double>(get(8)); }
    std::string_view raw(std::size_t n) {
        need(n);
        auto s = in_.substr(pos_, n);
        pos_ += n;
        return s;
    }
    Decoder section() { return Decoder(raw(u64())); }
    bool done() const { return pos_ == in_.size(); }

private:
    void need(std::size_t n) const {
        if (in_.size() - pos_ < n) throw IoError("truncated checkpoint");
    }
    std::uint64_t get(int n) {
        need(static_cast<std::size_t>(n));
        std::uint64_t v = 0;
        for (int i = 0; i < n; ++i)
            v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in_[pos_ + i])) << (8 * i);
        pos_ += static_cast<std::size_t>(n);
        return v;
    }
    std::string_view in_;
    std::size_t pos_ = 0;
};

// Every enum stored in a checkpoint has exactly two values.
template <class E>
E enum_byte(std::uint8_t b) {
    if (b > 1) throw IoError("corrupt checkpoint: bad enum value " + std::to_string(b));
    return static_cast<E>(b);
}

}  // namespace

std::string encode_checkpoint(const MarketState& state) {
    Encoder out;
    out.bytes(std::string(magic, sizeof magic));
    out.u16(checkpoint_version);

    const auto& p = state.params;
    Encoder params;
    params.u32(p.n_sellers);
    params.f64(p.gamma);
    params.f64(p.delta);
    params.f64(p.overhead);
    params.f64(p.p_max);
    params.u8(static_cast<std::uint8_t>(p.scheme));
    params.u8(static_cast<std::uint8_t>(p.price_policy));
    params.u8(static_cast<std::uint8_t>(p.overhead_pool));
    params.u8(static_cast<std::uint8_t>(p.source_draw));
    params.u32(p.island_count);
    params.f64(p.coupling);
    params.u32(p.memory_length);
    params.u64(p.seed);
    out.section(params);

    Encoder clock;
    clock.u64(state.t);
    out.section(clock);

    Encoder sites;
    sites.u64(state.sites.size());
    for (const auto& s : state.sites) {
        sites.u8(static_cast<std::uint8_t>(s.occupancy));
        sites.u32(s.label);
        sites.f64(s.price);
        sites.f64(s.capital);
    }
    out.section(sites);

    Encoder history;
    history.u64(state.history.capacity());
    for (std::size_t i = 0; i < state.history.sites(); ++i) {
        history.u32(static_cast<std::uint32_t>(state.history.size(i)));
        for (std::size_t k = 0; k < state.history.size(i); ++k) history.f64(state.history.at(i, k));
    }
    out.section(history);

    Encoder rng;
    for (auto word : state.rng.state()) rng.u64(word);
    out.section(rng);
    return out.str();
}

MarketState decode_checkpoint(const std::string& bytes) {
    Decoder in(bytes);
    if (in.raw(sizeof magic) != std::string_view(magic, sizeof magic)) throw IoError("not a checkpoint file");
    if (const auto v = in.u16(); v != checkpoint_version)
        throw IoError("unsupported checkpoint version " + std::to_string(v));

    MarketState state;
    auto params = in.section();
    auto& p = state.params;
    p.n_sellers = params.u32();
    p.gamma = params.f64();
    p.delta = params.f64();
    p.overhead = params.f64();
    p.p_max = params.f64();
    p.scheme = enum_byte<Scheme>(params.u8());
    p.price_policy = enum_byte<PricePolicy>(params.u8());
    p.overhead_pool = enum_byte<OverheadPool>(params.u8());
    p.source_draw = enum_byte<SourceDraw>(params.u8());
    p.island_count = params.u32();
    p.coupling = params.f64();
    p.memory_length = params.u32();
    p.seed = params.u64();
    p.validate();

    auto clock = in.section();
    state.t = clock.u64();

    auto sites = in.section();
    const auto n = sites.u64();
    if (n != p.n_sellers) throw IoError("checkpoint site count does not match parameters");
    state.sites.resize(n);
    for (auto& s : state.sites) {
        s.occupancy = enum_byte<Occupancy>(sites.u8());
        s.label = sites.u32();
        s.price = sites.f64();
        s.capital = sites.f64();
        if (s.live()) ++state.live_count;
    }

    auto history = in.section();
    const auto capacity = history.u64();
    if (capacity != p.memory_length) throw IoError("checkpoint history capacity does not match parameters");
    state.history = PriceHistory(n, capacity);
    std::vector<double> entries;
    for (std::size_t i = 0; i < n; ++i) {
        entries.resize(history.u32());
        for (auto& e : entries) e = history.f64();
        state.history.assign(i, entries);
    }

    auto rng = in.section();
    Rng::State words{};
    for (auto& w : words) w = rng.u64();
    if (!rng.done()) throw IoError("malformed generator state in checkpoint");
    state.rng = Rng::from_state(words);
    if (!in.done()) throw IoError("trailing bytes after checkpoint");
    return state;
}

void save_checkpoint(const MarketState& state, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    const auto bytes = encode_checkpoint(state);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("cannot write " + path.string());
}

MarketState load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_checkpoint(bytes);
}

}  // namespace bbsim
