#pragma once

#include <array>
#include <cstdint>

namespace bbsim {

// Single-stream generator for one simulation: xoshiro256** seeded through
// SplitMix64. All derived draws are written out here so that a seed maps to
// the same sequence with any compiler or standard library.
class Rng {
public:
    using State = std::array<std::uint64_t, 4>;

    explicit Rng(std::uint64_t seed = 0) {
        for (auto& word : s_) {
            seed += 0x9E3779B97F4A7C15ULL;
            std::uint64_t z = seed;
            z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
            z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
            word = z ^ (z >> 31);
        }
    }

    std::uint64_t next_u64() noexcept {
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform integer in [0, n), n > 0. Lemire's multiply-shift with rejection.
    std::uint64_t uniform_index(std::uint64_t n) noexcept {
        __extension__ using u128 = unsigned __int128;
        std::uint64_t x = next_u64();
        u128 m = static_cast<u128>(x) * n;
        auto low = static_cast<std::uint64_t>(m);
        if (low < n) {
            const std::uint64_t threshold = (0 - n) % n;
            while (low < threshold) {
                x = next_u64();
                m = static_cast<u128>(x) * n;
                low = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    // Uniform on [0, 1) with 53 random bits.
    double unit() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform on the closed interval [0, 1].
    double unit_closed() noexcept {
        return static_cast<double>(next_u64() >> 11) / static_cast<double>((std::uint64_t{1} << 53) - 1);
    }

    // One draw is always consumed, so p = 0 and p = 1 keep the stream length fixed.
    bool bernoulli(double p) noexcept { return unit() < p; }

    bool coin() noexcept { return (next_u64() >> 63) != 0; }

    const State& state() const noexcept { return s_; }
    static Rng from_state(const State& s) {
        Rng r;
        r.s_ = s;
        return r;
    }

    friend bool operator==(const Rng&, const Rng&) = default;

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept { return (x << k) | (x >> (64 - k)); }

    State s_{};
};

}  // namespace bbsim
