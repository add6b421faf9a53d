#pragma once

// Counter-based pseudo-random source. The i-th output is a pure function of
// (stream seed, i): out_i = mix64(seed + (i+1) * gamma) with the SplitMix64
// output permutation. This makes draws reproducible run-to-run and
// position-addressable; independent streams (per replica, per role) are
// derived by chaining the same permutation over a list of context words, so
// any replica's stream can be reconstructed from the master seed and its
// coordinates alone.
//
// Determinism scope: integer outputs are bit-identical everywhere. Floating
// transforms (gaussian, uniform) are bit-identical run-to-run on one
// platform and identical across platforms up to libm rounding of
// exp/log/sin/cos.

#include <cmath>
#include <cstdint>
#include <initializer_list>

namespace randdyn {

inline constexpr std::uint64_t kGoldenGamma = 0x9e3779b97f4a7c15ULL;

// SplitMix64 output permutation (finalizer); bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ULL;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return z;
}

// Independent stream seed from a base seed and context words (stream role,
// replica index, dimension, ...). Chained mixing; order-sensitive.
inline std::uint64_t derive_stream(std::uint64_t seed, std::initializer_list<std::uint64_t> path) noexcept {
    std::uint64_t h = mix64(seed + kGoldenGamma);
    for (std::uint64_t word : path) h = mix64(h ^ mix64(word + kGoldenGamma));
    return h;
}

enum class StreamTag : std::uint64_t {
    matrix = 0x6d74,
    initial = 0x6976,
    norm_probe = 0x6e70,
};

inline constexpr std::uint64_t stream_word(StreamTag tag) noexcept {
    return static_cast<std::uint64_t>(tag);
}

class CounterRng {
public:
    explicit CounterRng(std::uint64_t stream_seed) noexcept : state_(stream_seed) {}

    std::uint64_t next_u64() noexcept {
        state_ += kGoldenGamma;
        return mix64(state_);
    }

    // uniform on [0, 1), 53-bit resolution
    double next_unit() noexcept { return double(next_u64() >> 11) * 0x1.0p-53; }

    // uniform on (0, 1); never returns 0, safe under log
    double next_unit_open() noexcept { return (double(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

    bool next_sign() noexcept { return (next_u64() >> 63) != 0; }

    // standard normal via Box-Muller; generates pairs, caches the second
    double next_gaussian() noexcept {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = next_unit_open();
        const double u2 = next_unit();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace randdyn
