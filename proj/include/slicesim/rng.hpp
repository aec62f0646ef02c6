#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace slicesim {

using Rng = std::mt19937_64;

// Named RNG streams derived from one master seed. Each subsystem (traffic,
// exploration, learning-slot draws, sample admission, environment generation,
// weight init, replay sampling) owns its own stream so that runs with matched
// seeds see identical traffic regardless of scheme or policy choices.
inline Rng make_stream(std::uint64_t master_seed, std::string_view name) {
    std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
    for (char c : name) {
        h ^= static_cast<std::uint64_t>(static_cast<unsigned char>(c));
        h *= 0x100000001b3ULL;
    }
    std::seed_seq seq{
        static_cast<std::uint32_t>(master_seed),
        static_cast<std::uint32_t>(master_seed >> 32),
        static_cast<std::uint32_t>(h),
        static_cast<std::uint32_t>(h >> 32),
    };
    return Rng(seq);
}

inline bool bernoulli(Rng& rng, double p) {
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p;
}

inline int uniform_int(Rng& rng, int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
}

}  // namespace slicesim
