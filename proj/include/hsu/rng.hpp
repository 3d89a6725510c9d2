#pragma once

#include <cmath>
#include <cstdint>

namespace hsu::rng {

// Stateless counter-based generator built on the splitmix64 finalizer.
// Every draw is a pure function of (seed, stream, counter), so the values an
// algorithm sees never depend on evaluation order or thread schedule.

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t hash3(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
    std::uint64_t h = mix64(seed + kGolden);
    h = mix64(h ^ (stream + kGolden));
    h = mix64(h ^ (counter + kGolden));
    return h;
}

// Child seed for a subsystem (scene, noise, init, ...) so one master seed
// drives every stream without correlation between them.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t tag, std::uint64_t index = 0) {
    return hash3(master, tag, index);
}

// Uniform in [0, 1) with 53-bit resolution.
inline double uniform01(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
    return static_cast<double>(hash3(seed, stream, counter) >> 11) * 0x1.0p-53;
}

// Uniform integer in [0, n); n >= 1. Bias is O(n / 2^64).
inline std::uint32_t uniform_index(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter,
                                   std::uint32_t n) {
    const auto wide = static_cast<unsigned __int128>(hash3(seed, stream, counter));
    return static_cast<std::uint32_t>((wide * n) >> 64);
}

// Standard normal via Box-Muller on two sub-draws of the same counter.
inline double gaussian(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
    const std::uint64_t h1 = hash3(seed, stream, counter * 2);
    const std::uint64_t h2 = hash3(seed, stream, counter * 2 + 1);
    const double u1 = (static_cast<double>(h1 >> 11) + 1.0) * 0x1.0p-53;  // (0, 1]
    const double u2 = static_cast<double>(h2 >> 11) * 0x1.0p-53;          // [0, 1)
    constexpr double two_pi = 6.283185307179586476925286766559;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
}

}  // namespace hsu::rng
