#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace evreg {

// splitmix64 step; also used as a stateless hash of (seed, index) pairs
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// One top-level seed fans out into independent per-purpose streams.
inline std::uint64_t derive_seed(std::uint64_t root, std::uint64_t purpose) {
    std::uint64_t s = root ^ (0x6a09e667f3bcc909ull * (purpose + 1));
    std::uint64_t a = splitmix64(s);
    std::uint64_t b = splitmix64(s);
    return a ^ (b << 1);
}

inline double u64_to_unit(std::uint64_t x) {
    // 53-bit mantissa, uniform in (0,1]
    return (static_cast<double>(x >> 11) + 1.0) * 0x1.0p-53;
}

// Counter-based standard normal pairs: draw i depends only on (seed, i), so
// parallel consumers produce identical streams regardless of scheduling.
inline void counter_normal_pair(std::uint64_t seed, std::uint64_t index, double& z0, double& z1) {
    std::uint64_t s = seed + 0x9e3779b97f4a7c15ull * (index + 1);
    std::uint64_t a = splitmix64(s);
    std::uint64_t b = splitmix64(s);
    double u1 = u64_to_unit(a);
    double u2 = u64_to_unit(b);
    double r = std::sqrt(-2.0 * std::log(u1));
    double t = 2.0 * std::numbers::pi * u2;
    z0 = r * std::cos(t);
    z1 = r * std::sin(t);
}

inline double counter_normal(std::uint64_t seed, std::uint64_t index) {
    double z0, z1;
    counter_normal_pair(seed, index, z0, z1);
    return z0;
}

} // namespace evreg
