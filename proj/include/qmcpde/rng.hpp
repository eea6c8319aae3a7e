#pragma once

#include <cstdint>

namespace qmcpde {

// Counter-based uniform generator: every output is a pure function of
// (key, counter, lane). Mixing is the SplitMix64 finalizer applied to a
// Weyl-spaced combination of the three inputs.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t hash_combine(std::uint64_t key, std::uint64_t a,
                                     std::uint64_t b) noexcept {
    std::uint64_t h = mix64(key ^ 0x243f6a8885a308d3ULL);
    h = mix64(h ^ (a * 0xd6e8feb86659fd93ULL));
    h = mix64(h ^ (b * 0xa0761d6478bd642fULL));
    return h;
}

// Uniform on [0,1) with a 53-bit mantissa.
constexpr double counter_uniform(std::uint64_t key, std::uint64_t a,
                                 std::uint64_t b) noexcept {
    return static_cast<double>(hash_combine(key, a, b) >> 11) * 0x1.0p-53;
}

// Child seed for a sub-stream, e.g. one level of a multilevel run.
constexpr std::uint64_t derive_seed(std::uint64_t master,
                                    std::uint64_t stream) noexcept {
    return hash_combine(master, 0x5eed5eed5eedULL, stream);
}

} // namespace qmcpde
