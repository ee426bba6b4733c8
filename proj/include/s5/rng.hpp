#pragma once

#include <cstdint>
#include <string_view>

namespace s5 {

// Counter-based deterministic generator.
//
// The i-th raw draw from a stream with key k is
//     mix64(k + i * 0x9E3779B97F4A7C15)        (i = 1, 2, ...)
// where mix64 is the SplitMix64 finalizer (Steele, Lea & Flood 2014):
//     z ^= z >> 30;  z *= 0xBF58476D1CE4E5B9;
//     z ^= z >> 27;  z *= 0x94D049BB133111EB;
//     z ^= z >> 31;
// Streams are split by name: fork(label) derives a child key
//     mix64(key ^ mix64(fnv1a64(label))),
// so parameter streams are independent of draw order elsewhere. Everything is
// integer arithmetic on fixed-width types; the same seed reproduces the same
// values on any platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : key_(seed) {}

    static std::uint64_t mix64(std::uint64_t z);
    static std::uint64_t fnv1a64(std::string_view s);

    Rng fork(std::string_view label) const;
    Rng fork(std::uint64_t label) const;

    std::uint64_t next_u64();

    // Uniform on [0, 1) with 53 random bits.
    double next_uniform();
    // Uniform on [lo, hi).
    double next_uniform(double lo, double hi);
    // Standard normal via Box-Muller (consumes two raw draws per pair).
    double next_gaussian();

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    double cached_gaussian_ = 0.0;
    bool has_cached_gaussian_ = false;
};

}  // namespace s5
