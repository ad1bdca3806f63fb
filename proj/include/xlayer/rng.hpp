#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>

namespace xlayer {

/// Seedable random stream. Every distribution is computed here from raw
/// 64-bit draws so the outputs do not depend on the standard library's
/// distribution implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t seed() const { return seed_; }

    std::uint64_t next_u64();
    // Uniform in [0, 1) with 53 bits of precision.
    double uniform01();
    double uniform(double lo, double hi);
    // Uniform integer in [0, bound); bound must be > 0.
    std::uint64_t below(std::uint64_t bound);
    double normal(double mean, double stddev);
    void fill(std::span<std::uint8_t> out);

    // Independent child stream, determined by this stream's seed and the label.
    Rng fork(std::string_view label) const;

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

} // namespace xlayer
