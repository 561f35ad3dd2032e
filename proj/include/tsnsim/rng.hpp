#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <string_view>

namespace tsnsim {

/// xoshiro256** generator. Satisfies UniformRandomBitGenerator.
class Rng
{
  public:
    using result_type = std::uint64_t;

    static constexpr std::string_view kAlgorithm =
        "xoshiro256** (splitmix64 seeding, FNV-1a label fork)";

    explicit Rng(std::uint64_t seed = 0);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
    result_type operator()() { return next(); }

    std::uint64_t next();

    /// Uniform in [0, 1) with 53 random bits.
    double uniform01();

    /// Uniform integer in [lo, hi], unbiased.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

    /// Standard normal via Box-Muller (no cached second variate).
    double standard_normal();

    bool bernoulli(double p);

  private:
    std::array<std::uint64_t, 4> s_{};
};

/// Independent deterministic stream for (seed, label).
Rng rng_fork(std::uint64_t seed, std::string_view stream_label);

} // namespace tsnsim
