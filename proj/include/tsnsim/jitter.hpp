#pragma once

#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "tsnsim/rng.hpp"
#include "tsnsim/time.hpp"

namespace tsnsim {

/// Distribution of a latency or timing error, in integer nanoseconds.
/// Normal distributions are truncated at +-4 sigma (and at an optional lower
/// bound) by rejection; results are rounded to the nearest nanosecond.
class JitterDist
{
  public:
    struct Constant
    {
        Duration value = 0;
    };
    struct Uniform
    {
        Duration min = 0;
        Duration max = 0;
    };
    struct Normal
    {
        double mean = 0.0;
        double stddev = 0.0;
        std::optional<Duration> lower;
    };
    struct Empirical
    {
        std::vector<std::pair<Duration, double>> points; // (value, weight)
    };
    using Kind = std::variant<Constant, Uniform, Normal, Empirical>;

    JitterDist() = default;
    explicit JitterDist(Kind kind);

    static JitterDist constant(Duration v) { return JitterDist(Constant{v}); }
    static JitterDist uniform(Duration lo, Duration hi) { return JitterDist(Uniform{lo, hi}); }
    static JitterDist normal(double mean, double stddev, std::optional<Duration> lower = std::nullopt)
    {
        return JitterDist(Normal{mean, stddev, lower});
    }
    static JitterDist empirical(std::vector<std::pair<Duration, double>> points)
    {
        return JitterDist(Empirical{std::move(points)});
    }

    Duration sample(Rng &rng) const;

    /// Smallest and largest value sample() can return.
    Duration lower_bound() const;
    Duration upper_bound() const;

    bool is_zero() const;
    const Kind &kind() const noexcept { return kind_; }
    std::string describe() const;

  private:
    Kind kind_ = Constant{0};
};

} // namespace tsnsim
