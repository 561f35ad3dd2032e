#pragma once

#include <cstdint>
#include <optional>

#include "tsnsim/jitter.hpp"
#include "tsnsim/rng.hpp"
#include "tsnsim/time.hpp"

namespace tsnsim {

/// Rational frequency error in parts per million: num / den ppm.
struct DriftPpm
{
    std::int64_t num = 0;
    std::int64_t den = 1;
};

/// Free-running clock with an offset that is replaced at every sync.
///   reading(t) = t + offset_ns + drift * (t - last_sync_true_time) / 1e6
/// evaluated in 128-bit integers, truncated toward zero.
struct ClockModel
{
    Duration offset_ns = 0;
    DriftPpm drift{};
    std::optional<Duration> sync_interval_ns;
    JitterDist sync_residual = JitterDist::constant(0);
    SimTime last_sync_true_time = 0;
};

/// Throws ClockUnderflow if the reading would be negative.
SimTime clock_read(const ClockModel &clock, SimTime true_time);

/// Offset becomes a fresh residual sample; drift is kept.
ClockModel apply_sync(ClockModel clock, SimTime true_time, Rng &rng);

/// Earliest true time t >= last_sync_true_time with clock_read(t) >= reading.
SimTime true_time_for_reading(const ClockModel &clock, SimTime reading);

/// A node's clock over a run: the current model plus the one it replaced, so
/// instants shortly before the latest sync still read consistently.
class NodeClock
{
  public:
    NodeClock() = default;
    explicit NodeClock(ClockModel model, Rng sync_rng = Rng(0));

    SimTime read(SimTime true_time) const;
    SimTime true_time_for(SimTime reading) const;
    void sync(SimTime true_time);

    const ClockModel &model() const noexcept { return current_; }
    std::optional<Duration> sync_interval() const noexcept { return current_.sync_interval_ns; }

  private:
    ClockModel current_;
    std::optional<ClockModel> previous_;
    Rng rng_;
};

} // namespace tsnsim
