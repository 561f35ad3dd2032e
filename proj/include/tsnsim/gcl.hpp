#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "tsnsim/time.hpp"

namespace tsnsim {

/// Bit i set means the gate of traffic class i is open.
using GateMask = std::uint8_t;

struct GclEntry
{
    GateMask gate_mask = 0xFF;
    Duration duration_ns = 0;
};

struct GclState
{
    GateMask open_mask = 0;
    Duration time_to_next_change = 0;
    std::size_t entry_index = 0;
    std::uint64_t cycle_index = 0;
    SimTime entry_start = 0;
};

inline constexpr Duration kForever = std::numeric_limits<Duration>::max();

/// Cyclic gate schedule starting at base_time. Each entry covers the half-open
/// interval [start, start + duration).
class GateControlList
{
  public:
    /// Throws InvalidSchedule on an empty list, a non-positive duration, or a
    /// cycle_time that differs from the sum of durations.
    GateControlList(SimTime base_time, std::vector<GclEntry> entries,
                    std::optional<Duration> cycle_time = std::nullopt);

    SimTime base_time() const noexcept { return base_time_; }
    Duration cycle_time() const noexcept { return cycle_time_; }
    const std::vector<GclEntry> &entries() const noexcept { return entries_; }

    /// Throws BeforeBaseTime if t < base_time.
    GclState state_at(SimTime t) const;

    bool is_open(SimTime t, unsigned tclass) const;

    /// Time until the gate of tclass next closes: 0 if closed at t, kForever
    /// if it never closes.
    Duration open_remaining(SimTime t, unsigned tclass) const;

    /// Earliest time >= t at which tclass is open; nullopt if never.
    std::optional<SimTime> next_open(SimTime t, unsigned tclass) const;

    /// Longest contiguous open interval for tclass (wrapping across cycles);
    /// kForever if always open, 0 if never.
    Duration longest_open_window(unsigned tclass) const;

  private:
    SimTime base_time_;
    std::vector<GclEntry> entries_;
    std::vector<Duration> offsets_;
    Duration cycle_time_ = 0;
};

GclState gcl_state(const GateControlList &gcl, SimTime t);

} // namespace tsnsim
