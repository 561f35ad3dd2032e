#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <optional>

#include "tsnsim/frame.hpp"
#include "tsnsim/gcl.hpp"

namespace tsnsim {

enum class GuardMode
{
    fit,  // a frame starts only if it ends before its gate closes
    none, // a frame starts whenever its gate is open
};

enum class EnqueueResult
{
    Queued,
    DroppedFull,
};

struct TaprioConfig
{
    std::optional<GateControlList> gcl; // absent: every gate always open
    GuardMode guard = GuardMode::fit;
    std::size_t queue_capacity = 1000;
    std::uint64_t link_rate_bps = 1'000'000'000;
    std::uint64_t overhead_bytes = 0;
};

struct TaprioSelection
{
    Frame frame;
    SimTime tx_start = 0;
};

/// Per-class FIFO queues behind a time-aware gate schedule. All times passed
/// in are gate-clock times. Strict priority among open classes: the highest
/// class number wins.
///
/// A head-of-line frame that can never fit any open window of its class is
/// dropped once it has been at the head for a full cycle.
class TaprioPort
{
  public:
    explicit TaprioPort(TaprioConfig cfg);

    /// Queues by frame.traffic_class; a full queue drops the new arrival.
    EnqueueResult enqueue(Frame frame, SimTime t);

    /// Removes and returns the frame to transmit at t, restricted to classes
    /// in `allowed`.
    std::optional<TaprioSelection> select(SimTime t, GateMask allowed = 0xFF);

    /// Class that select() would pick, without removing anything.
    std::optional<unsigned> peek(SimTime t, GateMask allowed = 0xFF);

    const Frame &head(unsigned tclass) const { return queues_[tclass].front(); }

    /// Next instant a blocked head-of-line frame could become eligible or be
    /// dropped as oversize; nullopt when nothing is waiting on the schedule.
    std::optional<SimTime> next_wakeup(SimTime t) const;

    bool eligible(unsigned tclass, SimTime t) const;

    std::size_t queued(unsigned tclass) const { return queues_[tclass].size(); }
    std::size_t total_queued() const;
    std::uint64_t dropped_full() const noexcept { return dropped_full_; }
    std::uint64_t dropped_oversize() const noexcept { return dropped_oversize_; }
    const TaprioConfig &config() const noexcept { return cfg_; }

  private:
    Duration wire_time(const Frame &f) const;
    bool never_fits(unsigned tclass, const Frame &f) const;
    void prune(SimTime t);

    TaprioConfig cfg_;
    std::array<std::deque<Frame>, 8> queues_;
    std::array<SimTime, 8> head_since_{};
    std::uint64_t dropped_full_ = 0;
    std::uint64_t dropped_oversize_ = 0;
};

} // namespace tsnsim
