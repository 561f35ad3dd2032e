#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <unordered_set>
#include <vector>

#include "tsnsim/time.hpp"

namespace tsnsim {

/// Single-threaded discrete-event engine. Events at equal fire times run in
/// insertion order.
class EventEngine
{
  public:
    using Action = std::function<void()>;
    using Handle = std::uint64_t;

    SimTime now() const noexcept { return now_; }

    /// Throws PastTime when fire_time < now().
    Handle schedule(SimTime fire_time, Action action);
    Handle schedule_in(Duration delay, Action action);

    /// Returns false if the event already ran or was never scheduled.
    bool cancel(Handle handle);

    /// Executes every event with fire_time <= t_end, then advances the clock
    /// to t_end. Returns the number of executed (non-cancelled) events.
    std::size_t run_until(SimTime t_end);

    /// Executes until the queue drains.
    std::size_t run();

    std::size_t pending() const noexcept { return heap_.size() - cancelled_.size(); }

  private:
    struct Entry
    {
        SimTime fire_time;
        std::uint64_t seq;
        Action action;
    };
    struct Later
    {
        bool operator()(const Entry &a, const Entry &b) const noexcept
        {
            if (a.fire_time != b.fire_time)
                return a.fire_time > b.fire_time;
            return a.seq > b.seq;
        }
    };

    bool step(SimTime limit);

    SimTime now_ = 0;
    std::uint64_t next_seq_ = 0;
    std::vector<Entry> heap_;
    std::unordered_set<Handle> live_;
    std::unordered_set<Handle> cancelled_;
};

} // namespace tsnsim
