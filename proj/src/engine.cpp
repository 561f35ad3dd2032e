#include "tsnsim/engine.hpp"

#include <algorithm>
#include <string>

#include "tsnsim/errors.hpp"

namespace tsnsim {

EventEngine::Handle EventEngine::schedule(SimTime fire_time, Action action)
{
    if (fire_time < now_)
        throw PastTime("cannot schedule at " + std::to_string(fire_time) + " ns, now is " +
                       std::to_string(now_) + " ns");
    const Handle h = next_seq_++;
    heap_.push_back(Entry{fire_time, h, std::move(action)});
    std::push_heap(heap_.begin(), heap_.end(), Later{});
    live_.insert(h);
    return h;
}

EventEngine::Handle EventEngine::schedule_in(Duration delay, Action action)
{
    if (delay < 0)
        throw PastTime("negative delay " + std::to_string(delay) + " ns");
    return schedule(now_ + static_cast<SimTime>(delay), std::move(action));
}

bool EventEngine::cancel(Handle handle)
{
    if (live_.erase(handle) == 0)
        return false;
    cancelled_.insert(handle);
    return true;
}

bool EventEngine::step(SimTime limit)
{
    while (!heap_.empty()) {
        if (heap_.front().fire_time > limit)
            return false;
        std::pop_heap(heap_.begin(), heap_.end(), Later{});
        Entry e = std::move(heap_.back());
        heap_.pop_back();
        if (cancelled_.erase(e.seq) != 0)
            continue;
        live_.erase(e.seq);
        now_ = e.fire_time;
        e.action();
        return true;
    }
    return false;
}

std::size_t EventEngine::run_until(SimTime t_end)
{
    std::size_t executed = 0;
    while (step(t_end))
        ++executed;
    now_ = std::max(now_, t_end);
    return executed;
}

std::size_t EventEngine::run()
{
    std::size_t executed = 0;
    while (step(~SimTime{0}))
        ++executed;
    return executed;
}

} // namespace tsnsim
