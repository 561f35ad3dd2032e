#include "tsnsim/taprio.hpp"

#include <algorithm>

namespace tsnsim {

TaprioPort::TaprioPort(TaprioConfig cfg) : cfg_(std::move(cfg)) {}

Duration TaprioPort::wire_time(const Frame &f) const
{
    return transmission_time(f.size_bytes, cfg_.link_rate_bps, cfg_.overhead_bytes);
}

EnqueueResult TaprioPort::enqueue(Frame frame, SimTime t)
{
    const unsigned c = frame.traffic_class & 7u;
    auto &q = queues_[c];
    if (q.size() >= cfg_.queue_capacity) {
        ++dropped_full_;
        return EnqueueResult::DroppedFull;
    }
    if (q.empty())
        head_since_[c] = t;
    q.push_back(std::move(frame));
    return EnqueueResult::Queued;
}

bool TaprioPort::never_fits(unsigned tclass, const Frame &f) const
{
    if (!cfg_.gcl)
        return false;
    const Duration window = cfg_.gcl->longest_open_window(tclass);
    if (cfg_.guard == GuardMode::none)
        return window == 0;
    return window != kForever && wire_time(f) > window;
}

bool TaprioPort::eligible(unsigned tclass, SimTime t) const
{
    const auto &q = queues_[tclass];
    if (q.empty())
        return false;
    if (!cfg_.gcl)
        return true;
    if (t < cfg_.gcl->base_time())
        return false;
    const Duration remaining = cfg_.gcl->open_remaining(t, tclass);
    if (remaining == 0)
        return false;
    if (cfg_.guard == GuardMode::none)
        return true;
    return wire_time(q.front()) <= remaining;
}

void TaprioPort::prune(SimTime t)
{
    if (!cfg_.gcl)
        return;
    const auto cycle = static_cast<SimTime>(cfg_.gcl->cycle_time());
    for (unsigned c = 0; c < 8; ++c) {
        auto &q = queues_[c];
        while (!q.empty() && never_fits(c, q.front()) && t >= head_since_[c] + cycle) {
            q.pop_front();
            ++dropped_oversize_;
            head_since_[c] = t;
        }
    }
}

std::optional<unsigned> TaprioPort::peek(SimTime t, GateMask allowed)
{
    prune(t);
    for (int c = 7; c >= 0; --c) {
        const auto uc = static_cast<unsigned>(c);
        if (((allowed >> uc) & 1u) && eligible(uc, t))
            return uc;
    }
    return std::nullopt;
}

std::optional<TaprioSelection> TaprioPort::select(SimTime t, GateMask allowed)
{
    const auto c = peek(t, allowed);
    if (!c)
        return std::nullopt;
    auto &q = queues_[*c];
    TaprioSelection sel{std::move(q.front()), t};
    q.pop_front();
    if (!q.empty())
        head_since_[*c] = t;
    return sel;
}

std::optional<SimTime> TaprioPort::next_wakeup(SimTime t) const
{
    if (!cfg_.gcl)
        return std::nullopt;
    if (total_queued() == 0)
        return std::nullopt;
    if (t < cfg_.gcl->base_time())
        return cfg_.gcl->base_time();

    const GclState s = cfg_.gcl->state_at(t);
    const SimTime boundary = t + static_cast<SimTime>(s.time_to_next_change);
    const auto cycle = static_cast<SimTime>(cfg_.gcl->cycle_time());
    std::optional<SimTime> best;
    auto consider = [&](SimTime cand) {
        if (!best || cand < *best)
            best = cand;
    };
    for (unsigned c = 0; c < 8; ++c) {
        const auto &q = queues_[c];
        if (q.empty() || eligible(c, t))
            continue;
        consider(boundary);
        if (never_fits(c, q.front()))
            consider(std::max(t + 1, head_since_[c] + cycle));
    }
    return best;
}

std::size_t TaprioPort::total_queued() const
{
    std::size_t n = 0;
    for (const auto &q : queues_)
        n += q.size();
    return n;
}

} // namespace tsnsim
