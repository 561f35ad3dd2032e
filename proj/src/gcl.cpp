#include "tsnsim/gcl.hpp"

#include <algorithm>
#include <string>

#include "tsnsim/errors.hpp"

namespace tsnsim {

namespace {
bool bit(GateMask m, unsigned tclass) { return ((m >> tclass) & 1u) != 0; }
} // namespace

GateControlList::GateControlList(SimTime base_time, std::vector<GclEntry> entries,
                                 std::optional<Duration> cycle_time)
    : base_time_(base_time), entries_(std::move(entries))
{
    if (entries_.empty())
        throw InvalidSchedule("gate control list has no entries");
    offsets_.reserve(entries_.size());
    Duration sum = 0;
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        if (entries_[i].duration_ns <= 0)
            throw InvalidSchedule("entry " + std::to_string(i) + " has non-positive duration");
        offsets_.push_back(sum);
        sum += entries_[i].duration_ns;
    }
    if (cycle_time && *cycle_time != sum)
        throw InvalidSchedule("cycle time " + std::to_string(*cycle_time) +
                              " ns differs from summed entry durations " + std::to_string(sum) + " ns");
    cycle_time_ = sum;
}

GclState GateControlList::state_at(SimTime t) const
{
    if (t < base_time_)
        throw BeforeBaseTime("t=" + std::to_string(t) + " precedes base time " + std::to_string(base_time_));
    const SimTime since = t - base_time_;
    const auto cycle = static_cast<SimTime>(cycle_time_);
    const auto phase = static_cast<Duration>(since % cycle);
    const auto it = std::upper_bound(offsets_.begin(), offsets_.end(), phase);
    const auto idx = static_cast<std::size_t>(std::distance(offsets_.begin(), it) - 1);

    GclState s;
    s.entry_index = idx;
    s.open_mask = entries_[idx].gate_mask;
    s.cycle_index = since / cycle;
    s.time_to_next_change = offsets_[idx] + entries_[idx].duration_ns - phase;
    s.entry_start = t - static_cast<SimTime>(phase - offsets_[idx]);
    return s;
}

bool GateControlList::is_open(SimTime t, unsigned tclass) const { return bit(state_at(t).open_mask, tclass); }

Duration GateControlList::open_remaining(SimTime t, unsigned tclass) const
{
    const GclState s = state_at(t);
    if (!bit(s.open_mask, tclass))
        return 0;
    Duration acc = s.time_to_next_change;
    const std::size_t n = entries_.size();
    for (std::size_t k = 1; k < n; ++k) {
        const auto &e = entries_[(s.entry_index + k) % n];
        if (!bit(e.gate_mask, tclass))
            return acc;
        acc += e.duration_ns;
    }
    return kForever;
}

std::optional<SimTime> GateControlList::next_open(SimTime t, unsigned tclass) const
{
    const GclState s = state_at(t);
    if (bit(s.open_mask, tclass))
        return t;
    Duration acc = s.time_to_next_change;
    const std::size_t n = entries_.size();
    for (std::size_t k = 1; k < n; ++k) {
        const auto &e = entries_[(s.entry_index + k) % n];
        if (bit(e.gate_mask, tclass))
            return t + static_cast<SimTime>(acc);
        acc += e.duration_ns;
    }
    return std::nullopt;
}

Duration GateControlList::longest_open_window(unsigned tclass) const
{
    const std::size_t n = entries_.size();
    std::size_t first_closed = n;
    for (std::size_t i = 0; i < n; ++i) {
        if (!bit(entries_[i].gate_mask, tclass)) {
            first_closed = i;
            break;
        }
    }
    if (first_closed == n)
        return kForever;
    Duration best = 0, run = 0;
    for (std::size_t k = 1; k <= n; ++k) {
        const auto &e = entries_[(first_closed + k) % n];
        if (bit(e.gate_mask, tclass)) {
            run += e.duration_ns;
            best = std::max(best, run);
        } else {
            run = 0;
        }
    }
    return best;
}

GclState gcl_state(const GateControlList &gcl, SimTime t) { return gcl.state_at(t); }

} // namespace tsnsim
