#include "tsnsim/clock.hpp"

#include <string>

#include "tsnsim/errors.hpp"

namespace tsnsim {

namespace {

using i128 = Int128;

constexpr i128 kPpmScale = 1'000'000;

i128 drift_term(const DriftPpm &drift, i128 elapsed)
{
    // C++ integer division truncates toward zero.
    return static_cast<i128>(drift.num) * elapsed / (static_cast<i128>(drift.den) * kPpmScale);
}

} // namespace

SimTime clock_read(const ClockModel &clock, SimTime true_time)
{
    const i128 elapsed = static_cast<i128>(true_time) - static_cast<i128>(clock.last_sync_true_time);
    const i128 reading =
        static_cast<i128>(true_time) + clock.offset_ns + drift_term(clock.drift, elapsed);
    if (reading < 0)
        throw ClockUnderflow("clock reading negative at true time " + std::to_string(true_time));
    return static_cast<SimTime>(reading);
}

ClockModel apply_sync(ClockModel clock, SimTime true_time, Rng &rng)
{
    clock.offset_ns = clock.sync_residual.sample(rng);
    clock.last_sync_true_time = true_time;
    return clock;
}

SimTime true_time_for_reading(const ClockModel &clock, SimTime reading)
{
    const i128 base = clock.last_sync_true_time;
    const i128 target = static_cast<i128>(reading) - base - clock.offset_ns;
    if (target <= 0)
        return clock.last_sync_true_time;

    const i128 scale = static_cast<i128>(clock.drift.den) * kPpmScale;
    const i128 rate = scale + clock.drift.num;
    if (rate <= 0)
        throw Error("clock drift of -1e6 ppm or below never advances");

    auto advance = [&](i128 e) { return e + drift_term(clock.drift, e); };
    i128 e = target * scale / rate;
    while (advance(e) < target)
        ++e;
    while (e > 0 && advance(e - 1) >= target)
        --e;
    return static_cast<SimTime>(base + e);
}

NodeClock::NodeClock(ClockModel model, Rng sync_rng) : current_(std::move(model)), rng_(sync_rng) {}

SimTime NodeClock::read(SimTime true_time) const
{
    if (previous_ && true_time < current_.last_sync_true_time)
        return clock_read(*previous_, true_time);
    return clock_read(current_, true_time);
}

SimTime NodeClock::true_time_for(SimTime reading) const { return true_time_for_reading(current_, reading); }

void NodeClock::sync(SimTime true_time)
{
    previous_ = current_;
    current_ = apply_sync(current_, true_time, rng_);
}

} // namespace tsnsim
