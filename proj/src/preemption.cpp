#include "tsnsim/preemption.hpp"

#include <algorithm>

#include "tsnsim/errors.hpp"
#include "tsnsim/frame.hpp"

namespace tsnsim {

std::uint64_t bytes_on_wire(const OngoingTransmission &tx, SimTime t, std::uint64_t rate_bps)
{
    if (rate_bps == 0)
        throw ZeroRate("link rate must be positive");
    if (t <= tx.segment_start)
        return tx.sent_before;
    using u128 = UInt128;
    const u128 elapsed = t - tx.segment_start;
    const auto sent = static_cast<std::uint64_t>(elapsed * rate_bps / (8u * 1'000'000'000ULL));
    return std::min(tx.wire_bytes, tx.sent_before + sent);
}

SimTime byte_boundary_time(const OngoingTransmission &tx, std::uint64_t byte_pos, std::uint64_t rate_bps)
{
    return tx.segment_start + static_cast<SimTime>(transmission_time(byte_pos - tx.sent_before, rate_bps));
}

PreemptPlan preempt_transmit(const PreemptionConfig &cfg, const OngoingTransmission &tx,
                             std::uint64_t express_wire_bytes, SimTime t, std::uint64_t rate_bps)
{
    if (!cfg.enabled)
        throw NotPreemptable("frame preemption is disabled on this port");

    const std::uint64_t frag = cfg.min_fragment_bytes;
    PreemptPlan plan;
    plan.bytes_on_wire = bytes_on_wire(tx, t, rate_bps);
    const std::uint64_t point = (plan.bytes_on_wire / frag + 1) * frag;
    const Duration express_time = transmission_time(express_wire_bytes, rate_bps);

    if (point <= tx.wire_bytes && tx.wire_bytes - point >= frag) {
        plan.preempts = true;
        plan.preempt_at_bytes = point;
        plan.express_start = byte_boundary_time(tx, point, rate_bps);
        plan.express_end = plan.express_start + static_cast<SimTime>(express_time);
        plan.pframe_resume = plan.express_end;
        plan.pframe_end = plan.pframe_resume + static_cast<SimTime>(transmission_time(tx.wire_bytes - point, rate_bps));
    } else {
        plan.preempt_at_bytes = tx.wire_bytes;
        plan.express_start = byte_boundary_time(tx, tx.wire_bytes, rate_bps);
        plan.express_end = plan.express_start + static_cast<SimTime>(express_time);
        plan.pframe_resume = plan.express_start;
        plan.pframe_end = plan.express_start;
    }
    return plan;
}

} // namespace tsnsim
