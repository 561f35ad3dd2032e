#pragma once

#include <cstdint>

#include "tsnsim/gcl.hpp"
#include "tsnsim/time.hpp"

namespace tsnsim {

struct PreemptionConfig
{
    bool enabled = false;
    GateMask express_classes = 0; // eMAC; all other classes use the pMAC
    std::uint32_t min_fragment_bytes = 64;

    bool is_express(unsigned tclass) const { return ((express_classes >> tclass) & 1u) != 0; }
};

/// Segment of a preemptable frame currently on the wire.
struct OngoingTransmission
{
    std::uint64_t wire_bytes = 0;  // whole frame including per-frame overhead
    std::uint64_t sent_before = 0; // bytes sent by earlier fragments
    SimTime segment_start = 0;
};

struct PreemptPlan
{
    bool preempts = false;
    std::uint64_t bytes_on_wire = 0;    // at the express arrival
    std::uint64_t preempt_at_bytes = 0; // fragment boundary (== wire_bytes if no preemption)
    SimTime express_start = 0;
    SimTime express_end = 0;
    SimTime pframe_resume = 0;
    SimTime pframe_end = 0;
};

std::uint64_t bytes_on_wire(const OngoingTransmission &tx, SimTime t, std::uint64_t rate_bps);

/// Instant at which byte position `byte_pos` of the frame has left the MAC.
SimTime byte_boundary_time(const OngoingTransmission &tx, std::uint64_t byte_pos, std::uint64_t rate_bps);

/// Where an express frame arriving at t cuts the ongoing pMAC frame. The cut
/// is the smallest multiple of min_fragment_bytes strictly above the bytes
/// already sent, and only if at least min_fragment_bytes remain after it;
/// otherwise the express frame waits for the end of the pMAC frame.
/// Throws NotPreemptable if preemption is disabled.
PreemptPlan preempt_transmit(const PreemptionConfig &cfg, const OngoingTransmission &tx,
                             std::uint64_t express_wire_bytes, SimTime t, std::uint64_t rate_bps);

} // namespace tsnsim
