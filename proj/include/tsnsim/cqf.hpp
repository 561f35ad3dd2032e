#pragma once

#include <cstdint>

#include "tsnsim/gcl.hpp"
#include "tsnsim/psfp.hpp"

namespace tsnsim {

struct CqfConfig
{
    Duration cycle_time_ns = 0;
    std::uint8_t ipv_even = 0;
    std::uint8_t ipv_odd = 1;
    std::uint32_t hops = 1;
    SimTime base_time = 0;
};

/// Ingress gate and egress schedule that together implement cyclic queuing
/// and forwarding on one bridge.
struct CqfSchedules
{
    StreamGate ingress;
    GateControlList egress;
};

/// Ingress: always open, IPV alternating ipv_even / ipv_odd per cycle.
/// Egress: while frames are tagged ipv_even the ipv_even gate is closed and
/// ipv_odd drains, and the other way round in odd cycles. Classes outside
/// the pair stay open. Throws InvalidSchedule on a non-positive cycle or
/// equal IPVs.
CqfSchedules cqf_compose(const CqfConfig &cfg);

/// (hops + 1) * cycle_time. Throws ZeroHops if hops == 0.
Duration cqf_latency_bound(std::uint32_t hops, Duration cycle_time_ns);

} // namespace tsnsim
