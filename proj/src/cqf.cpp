#include "tsnsim/cqf.hpp"

#include <string>

#include "tsnsim/errors.hpp"

namespace tsnsim {

CqfSchedules cqf_compose(const CqfConfig &cfg)
{
    if (cfg.cycle_time_ns <= 0)
        throw InvalidSchedule("CQF cycle time must be positive");
    if (cfg.ipv_even > 7 || cfg.ipv_odd > 7)
        throw InvalidSchedule("CQF IPVs must be in 0-7");
    if (cfg.ipv_even == cfg.ipv_odd)
        throw InvalidSchedule("CQF needs two distinct IPVs");

    StreamGate ingress(cfg.base_time, {
                                          {true, cfg.cycle_time_ns, cfg.ipv_even, std::nullopt},
                                          {true, cfg.cycle_time_ns, cfg.ipv_odd, std::nullopt},
                                      });
    const auto even_bit = static_cast<GateMask>(1u << cfg.ipv_even);
    const auto odd_bit = static_cast<GateMask>(1u << cfg.ipv_odd);
    GateControlList egress(cfg.base_time, {
                                              {static_cast<GateMask>(0xFF & ~even_bit), cfg.cycle_time_ns},
                                              {static_cast<GateMask>(0xFF & ~odd_bit), cfg.cycle_time_ns},
                                          });
    return CqfSchedules{std::move(ingress), std::move(egress)};
}

Duration cqf_latency_bound(std::uint32_t hops, Duration cycle_time_ns)
{
    if (hops == 0)
        throw ZeroHops("CQF bound needs at least one bridge");
    return static_cast<Duration>(hops + 1) * cycle_time_ns;
}

} // namespace tsnsim
