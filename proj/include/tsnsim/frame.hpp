#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "tsnsim/time.hpp"

namespace tsnsim {

struct MacAddress
{
    std::uint64_t value = 0; // low 48 bits

    static MacAddress parse(std::string_view text); // "02:00:00:00:00:01"
    std::string to_string() const;

    auto operator<=>(const MacAddress &) const = default;
};

struct StreamKey
{
    MacAddress dest_mac;
    std::uint16_t vlan_id = 0; // 12 bits
    std::uint8_t pcp = 0;

    auto operator<=>(const StreamKey &) const = default;
};

/// Clock readings for one packet: system clock for sw_*, PHC for hw_*.
struct TimestampTrace
{
    SimTime intended_tx = 0;
    std::optional<SimTime> sw_tx;
    std::optional<SimTime> hw_tx;
    std::optional<SimTime> hw_rx;
    std::optional<SimTime> sw_rx;
};

/// True-time instants of the same pipeline stages, kept for auditing.
struct TrueTimeline
{
    std::optional<SimTime> wake;
    std::optional<SimTime> sw_tx;
    std::optional<SimTime> hw_tx;  // first bit leaves the talker
    std::optional<SimTime> hw_rx;  // first bit reaches the listener
    std::optional<SimTime> eof_rx; // last bit reaches the listener
    std::optional<SimTime> sw_rx;
};

/// Which talker generated a frame and its index in that talker's sequence.
struct FrameOrigin
{
    std::uint32_t talker = 0;
    std::uint64_t index = 0;
};

struct Frame
{
    std::uint64_t id = 0;
    std::uint32_t size_bytes = 64;
    std::uint8_t priority = 0;
    std::uint8_t traffic_class = 0;
    std::optional<StreamKey> stream;
    std::optional<std::uint16_t> seq;  // FRER sequence number
    std::optional<std::uint8_t> ipv;   // internal priority value, metadata only
    std::optional<SimTime> txtime;     // launch time
    TimestampTrace trace;
    TrueTimeline timeline;
    FrameOrigin origin;
};

/// Fields that would appear on the wire. IPV, txtime and timestamps are
/// metadata and do not participate.
bool wire_equal(const Frame &a, const Frame &b);

/// Egress traffic class: the IPV when one was assigned, else the priority.
inline std::uint8_t egress_class(const Frame &f) { return f.ipv.value_or(f.priority); }

struct FrameSizeLimits
{
    std::uint32_t min_bytes = 64;
    std::uint32_t max_bytes = 9000;
};

/// Throws InvalidFrame if size_bytes is outside limits.
void check_frame_size(std::uint32_t size_bytes, FrameSizeLimits limits = {});

/// ((size + overhead) * 8 * 1e9) / rate, rounded to nearest ns.
/// Throws ZeroRate if link_rate_bps == 0.
Duration transmission_time(std::uint64_t size_bytes, std::uint64_t link_rate_bps,
                           std::uint64_t overhead_bytes = 0);

} // namespace tsnsim
