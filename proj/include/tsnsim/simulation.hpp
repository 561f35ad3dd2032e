#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tsnsim/egress_port.hpp"
#include "tsnsim/frame.hpp"
#include "tsnsim/scenario.hpp"

namespace tsnsim {

/// One talker packet: the intended send time and the four clock readings
/// (system clock for sw_*, PHC for hw_*).
struct PacketRecord
{
    std::uint64_t seq = 0;
    SimTime intended_tx = 0;
    std::optional<SimTime> sw_tx;
    std::optional<SimTime> hw_tx;
    std::optional<SimTime> hw_rx;
    std::optional<SimTime> sw_rx;

    bool operator==(const PacketRecord &) const = default;
};

struct StreamResult
{
    std::string name;
    Duration period_ns = 0;
    std::vector<PacketRecord> records; // index == seq
    std::vector<TrueTimeline> timelines;
    std::uint64_t generated = 0;
    std::uint64_t received = 0;
    std::uint64_t duplicates = 0;
};

struct RunMetadata
{
    std::uint64_t seed = 0;
    std::string rng_algorithm;
    std::string measured_stream;
    Duration histogram_bin_ns = 100;
    std::optional<std::uint32_t> cqf_hops;
    std::optional<Duration> cqf_bound_ns;
    SimTime t_end = 0;
    std::uint64_t events = 0;
};

struct RunResult
{
    RunMetadata metadata;
    std::map<std::string, StreamResult> streams;
    std::map<std::string, std::uint64_t> drops;      // by reason
    std::map<std::string, std::uint64_t> drop_sites; // "<where> <reason>"
    std::map<std::string, std::uint64_t> counters;
    std::map<std::string, std::vector<TxRecord>> tx_logs; // ports with record_tx

    const StreamResult &measured() const { return streams.at(metadata.measured_stream); }
};

/// Builds the network described by cfg and runs it to completion.
RunResult run_scenario(const ScenarioConfig &cfg, std::optional<std::uint64_t> seed_override = std::nullopt);

} // namespace tsnsim
