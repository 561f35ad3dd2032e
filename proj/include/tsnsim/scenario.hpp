#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "tsnsim/bridge.hpp"
#include "tsnsim/clock.hpp"
#include "tsnsim/egress_port.hpp"
#include "tsnsim/gcl.hpp"
#include "tsnsim/jitter.hpp"
#include "tsnsim/psfp.hpp"
#include "tsnsim/stream_id.hpp"

namespace tsnsim {

struct PortRef
{
    std::string node;
    std::string port;

    std::string str() const { return node + "." + port; }
    auto operator<=>(const PortRef &) const = default;
};

enum class NodeKind
{
    end_station,
    bridge,
};

struct NodeSpec
{
    std::string name;
    NodeKind kind = NodeKind::end_station;
    std::optional<MacAddress> mac;
    ForwardingPreset preset = ForwardingPreset::custom;
    JitterDist forwarding_latency = JitterDist::constant(0);
    std::map<MacAddress, std::string> fdb; // explicit routes; the rest is derived
};

struct LinkSpec
{
    std::string name;
    PortRef a;
    PortRef b;
    LinkParams params;
};

struct ClockSpec
{
    ClockModel phc;
    ClockModel system;
};

struct TaprioSpec
{
    SimTime base_time = 0;
    std::vector<GclEntry> entries;
    std::optional<Duration> cycle_time_ns;
    GuardMode guard = GuardMode::fit;
};

struct EtfSpec
{
    bool offload = false;
    std::optional<Duration> delta_ns;

    Duration delta() const
    {
        return delta_ns.value_or(offload ? kEtfDefaultDeltaOffload : kEtfDefaultDeltaSoftware);
    }
};

struct ShaperSpec
{
    std::optional<TaprioSpec> taprio;
    std::optional<EtfSpec> etf;
    PreemptionConfig preemption;
    std::size_t queue_capacity = 1000;
    bool record_tx = false;
};

struct FilterStreamSpec
{
    StreamPattern match;
    SimTime base_time = 0;
    std::vector<StreamGateEntry> entries;
};

struct FilterSpec
{
    bool drop_unmatched = false;
    std::vector<FilterStreamSpec> streams;
};

struct FrerReplicateSpec
{
    std::string node;
    std::string stream;
    std::vector<std::string> ports;
};

struct FrerEliminateSpec
{
    std::string node;
    std::string stream;
    std::size_t window = RecoveryState::kDefaultWindow;
};

struct FrerSpec
{
    std::vector<FrerReplicateSpec> replicate;
    std::vector<FrerEliminateSpec> eliminate;
};

struct CqfSpec
{
    Duration cycle_time_ns = 0;
    std::uint8_t ipv_even = 0;
    std::uint8_t ipv_odd = 1;
    SimTime base_time = 0;
    std::vector<std::string> bridges; // in path order; hops = size()
    std::vector<std::string> streams; // empty: every stream
};

enum class TalkerMode
{
    sleep,
    txtime,
};

struct TrafficSpec
{
    std::string name;
    PortRef talker;
    std::string listener;
    MacAddress dest_mac;
    std::uint16_t vlan_id = 0;
    std::uint8_t pcp = 0;
    std::optional<std::uint8_t> priority; // defaults to pcp
    Duration period_ns = 500'000;
    Duration phase_ns = 0;
    std::optional<std::uint64_t> count;
    std::uint32_t frame_size_bytes = 128;
    TalkerMode mode = TalkerMode::sleep;
    Duration advance_ns = 100'000; // txtime mode: wake this long before txtime
    JitterDist wake_jitter = JitterDist::constant(0);
    JitterDist stack_latency = JitterDist::constant(0);
    JitterDist driver_latency = JitterDist::constant(0);
    JitterDist hw_precision = JitterDist::constant(0);
    JitterDist rx_latency = JitterDist::constant(0);

    StreamKey key() const { return StreamKey{dest_mac, vlan_id, pcp}; }
    std::uint8_t frame_priority() const { return priority.value_or(pcp); }
};

struct RunSpec
{
    std::uint64_t count = 10'000;
    std::uint64_t seed = 1;
    SimTime start_ns = 1'000'000'000;
    Duration drain_ns = 100'000'000;
    std::optional<std::string> measure;
    std::optional<Duration> histogram_bin_ns;
};

struct ScenarioConfig
{
    std::vector<NodeSpec> nodes;
    std::vector<LinkSpec> links;
    std::map<std::string, ClockSpec> clocks;
    std::map<PortRef, ShaperSpec> shapers;
    std::map<PortRef, FilterSpec> filters;
    FrerSpec frer;
    std::optional<CqfSpec> cqf;
    std::vector<TrafficSpec> traffic;
    RunSpec run;

    const NodeSpec *node(const std::string &name) const;
    const TrafficSpec *stream(const std::string &name) const;
    const TrafficSpec &measured() const;
    std::uint64_t count_for(const TrafficSpec &t) const { return t.count.value_or(run.count); }
};

/// Parses and validates. Throws ConfigInvalid listing every problem with its
/// field path.
ScenarioConfig parse_scenario(const nlohmann::json &doc);
ScenarioConfig load_scenario(const std::filesystem::path &path);
nlohmann::json read_json_file(const std::filesystem::path &path);

/// Semantic checks on an already parsed config; returns diagnostics.
std::vector<std::string> validate_scenario(const ScenarioConfig &cfg);

/// Sets a value addressed by a dotted path ("traffic.0.period_ns"). Array
/// elements are addressed by index; missing object members on the way are
/// created. Throws ConfigInvalid for a bad index or a path through a scalar.
void set_dotted(nlohmann::json &doc, const std::string &dotted_key, nlohmann::json value);

/// A sweep value from the command line: JSON if it parses, otherwise a string.
nlohmann::json parse_cli_value(const std::string &text);

JitterDist parse_dist(const nlohmann::json &j);
nlohmann::json dist_to_json(const JitterDist &d);

} // namespace tsnsim
