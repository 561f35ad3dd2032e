#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tsnsim/clock.hpp"
#include "tsnsim/egress_port.hpp"
#include "tsnsim/engine.hpp"
#include "tsnsim/frer.hpp"
#include "tsnsim/jitter.hpp"
#include "tsnsim/psfp.hpp"

namespace tsnsim {

enum class ForwardingPreset
{
    linux_bridge,
    xdp,
    af_xdp,
    custom,
};

/// Illustrative software-switching latencies. Only their ordering
/// (xdp fastest, linux_bridge slowest) is meant to carry information.
JitterDist preset_distribution(ForwardingPreset preset);
std::optional<ForwardingPreset> parse_forwarding_preset(std::string_view name);
const char *to_string(ForwardingPreset preset);

struct BridgeCounters
{
    std::uint64_t received = 0;
    std::uint64_t forwarded = 0;
    std::uint64_t psfp_dropped = 0;
    std::uint64_t frer_eliminated = 0;
    std::uint64_t frer_replicated = 0;
};

struct ReplicationRule
{
    std::vector<std::string> ports;
};

/// Store-and-forward bridge. Ingress filtering runs when the last bit of a
/// frame has arrived, read on the bridge PHC; the egress stage follows after
/// one forwarding-latency sample.
class BridgeNode
{
  public:
    using DropSink = std::function<void(const std::string &where, const std::string &reason, const Frame &)>;

    BridgeNode(EventEngine &engine, std::string name, const NodeClock &phc, JitterDist forwarding_latency,
               Rng rng, DropSink drops);
    BridgeNode(const BridgeNode &) = delete;
    BridgeNode &operator=(const BridgeNode &) = delete;

    void add_port(const std::string &port, EgressPort *egress);
    void set_ingress_filter(const std::string &port, IngressFilter filter);
    void add_route(MacAddress dest, const std::string &port);
    void add_replication(const StreamKey &stream, ReplicationRule rule);
    void add_elimination(const StreamKey &stream, std::size_t window);

    /// Frame whose last bit arrived on `port` at the current engine time.
    /// Returns the scheduled egress event, or nullopt if ingress dropped it.
    std::optional<EventEngine::Handle> forward(Frame frame, const std::string &port);

    const std::string &name() const noexcept { return name_; }
    const BridgeCounters &counters() const noexcept { return counters_; }
    const JitterDist &forwarding_latency() const noexcept { return latency_; }
    const std::map<StreamKey, RecoveryState> &recovery() const noexcept { return recovery_; }

  private:
    void egress_stage(Frame frame);
    void send(Frame frame, const std::string &port);

    EventEngine &engine_;
    std::string name_;
    const NodeClock &phc_;
    JitterDist latency_;
    Rng rng_;
    DropSink drops_;
    std::map<std::string, EgressPort *> ports_;
    std::map<std::string, IngressFilter> filters_;
    std::map<MacAddress, std::string> fdb_;
    std::map<StreamKey, ReplicationRule> replicate_;
    std::map<StreamKey, SequenceGenerator> seqgen_;
    std::map<StreamKey, RecoveryState> recovery_;
    BridgeCounters counters_;
};

} // namespace tsnsim
