#include "tsnsim/bridge.hpp"

#include "tsnsim/errors.hpp"

namespace tsnsim {

JitterDist preset_distribution(ForwardingPreset preset)
{
    switch (preset) {
    case ForwardingPreset::xdp: return JitterDist::normal(4000, 1000, 0);
    case ForwardingPreset::af_xdp: return JitterDist::normal(7000, 1750, 0);
    case ForwardingPreset::linux_bridge: return JitterDist::normal(8000, 1500, 0);
    case ForwardingPreset::custom: break;
    }
    return JitterDist::constant(0);
}

std::optional<ForwardingPreset> parse_forwarding_preset(std::string_view name)
{
    if (name == "linux_bridge")
        return ForwardingPreset::linux_bridge;
    if (name == "xdp")
        return ForwardingPreset::xdp;
    if (name == "af_xdp")
        return ForwardingPreset::af_xdp;
    if (name == "custom")
        return ForwardingPreset::custom;
    return std::nullopt;
}

const char *to_string(ForwardingPreset preset)
{
    switch (preset) {
    case ForwardingPreset::linux_bridge: return "linux_bridge";
    case ForwardingPreset::xdp: return "xdp";
    case ForwardingPreset::af_xdp: return "af_xdp";
    case ForwardingPreset::custom: return "custom";
    }
    return "custom";
}

BridgeNode::BridgeNode(EventEngine &engine, std::string name, const NodeClock &phc, JitterDist forwarding_latency,
                       Rng rng, DropSink drops)
    : engine_(engine), name_(std::move(name)), phc_(phc), latency_(std::move(forwarding_latency)), rng_(rng),
      drops_(std::move(drops))
{
    if (latency_.lower_bound() < 0)
        throw Error("bridge " + name_ + ": forwarding latency can be negative");
}

void BridgeNode::add_port(const std::string &port, EgressPort *egress) { ports_[port] = egress; }

void BridgeNode::set_ingress_filter(const std::string &port, IngressFilter filter)
{
    filters_.insert_or_assign(port, std::move(filter));
}

void BridgeNode::add_route(MacAddress dest, const std::string &port) { fdb_[dest] = port; }

void BridgeNode::add_replication(const StreamKey &stream, ReplicationRule rule)
{
    replicate_[stream] = std::move(rule);
}

void BridgeNode::add_elimination(const StreamKey &stream, std::size_t window)
{
    recovery_.insert_or_assign(stream, RecoveryState(window));
}

std::optional<EventEngine::Handle> BridgeNode::forward(Frame frame, const std::string &port)
{
    ++counters_.received;
    if (auto it = filters_.find(port); it != filters_.end()) {
        const PsfpDecision d = it->second.apply(frame, phc_.read(engine_.now()));
        if (!d.passed()) {
            ++counters_.psfp_dropped;
            drops_(name_ + "." + port, to_string(d.outcome), frame);
            return std::nullopt;
        }
    }
    const Duration delay = latency_.sample(rng_);
    return engine_.schedule_in(delay, [this, f = std::move(frame)]() mutable { egress_stage(std::move(f)); });
}

void BridgeNode::egress_stage(Frame frame)
{
    if (frame.stream) {
        if (auto it = recovery_.find(*frame.stream); it != recovery_.end()) {
            const RecoverResult r = it->second.recover(frame);
            if (r != RecoverResult::Accept) {
                ++counters_.frer_eliminated;
                drops_(name_, r == RecoverResult::DiscardDuplicate ? "frer_duplicate" : "frer_stale", frame);
                return;
            }
        }
        if (auto it = replicate_.find(*frame.stream); it != replicate_.end()) {
            if (!frame.seq)
                frame.seq = seqgen_[*frame.stream].generate();
            std::vector<std::uint32_t> paths(it->second.ports.size());
            for (std::uint32_t i = 0; i < paths.size(); ++i)
                paths[i] = i;
            for (auto &copy : replicate(frame, paths)) {
                ++counters_.frer_replicated;
                send(std::move(copy.frame), it->second.ports[copy.path]);
            }
            return;
        }
    }
    const MacAddress dest = frame.stream ? frame.stream->dest_mac : MacAddress{};
    const auto route = fdb_.find(dest);
    if (route == fdb_.end())
        throw UnknownEgress("bridge " + name_ + ": no route for " + dest.to_string());
    send(std::move(frame), route->second);
}

void BridgeNode::send(Frame frame, const std::string &port)
{
    const auto it = ports_.find(port);
    if (it == ports_.end())
        throw UnknownEgress("bridge " + name_ + ": no port " + port);
    ++counters_.forwarded;
    if (it->second->enqueue(frame) == EnqueueResult::DroppedFull)
        drops_(name_ + "." + port, "queue_full", frame);
}

} // namespace tsnsim
