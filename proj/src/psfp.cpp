#include "tsnsim/psfp.hpp"

#include <stdexcept>

#include "tsnsim/errors.hpp"
#include <string>

namespace tsnsim {

namespace {
std::vector<GclEntry> to_gcl(const std::vector<StreamGateEntry> &entries)
{
    std::vector<GclEntry> out;
    out.reserve(entries.size());
    for (const auto &e : entries)
        out.push_back({static_cast<GateMask>(e.open ? 1 : 0), e.duration_ns});
    return out;
}
} // namespace

const char *to_string(PsfpDecision::Outcome outcome)
{
    switch (outcome) {
    case PsfpDecision::Outcome::Pass: return "pass";
    case PsfpDecision::Outcome::DropClosedGate: return "psfp_closed_gate";
    case PsfpDecision::Outcome::DropOctetBudget: return "psfp_octet_budget";
    case PsfpDecision::Outcome::DropNoStream: return "psfp_no_stream";
    }
    return "unknown";
}

StreamGate::StreamGate(SimTime base_time, std::vector<StreamGateEntry> entries)
    : gcl_(base_time, to_gcl(entries)), entries_(std::move(entries))
{
    for (const auto &e : entries_)
        if (e.ipv && *e.ipv > 7)
            throw InvalidSchedule("stream gate IPV " + std::to_string(*e.ipv) + " out of range 0-7");
}

PsfpDecision StreamGate::process(Frame &frame, SimTime t)
{
    using O = PsfpDecision::Outcome;
    if (t < gcl_.base_time())
        return {O::DropClosedGate, std::nullopt};
    const GclState s = gcl_.state_at(t);
    const StreamGateEntry &entry = entries_[s.entry_index];
    if (!entry.open)
        return {O::DropClosedGate, std::nullopt};

    const auto window = std::make_pair(s.cycle_index, s.entry_index);
    if (window_ != window) {
        window_ = window;
        running_octets_ = 0;
    }
    if (entry.max_octets && running_octets_ + frame.size_bytes > *entry.max_octets)
        return {O::DropOctetBudget, std::nullopt};

    running_octets_ += frame.size_bytes;
    if (entry.ipv)
        frame = assign_ipv(std::move(frame), *entry.ipv);
    return {O::Pass, entry.ipv};
}

PsfpDecision psfp_process(StreamGate &gate, Frame &frame, SimTime t) { return gate.process(frame, t); }

Frame assign_ipv(Frame frame, std::uint8_t ipv)
{
    if (ipv > 7)
        throw std::out_of_range("IPV " + std::to_string(ipv) + " out of range 0-7");
    frame.ipv = ipv;
    return frame;
}

PsfpDecision IngressFilter::apply(Frame &frame, SimTime t)
{
    const auto handle = rules.identify(frame);
    if (!handle) {
        if (drop_unmatched)
            return {PsfpDecision::Outcome::DropNoStream, std::nullopt};
        return {};
    }
    const auto it = gates.find(*handle);
    if (it == gates.end())
        return {};
    return it->second.process(frame, t);
}

} // namespace tsnsim
