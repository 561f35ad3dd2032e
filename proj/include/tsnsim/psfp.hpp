#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "tsnsim/frame.hpp"
#include "tsnsim/gcl.hpp"
#include "tsnsim/stream_id.hpp"

namespace tsnsim {

struct StreamGateEntry
{
    bool open = true;
    Duration duration_ns = 0;
    std::optional<std::uint8_t> ipv;
    std::optional<std::uint64_t> max_octets; // budget per occurrence of this window
};

struct PsfpDecision
{
    enum class Outcome
    {
        Pass,
        DropClosedGate,
        DropOctetBudget,
        DropNoStream,
    };
    Outcome outcome = Outcome::Pass;
    std::optional<std::uint8_t> ipv;

    bool passed() const { return outcome == Outcome::Pass; }
};

const char *to_string(PsfpDecision::Outcome outcome);

/// Ingress stream gate. Each occurrence of an entry is one window; the
/// octet budget restarts at every window start. A frame dropped for budget
/// does not consume what is left of it.
class StreamGate
{
  public:
    StreamGate(SimTime base_time, std::vector<StreamGateEntry> entries);

    /// Gate decision for a frame whose reception completes at t (gate clock).
    /// Instants before base_time count as closed.
    PsfpDecision process(Frame &frame, SimTime t);

    const GateControlList &gcl() const noexcept { return gcl_; }
    const std::vector<StreamGateEntry> &entries() const noexcept { return entries_; }
    std::uint64_t running_octets() const noexcept { return running_octets_; }

  private:
    GateControlList gcl_;
    std::vector<StreamGateEntry> entries_;
    std::optional<std::pair<std::uint64_t, std::size_t>> window_; // (cycle, entry)
    std::uint64_t running_octets_ = 0;
};

PsfpDecision psfp_process(StreamGate &gate, Frame &frame, SimTime t);

/// Sets the IPV metadata; frame contents are untouched. Throws
/// std::out_of_range for ipv > 7.
Frame assign_ipv(Frame frame, std::uint8_t ipv);

/// Stream identification plus per-stream gates for one ingress port.
struct IngressFilter
{
    StreamRules rules;
    std::map<StreamHandle, StreamGate> gates;
    bool drop_unmatched = false;

    PsfpDecision apply(Frame &frame, SimTime t);
};

} // namespace tsnsim
