#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tsnsim/clock.hpp"
#include "tsnsim/engine.hpp"
#include "tsnsim/etf.hpp"
#include "tsnsim/frame.hpp"
#include "tsnsim/gcl.hpp"
#include "tsnsim/preemption.hpp"
#include "tsnsim/taprio.hpp"

namespace tsnsim {

struct LinkParams
{
    std::uint64_t rate_bps = 1'000'000'000;
    Duration propagation_ns = 0;
    std::uint64_t overhead_bytes = 0;
    double loss = 0.0;
};

struct TxSegment
{
    SimTime start = 0;
    SimTime end = 0;
};

struct TxRecord
{
    std::uint64_t frame_id = 0;
    std::uint8_t traffic_class = 0;
    bool express = false;
    std::uint32_t size_bytes = 0;
    FrameOrigin origin;
    std::vector<TxSegment> segments;
};

struct PortCounters
{
    std::uint64_t frames_sent = 0;
    std::uint64_t dropped_full = 0;
    std::uint64_t dropped_oversize = 0;
    std::uint64_t etf_dropped_past_txtime = 0;
    std::uint64_t etf_late_launch = 0;
    std::uint64_t preemptions = 0;
};

struct EgressPortConfig
{
    std::string name;
    LinkParams link;
    std::optional<GateControlList> gcl;
    GuardMode guard = GuardMode::fit;
    std::size_t queue_capacity = 1000;
    PreemptionConfig preemption;
    std::optional<EtfConfig> launch_queue; // offloaded ETF
    bool record_tx = false;
};

/// Transmit side of one port: taprio class queues, an optional offloaded
/// launch-time queue, and a MAC merge sublayer when preemption is enabled.
/// Gates are evaluated against the node's PHC.
class EgressPort
{
  public:
    /// Called when the last bit leaves; times are at the transmitter.
    using WireDone = std::function<void(Frame, SimTime first_bit, SimTime last_bit)>;
    using TxStart = std::function<void(const Frame &)>;

    EgressPort(EventEngine &engine, EgressPortConfig cfg, const NodeClock &phc, Rng rng, WireDone on_done);
    EgressPort(const EgressPort &) = delete;
    EgressPort &operator=(const EgressPort &) = delete;

    EnqueueResult enqueue(Frame frame);

    /// Requires an offloaded launch queue; throws MissingTxtime without txtime.
    EtfEnqueueResult enqueue_launch(Frame frame);

    void on_tx_start(TxStart hook) { tx_start_hook_ = std::move(hook); }

    bool busy() const noexcept { return active_.has_value(); }
    PortCounters counters() const;
    const std::vector<TxRecord> &tx_log() const noexcept { return tx_log_; }
    const EgressPortConfig &config() const noexcept { return cfg_; }

  private:
    struct Transmission
    {
        Frame frame;
        bool express = false;
        std::uint64_t wire_bytes = 0;
        std::uint64_t sent_before = 0;
        SimTime segment_start = 0;
        SimTime first_start = 0;
        EventEngine::Handle end_event = 0;
        std::vector<TxSegment> segments;
    };

    SimTime gate_now() const;
    GateMask express_mask() const;
    void kick();
    void start(Transmission tx);
    void begin_frame(Frame frame, bool express);
    void finish();
    void maybe_preempt();
    void on_preempt(std::uint64_t point);
    void arm_wake(std::optional<SimTime> gate_time);
    void on_launch(Frame frame);

    EventEngine &engine_;
    EgressPortConfig cfg_;
    const NodeClock &phc_;
    WireDone on_done_;
    TxStart tx_start_hook_;
    TaprioPort taprio_;
    std::unique_ptr<EtfScheduler> launch_;
    std::deque<std::pair<Frame, SimTime>> due_launches_;
    std::optional<Transmission> active_;
    std::optional<Transmission> suspended_;
    std::optional<EventEngine::Handle> preempt_event_;
    std::optional<EventEngine::Handle> wake_event_;
    SimTime wake_at_ = 0;
    PortCounters counters_;
    std::vector<TxRecord> tx_log_;
};

} // namespace tsnsim
