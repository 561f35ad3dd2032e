#include "tsnsim/egress_port.hpp"

#include <algorithm>

#include "tsnsim/errors.hpp"

namespace tsnsim {

namespace {
TaprioConfig taprio_config(const EgressPortConfig &cfg)
{
    TaprioConfig t;
    t.gcl = cfg.gcl;
    t.guard = cfg.guard;
    t.queue_capacity = cfg.queue_capacity;
    t.link_rate_bps = cfg.link.rate_bps;
    t.overhead_bytes = cfg.link.overhead_bytes;
    return t;
}
} // namespace

EgressPort::EgressPort(EventEngine &engine, EgressPortConfig cfg, const NodeClock &phc, Rng rng, WireDone on_done)
    : engine_(engine), cfg_(std::move(cfg)), phc_(phc), on_done_(std::move(on_done)), taprio_(taprio_config(cfg_))
{
    if (cfg_.link.rate_bps == 0)
        throw ZeroRate("port " + cfg_.name + ": link rate must be positive");
    if (cfg_.launch_queue)
        launch_ = std::make_unique<EtfScheduler>(engine_, *cfg_.launch_queue, phc_, rng,
                                                 [this](Frame f) { on_launch(std::move(f)); });
}

SimTime EgressPort::gate_now() const { return cfg_.gcl ? phc_.read(engine_.now()) : engine_.now(); }

GateMask EgressPort::express_mask() const
{
    return cfg_.preemption.enabled ? cfg_.preemption.express_classes : GateMask{0};
}

EnqueueResult EgressPort::enqueue(Frame frame)
{
    frame.traffic_class = egress_class(frame);
    const auto r = taprio_.enqueue(std::move(frame), gate_now());
    if (r == EnqueueResult::Queued)
        kick();
    return r;
}

EtfEnqueueResult EgressPort::enqueue_launch(Frame frame)
{
    if (!launch_)
        throw Error("port " + cfg_.name + " has no offloaded launch-time queue");
    frame.traffic_class = egress_class(frame);
    return launch_->enqueue(std::move(frame));
}

void EgressPort::on_launch(Frame frame)
{
    due_launches_.emplace_back(std::move(frame), engine_.now());
    kick();
}

void EgressPort::kick()
{
    if (active_) {
        maybe_preempt();
        return;
    }
    const SimTime g = gate_now();
    const GateMask em = express_mask();

    auto start_due = [&] {
        auto [f, due_at] = std::move(due_launches_.front());
        due_launches_.pop_front();
        if (engine_.now() > due_at)
            ++counters_.etf_late_launch;
        const bool express = em != 0 && cfg_.preemption.is_express(f.traffic_class);
        begin_frame(std::move(f), express);
    };

    if (em != 0) {
        if (!due_launches_.empty() && cfg_.preemption.is_express(due_launches_.front().first.traffic_class)) {
            start_due();
            return;
        }
        if (auto sel = taprio_.select(g, em)) {
            begin_frame(std::move(sel->frame), true);
            return;
        }
    }
    if (suspended_) {
        Transmission tx = std::move(*suspended_);
        suspended_.reset();
        start(std::move(tx));
        return;
    }
    if (!due_launches_.empty()) {
        start_due();
        return;
    }
    if (auto sel = taprio_.select(g, static_cast<GateMask>(~em))) {
        begin_frame(std::move(sel->frame), false);
        return;
    }
    arm_wake(taprio_.next_wakeup(g));
}

void EgressPort::begin_frame(Frame frame, bool express)
{
    const SimTime now = engine_.now();
    if (!frame.trace.hw_tx) {
        frame.trace.hw_tx = phc_.read(now);
        frame.timeline.hw_tx = now;
    }
    Transmission tx;
    tx.wire_bytes = frame.size_bytes + cfg_.link.overhead_bytes;
    tx.frame = std::move(frame);
    tx.express = express;
    tx.first_start = now;
    if (tx_start_hook_)
        tx_start_hook_(tx.frame);
    start(std::move(tx));
}

void EgressPort::start(Transmission tx)
{
    tx.segment_start = engine_.now();
    const auto remaining = transmission_time(tx.wire_bytes - tx.sent_before, cfg_.link.rate_bps);
    tx.end_event = engine_.schedule_in(remaining, [this] { finish(); });
    active_ = std::move(tx);
}

void EgressPort::finish()
{
    Transmission tx = std::move(*active_);
    active_.reset();
    const SimTime now = engine_.now();
    tx.segments.push_back({tx.segment_start, now});
    ++counters_.frames_sent;
    if (cfg_.record_tx)
        tx_log_.push_back(TxRecord{tx.frame.id, tx.frame.traffic_class, tx.express, tx.frame.size_bytes,
                                   tx.frame.origin, std::move(tx.segments)});
    on_done_(std::move(tx.frame), tx.first_start, now);
    kick();
}

void EgressPort::maybe_preempt()
{
    if (!cfg_.preemption.enabled || active_->express || preempt_event_)
        return;
    const auto c = taprio_.peek(gate_now(), cfg_.preemption.express_classes);
    if (!c)
        return;
    const OngoingTransmission ongoing{active_->wire_bytes, active_->sent_before, active_->segment_start};
    const auto express_bytes = taprio_.head(*c).size_bytes + cfg_.link.overhead_bytes;
    const PreemptPlan plan =
        preempt_transmit(cfg_.preemption, ongoing, express_bytes, engine_.now(), cfg_.link.rate_bps);
    if (!plan.preempts)
        return;
    engine_.cancel(active_->end_event);
    const std::uint64_t point = plan.preempt_at_bytes;
    preempt_event_ = engine_.schedule(plan.express_start, [this, point] { on_preempt(point); });
}

void EgressPort::on_preempt(std::uint64_t point)
{
    preempt_event_.reset();
    Transmission tx = std::move(*active_);
    active_.reset();
    tx.segments.push_back({tx.segment_start, engine_.now()});
    tx.sent_before = point;
    suspended_ = std::move(tx);
    ++counters_.preemptions;
    kick();
}

void EgressPort::arm_wake(std::optional<SimTime> gate_time)
{
    if (!gate_time)
        return;
    const SimTime now = engine_.now();
    SimTime t = cfg_.gcl ? phc_.true_time_for(*gate_time) : *gate_time;
    t = std::max(t, now + 1);
    if (wake_event_ && wake_at_ <= t)
        return;
    if (wake_event_)
        engine_.cancel(*wake_event_);
    wake_at_ = t;
    wake_event_ = engine_.schedule(t, [this] {
        wake_event_.reset();
        kick();
    });
}

PortCounters EgressPort::counters() const
{
    PortCounters c = counters_;
    c.dropped_full = taprio_.dropped_full();
    c.dropped_oversize = taprio_.dropped_oversize();
    if (launch_)
        c.etf_dropped_past_txtime = launch_->queue().dropped_past_txtime();
    return c;
}

} // namespace tsnsim
