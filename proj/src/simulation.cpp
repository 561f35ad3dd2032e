#include "tsnsim/simulation.hpp"

#include <algorithm>
#include <deque>
#include <memory>
#include <set>

#include "tsnsim/bridge.hpp"
#include "tsnsim/cqf.hpp"
#include "tsnsim/engine.hpp"
#include "tsnsim/errors.hpp"
#include "tsnsim/etf.hpp"
#include "tsnsim/rng.hpp"

namespace tsnsim {

namespace {

class Simulation
{
  public:
    Simulation(const ScenarioConfig &cfg, std::uint64_t seed) : cfg_(cfg), seed_(seed) {}

    RunResult run();

  private:
    struct Talker
    {
        const TrafficSpec *spec = nullptr;
        std::uint32_t index = 0;
        std::uint64_t count = 0;
        Rng wake_rng;
        Rng stack_rng;
        Rng driver_rng;
        Rng rx_rng;
        NodeClock *sys = nullptr;
        EgressPort *port = nullptr;
        bool offload = false;
        EtfScheduler *qdisc = nullptr; // software launch-time queue
        std::optional<StreamKey> eliminate_at_listener;
    };

    Rng fork(const std::string &label) const { return rng_fork(seed_, label); }
    void drop(const std::string &where, const std::string &reason);

    void build_clocks();
    void build_ports();
    void build_bridges();
    void build_talkers();
    void schedule_syncs(NodeClock &clock, SimTime t_end);

    void at_reading(const NodeClock &clock, SimTime reading, std::function<void()> fn);
    void plan_packet(Talker &t, std::uint64_t k);
    void on_wake(Talker &t, std::uint64_t k);
    void to_driver(Talker &t, Frame f);
    void on_wire_done(const PortRef &from, Frame f, SimTime first, SimTime last);
    void on_arrival(const PortRef &at, Frame f, SimTime sof);
    void on_listener(const std::string &node, Frame f, SimTime sof);

    const ScenarioConfig &cfg_;
    std::uint64_t seed_;
    EventEngine engine_;
    std::map<std::string, NodeClock> phc_;
    std::map<std::string, NodeClock> sys_;
    std::map<PortRef, PortRef> peer_;
    std::map<PortRef, const LinkSpec *> link_of_;
    std::map<PortRef, Rng> loss_rng_;
    std::map<PortRef, std::unique_ptr<EgressPort>> ports_;
    std::map<PortRef, std::unique_ptr<EtfScheduler>> qdiscs_;
    std::map<std::string, std::unique_ptr<BridgeNode>> bridges_;
    std::vector<std::unique_ptr<Talker>> talkers_;
    std::map<std::pair<std::string, StreamKey>, RecoveryState> listener_recovery_;
    std::uint64_t next_frame_id_ = 1;
    RunResult result_;
};

void Simulation::drop(const std::string &where, const std::string &reason)
{
    ++result_.drops[reason];
    ++result_.drop_sites[where + " " + reason];
}

void Simulation::build_clocks()
{
    for (const auto &n : cfg_.nodes) {
        ClockSpec spec;
        if (auto it = cfg_.clocks.find(n.name); it != cfg_.clocks.end())
            spec = it->second;
        phc_.emplace(n.name, NodeClock(spec.phc, fork("clock/" + n.name + "/phc")));
        sys_.emplace(n.name, NodeClock(spec.system, fork("clock/" + n.name + "/system")));
    }
}

void Simulation::schedule_syncs(NodeClock &clock, SimTime t_end)
{
    const auto interval = clock.sync_interval();
    if (!interval)
        return;
    struct Chain
    {
        static void next(EventEngine &eng, NodeClock &c, SimTime at, Duration step, SimTime t_end)
        {
            if (at > t_end)
                return;
            eng.schedule(at, [&eng, &c, at, step, t_end] {
                c.sync(at);
                next(eng, c, at + static_cast<SimTime>(step), step, t_end);
            });
        }
    };
    Chain::next(engine_, clock, static_cast<SimTime>(*interval), *interval, t_end);
}

void Simulation::build_ports()
{
    for (const auto &l : cfg_.links) {
        peer_[l.a] = l.b;
        peer_[l.b] = l.a;
        link_of_[l.a] = &l;
        link_of_[l.b] = &l;
    }

    std::optional<CqfSchedules> cqf;
    std::set<std::string> cqf_bridges;
    if (cfg_.cqf) {
        cqf = cqf_compose(CqfConfig{cfg_.cqf->cycle_time_ns, cfg_.cqf->ipv_even, cfg_.cqf->ipv_odd,
                                    static_cast<std::uint32_t>(cfg_.cqf->bridges.size()), cfg_.cqf->base_time});
        cqf_bridges.insert(cfg_.cqf->bridges.begin(), cfg_.cqf->bridges.end());
    }

    for (const auto &[ref, link] : link_of_) {
        EgressPortConfig pc;
        pc.name = ref.str();
        pc.link = link->params;
        if (auto it = cfg_.shapers.find(ref); it != cfg_.shapers.end()) {
            const ShaperSpec &s = it->second;
            if (s.taprio) {
                pc.gcl.emplace(s.taprio->base_time, s.taprio->entries, s.taprio->cycle_time_ns);
                pc.guard = s.taprio->guard;
            }
            pc.queue_capacity = s.queue_capacity;
            pc.preemption = s.preemption;
            pc.record_tx = s.record_tx;
            if (s.etf && s.etf->offload) {
                EtfConfig ec{true, s.etf->delta(), JitterDist::constant(0)};
                for (const auto &t : cfg_.traffic)
                    if (t.talker == ref && t.mode == TalkerMode::txtime) {
                        ec.hw_precision = t.hw_precision;
                        break;
                    }
                pc.launch_queue = ec;
            }
        }
        if (cqf && cqf_bridges.count(ref.node)) {
            pc.gcl = cqf->egress;
            pc.guard = GuardMode::fit;
        }
        const PortRef from = ref;
        ports_[ref] = std::make_unique<EgressPort>(
            engine_, pc, phc_.at(ref.node), fork("port/" + ref.str() + "/etf"),
            [this, from](Frame f, SimTime first, SimTime last) { on_wire_done(from, std::move(f), first, last); });
        loss_rng_.emplace(ref, fork("link/" + ref.str() + "/loss"));
    }
}

void Simulation::build_bridges()
{
    // Shortest-path first hop from every bridge towards every addressed end station.
    std::map<std::string, std::vector<std::pair<std::string, std::string>>> adj; // node -> (port, neighbour)
    for (const auto &l : cfg_.links) {
        adj[l.a.node].emplace_back(l.a.port, l.b.node);
        adj[l.b.node].emplace_back(l.b.port, l.a.node);
    }

    for (const auto &n : cfg_.nodes) {
        if (n.kind != NodeKind::bridge)
            continue;
        auto bridge = std::make_unique<BridgeNode>(
            engine_, n.name, phc_.at(n.name), n.forwarding_latency, fork("bridge/" + n.name + "/forwarding"),
            [this](const std::string &where, const std::string &reason, const Frame &) { drop(where, reason); });
        for (const auto &[ref, port] : ports_)
            if (ref.node == n.name)
                bridge->add_port(ref.port, port.get());

        std::map<std::string, std::string> first_port{{n.name, ""}};
        std::deque<std::string> q{n.name};
        while (!q.empty()) {
            const auto u = q.front();
            q.pop_front();
            if (u != n.name && cfg_.node(u)->kind != NodeKind::bridge)
                continue;
            for (const auto &[port, v] : adj[u]) {
                if (first_port.count(v))
                    continue;
                first_port[v] = u == n.name ? port : first_port[u];
                q.push_back(v);
            }
        }
        for (const auto &m : cfg_.nodes)
            if (m.kind == NodeKind::end_station && m.mac && first_port.count(m.name))
                bridge->add_route(*m.mac, first_port[m.name]);
        for (const auto &[mac, port] : n.fdb)
            bridge->add_route(mac, port);

        for (const auto &[ref, f] : cfg_.filters) {
            if (ref.node != n.name)
                continue;
            IngressFilter filter;
            filter.drop_unmatched = f.drop_unmatched;
            std::vector<StreamRule> rules;
            for (std::size_t i = 0; i < f.streams.size(); ++i) {
                const StreamHandle h{static_cast<std::uint32_t>(i)};
                rules.push_back({f.streams[i].match, h});
                filter.gates.emplace(h, StreamGate(f.streams[i].base_time, f.streams[i].entries));
            }
            filter.rules = make_stream_rules(std::move(rules));
            bridge->set_ingress_filter(ref.port, std::move(filter));
        }

        if (cfg_.cqf && std::count(cfg_.cqf->bridges.begin(), cfg_.cqf->bridges.end(), n.name)) {
            const auto &c = *cfg_.cqf;
            const auto sched = cqf_compose(CqfConfig{c.cycle_time_ns, c.ipv_even, c.ipv_odd,
                                                     static_cast<std::uint32_t>(c.bridges.size()), c.base_time});
            std::set<StreamKey> keys;
            for (const auto &t : cfg_.traffic)
                if (c.streams.empty() || std::count(c.streams.begin(), c.streams.end(), t.name))
                    keys.insert(t.key());
            for (const auto &[ref, _] : ports_) {
                if (ref.node != n.name)
                    continue;
                IngressFilter filter;
                std::vector<StreamRule> rules;
                std::uint32_t h = 0;
                for (const auto &k : keys) {
                    rules.push_back({StreamPattern{k.dest_mac, k.vlan_id, k.pcp}, StreamHandle{h}});
                    filter.gates.emplace(StreamHandle{h}, sched.ingress);
                    ++h;
                }
                filter.rules = make_stream_rules(std::move(rules));
                bridge->set_ingress_filter(ref.port, std::move(filter));
            }
        }

        for (const auto &r : cfg_.frer.replicate)
            if (r.node == n.name)
                bridge->add_replication(cfg_.stream(r.stream)->key(), ReplicationRule{r.ports});
        for (const auto &e : cfg_.frer.eliminate)
            if (e.node == n.name)
                bridge->add_elimination(cfg_.stream(e.stream)->key(), e.window);

        bridges_[n.name] = std::move(bridge);
    }

    for (const auto &e : cfg_.frer.eliminate)
        if (cfg_.node(e.node)->kind == NodeKind::end_station)
            listener_recovery_.insert_or_assign({e.node, cfg_.stream(e.stream)->key()}, RecoveryState(e.window));
}

void Simulation::build_talkers()
{
    for (const auto &[ref, s] : cfg_.shapers) {
        if (!s.etf || s.etf->offload)
            continue;
        const std::string node = ref.node;
        qdiscs_[ref] = std::make_unique<EtfScheduler>(
            engine_, EtfConfig{false, s.etf->delta(), JitterDist::constant(0)}, sys_.at(node),
            fork("qdisc/" + ref.str()), [this](Frame f) {
                Talker &t = *talkers_.at(f.origin.talker);
                to_driver(t, std::move(f));
            });
    }

    for (std::uint32_t i = 0; i < cfg_.traffic.size(); ++i) {
        const auto &spec = cfg_.traffic[i];
        auto t = std::make_unique<Talker>();
        t->spec = &spec;
        t->index = i;
        t->count = cfg_.count_for(spec);
        t->wake_rng = fork("talker/" + spec.name + "/wake");
        t->stack_rng = fork("talker/" + spec.name + "/stack");
        t->driver_rng = fork("talker/" + spec.name + "/driver");
        t->rx_rng = fork("listener/" + spec.name + "/rx");
        t->sys = &sys_.at(spec.talker.node);
        t->port = ports_.at(spec.talker).get();
        if (spec.mode == TalkerMode::txtime) {
            const auto &etf = *cfg_.shapers.at(spec.talker).etf;
            t->offload = etf.offload;
            if (!etf.offload)
                t->qdisc = qdiscs_.at(spec.talker).get();
        }
        StreamResult sr;
        sr.name = spec.name;
        sr.period_ns = spec.period_ns;
        sr.records.resize(t->count);
        sr.timelines.resize(t->count);
        result_.streams[spec.name] = std::move(sr);
        talkers_.push_back(std::move(t));
    }
}

void Simulation::at_reading(const NodeClock &clock, SimTime reading, std::function<void()> fn)
{
    const SimTime t = std::max(clock.true_time_for(reading), engine_.now());
    engine_.schedule(t, [this, &clock, reading, fn = std::move(fn)]() mutable {
        // A sync may have moved the clock since the event was planned.
        if (clock.read(engine_.now()) < reading)
            at_reading(clock, reading, std::move(fn));
        else
            fn();
    });
}

void Simulation::plan_packet(Talker &t, std::uint64_t k)
{
    if (k >= t.count)
        return;
    const auto &s = *t.spec;
    const SimTime intended = cfg_.run.start_ns + static_cast<SimTime>(s.phase_ns + static_cast<Duration>(k) * s.period_ns);
    const SimTime wake_reading =
        s.mode == TalkerMode::txtime ? intended - std::min<SimTime>(intended, s.advance_ns) : intended;
    at_reading(*t.sys, wake_reading, [this, &t, k] {
        const Duration jitter = t.spec->wake_jitter.sample(t.wake_rng);
        engine_.schedule_in(jitter, [this, &t, k] { on_wake(t, k); });
    });
}

void Simulation::on_wake(Talker &t, std::uint64_t k)
{
    const auto &s = *t.spec;
    plan_packet(t, k + 1);

    Frame f;
    f.id = next_frame_id_++;
    f.size_bytes = s.frame_size_bytes;
    f.priority = s.frame_priority();
    f.traffic_class = f.priority;
    f.stream = s.key();
    f.origin = FrameOrigin{t.index, k};
    f.trace.intended_tx = cfg_.run.start_ns + static_cast<SimTime>(s.phase_ns + static_cast<Duration>(k) * s.period_ns);
    if (s.mode == TalkerMode::txtime)
        f.txtime = f.trace.intended_tx;
    f.timeline.wake = engine_.now();

    auto &sr = result_.streams.at(s.name);
    sr.records[k].seq = k;
    sr.records[k].intended_tx = f.trace.intended_tx;
    sr.timelines[k].wake = f.timeline.wake;
    ++sr.generated;

    const Duration stack = s.stack_latency.sample(t.stack_rng);
    engine_.schedule_in(stack, [this, &t, f = std::move(f)]() mutable {
        if (t.qdisc) {
            if (t.qdisc->enqueue(std::move(f)) == EtfEnqueueResult::DroppedPastTxtime)
                drop(t.spec->talker.str() + " qdisc", "etf_past_txtime");
            return;
        }
        to_driver(t, std::move(f));
    });
}

void Simulation::to_driver(Talker &t, Frame f)
{
    const SimTime now = engine_.now();
    f.trace.sw_tx = t.sys->read(now);
    f.timeline.sw_tx = now;
    auto &sr = result_.streams.at(t.spec->name);
    sr.records[f.origin.index].sw_tx = f.trace.sw_tx;
    sr.timelines[f.origin.index].sw_tx = now;

    const Duration driver = t.spec->driver_latency.sample(t.driver_rng);
    engine_.schedule_in(driver, [this, &t, f = std::move(f)]() mutable {
        const std::string where = t.spec->talker.str();
        if (t.offload) {
            if (t.port->enqueue_launch(std::move(f)) == EtfEnqueueResult::DroppedPastTxtime)
                drop(where, "etf_past_txtime");
            return;
        }
        f.txtime.reset();
        if (t.port->enqueue(std::move(f)) == EnqueueResult::DroppedFull)
            drop(where, "queue_full");
    });
}

void Simulation::on_wire_done(const PortRef &from, Frame f, SimTime first, SimTime last)
{
    if (f.origin.talker < talkers_.size() && from == talkers_[f.origin.talker]->spec->talker) {
        auto &sr = result_.streams.at(talkers_[f.origin.talker]->spec->name);
        sr.records[f.origin.index].hw_tx = f.trace.hw_tx;
        sr.timelines[f.origin.index].hw_tx = f.timeline.hw_tx;
    }
    const LinkSpec &link = *link_of_.at(from);
    if (link.params.loss > 0.0 && loss_rng_.at(from).bernoulli(link.params.loss)) {
        drop(link.name, "link_loss");
        return;
    }
    f.ipv.reset();
    f.txtime.reset();
    const PortRef to = peer_.at(from);
    const SimTime sof = first + static_cast<SimTime>(link.params.propagation_ns);
    const SimTime eof = last + static_cast<SimTime>(link.params.propagation_ns);
    engine_.schedule(eof, [this, to, sof, f = std::move(f)]() mutable { on_arrival(to, std::move(f), sof); });
}

void Simulation::on_arrival(const PortRef &at, Frame f, SimTime sof)
{
    if (auto it = bridges_.find(at.node); it != bridges_.end()) {
        it->second->forward(std::move(f), at.port);
        return;
    }
    on_listener(at.node, std::move(f), sof);
}

void Simulation::on_listener(const std::string &node, Frame f, SimTime sof)
{
    if (f.origin.talker >= talkers_.size() || talkers_[f.origin.talker]->spec->listener != node) {
        drop(node, "not_addressed");
        return;
    }
    Talker &t = *talkers_[f.origin.talker];
    if (f.stream) {
        if (auto it = listener_recovery_.find({node, *f.stream}); it != listener_recovery_.end()) {
            const RecoverResult r = it->second.recover(f);
            if (r != RecoverResult::Accept) {
                drop(node, r == RecoverResult::DiscardDuplicate ? "frer_duplicate" : "frer_stale");
                return;
            }
        }
    }
    auto &sr = result_.streams.at(t.spec->name);
    const std::uint64_t k = f.origin.index;
    if (sr.records[k].hw_rx) {
        ++sr.duplicates;
        return;
    }
    const SimTime now = engine_.now();
    sr.records[k].hw_rx = phc_.at(node).read(sof);
    sr.timelines[k].hw_rx = sof;
    sr.timelines[k].eof_rx = now;
    ++sr.received;

    const SimTime sw_at = sof + static_cast<SimTime>(t.spec->rx_latency.sample(t.rx_rng));
    const NodeClock &sys = sys_.at(node);
    auto stamp = [this, &sr, &sys, k, sw_at] {
        sr.records[k].sw_rx = sys.read(sw_at);
        sr.timelines[k].sw_rx = sw_at;
    };
    if (sw_at <= now)
        stamp();
    else
        engine_.schedule(sw_at, stamp);
}

RunResult Simulation::run()
{
    build_clocks();
    build_ports();
    build_bridges();
    build_talkers();

    SimTime last_intended = cfg_.run.start_ns;
    for (const auto &t : talkers_) {
        const auto &s = *t->spec;
        const SimTime end =
            cfg_.run.start_ns + static_cast<SimTime>(s.phase_ns + static_cast<Duration>(t->count) * s.period_ns);
        last_intended = std::max(last_intended, end);
    }
    const SimTime t_end = last_intended + static_cast<SimTime>(cfg_.run.drain_ns);
    for (auto &[_, c] : phc_)
        schedule_syncs(c, t_end);
    for (auto &[_, c] : sys_)
        schedule_syncs(c, t_end);
    for (auto &t : talkers_)
        plan_packet(*t, 0);

    const std::uint64_t events = engine_.run_until(t_end);

    const TrafficSpec &measured = cfg_.measured();
    auto &md = result_.metadata;
    md.seed = seed_;
    md.rng_algorithm = std::string(Rng::kAlgorithm);
    md.measured_stream = measured.name;
    bool offload_txtime = false;
    if (measured.mode == TalkerMode::txtime)
        offload_txtime = cfg_.shapers.at(measured.talker).etf->offload;
    md.histogram_bin_ns = cfg_.run.histogram_bin_ns.value_or(offload_txtime ? 1 : 100);
    if (cfg_.cqf) {
        md.cqf_hops = static_cast<std::uint32_t>(cfg_.cqf->bridges.size());
        md.cqf_bound_ns = cqf_latency_bound(*md.cqf_hops, cfg_.cqf->cycle_time_ns);
    }
    md.t_end = t_end;
    md.events = events;

    for (const auto &[ref, port] : ports_) {
        const PortCounters c = port->counters();
        const std::string p = ref.str() + ".";
        result_.counters[p + "frames_sent"] = c.frames_sent;
        if (c.preemptions)
            result_.counters[p + "preemptions"] = c.preemptions;
        if (c.etf_late_launch)
            result_.counters[p + "etf_late_launch"] = c.etf_late_launch;
        if (c.dropped_oversize) {
            result_.drops["taprio_oversize"] += c.dropped_oversize;
            result_.drop_sites[ref.str() + " taprio_oversize"] += c.dropped_oversize;
        }
        if (port->config().record_tx)
            result_.tx_logs[ref.str()] = port->tx_log();
    }
    for (const auto &[name, b] : bridges_) {
        const BridgeCounters &c = b->counters();
        result_.counters[name + ".received"] = c.received;
        result_.counters[name + ".forwarded"] = c.forwarded;
        result_.counters[name + ".psfp_dropped"] = c.psfp_dropped;
        result_.counters[name + ".frer_replicated"] = c.frer_replicated;
        result_.counters[name + ".frer_eliminated"] = c.frer_eliminated;
    }
    return std::move(result_);
}

} // namespace

RunResult run_scenario(const ScenarioConfig &cfg, std::optional<std::uint64_t> seed_override)
{
    Simulation sim(cfg, seed_override.value_or(cfg.run.seed));
    return sim.run();
}

} // namespace tsnsim
