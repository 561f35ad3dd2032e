#include "oracles.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <random>
#include <set>
#include <stdexcept>

#include "tsnsim/bridge.hpp"
#include "tsnsim/clock.hpp"
#include "tsnsim/egress_port.hpp"
#include "tsnsim/engine.hpp"
#include "tsnsim/frer.hpp"
#include "tsnsim/scenario.hpp"

namespace oracle {

using namespace tsnsim;

Duration NaiveGate::cycle() const
{
    Duration c = 0;
    for (const auto &e : entries)
        c += e.second;
    return c;
}

std::pair<std::uint64_t, std::size_t> NaiveGate::window_at(SimTime t) const
{
    // Walk whole cycles, then entries.
    const auto c = static_cast<SimTime>(cycle());
    std::uint64_t k = (t - base) / c;
    SimTime at = base + k * c;
    for (std::size_t i = 0;; i = (i + 1) % entries.size()) {
        const SimTime end = at + static_cast<SimTime>(entries[i].second);
        if (t < end)
            return {k, i};
        at = end;
        if (i + 1 == entries.size())
            ++k;
    }
}

std::uint8_t NaiveGate::mask_at(SimTime t) const
{
    if (t < base)
        return 0;
    return entries[window_at(t).second].first;
}

Duration wire_ns(std::uint64_t bytes, std::uint64_t rate_bps)
{
    // Whole nanoseconds per byte only; the test rates are chosen that way.
    if (8'000'000'000ULL % rate_bps != 0)
        throw std::invalid_argument("rate does not give whole ns per byte");
    return static_cast<Duration>(bytes * (8'000'000'000ULL / rate_bps));
}

namespace {

/// Mask per nanosecond over [from, to), walking the schedule incrementally.
std::vector<std::uint8_t> masks_between(const NaiveGate &g, SimTime from, SimTime to)
{
    std::vector<std::uint8_t> out(to - from, 0);
    SimTime t = from;
    while (t < to && t < g.base)
        out[t++ - from] = 0;
    if (t >= to)
        return out;
    auto [k, i] = g.window_at(t);
    const auto c = static_cast<SimTime>(g.cycle());
    SimTime entry_start = g.base + k * c;
    for (std::size_t j = 0; j < i; ++j)
        entry_start += static_cast<SimTime>(g.entries[j].second);
    SimTime entry_end = entry_start + static_cast<SimTime>(g.entries[i].second);
    for (; t < to; ++t) {
        while (t >= entry_end) {
            i = (i + 1) % g.entries.size();
            entry_end += static_cast<SimTime>(g.entries[i].second);
        }
        out[t - from] = g.entries[i].first;
    }
    return out;
}

} // namespace

std::vector<Tx> stepped_taprio(const NaiveGate &gate, std::vector<Arrival> arrivals, std::uint64_t rate_bps,
                               SimTime horizon)
{
    std::sort(arrivals.begin(), arrivals.end(), [](const Arrival &a, const Arrival &b) { return a.t < b.t; });
    const SimTime lookahead = 20'000;
    const SimTime end = horizon + lookahead;
    const auto masks = masks_between(gate, 0, end);

    // run[c][t]: nanoseconds the gate of c stays open from t onwards.
    std::vector<std::vector<std::uint32_t>> run(8, std::vector<std::uint32_t>(end + 1, 0));
    for (unsigned c = 0; c < 8; ++c)
        for (SimTime t = end; t-- > 0;)
            run[c][t] = ((masks[t] >> c) & 1u) ? run[c][t + 1] + 1 : 0;

    std::vector<Tx> out;
    std::deque<Arrival> q[8];
    std::size_t next = 0;
    SimTime busy_until = 0;
    std::size_t waiting = 0;
    for (SimTime t = 0; t < horizon; ++t) {
        while (next < arrivals.size() && arrivals[next].t == t) {
            q[arrivals[next].tclass].push_back(arrivals[next]);
            ++next;
            ++waiting;
        }
        if (t < busy_until)
            continue;
        if (waiting == 0) {
            if (next == arrivals.size())
                break;
            continue;
        }
        for (int c = 7; c >= 0; --c) {
            if (q[c].empty())
                continue;
            const Duration tt = wire_ns(q[c].front().size, rate_bps);
            if (static_cast<Duration>(run[static_cast<unsigned>(c)][t]) >= tt) {
                out.push_back({q[c].front().id, t, t + static_cast<SimTime>(tt)});
                busy_until = t + static_cast<SimTime>(tt);
                q[c].pop_front();
                --waiting;
                break;
            }
        }
    }
    return out;
}

std::uint64_t closed_ns(const NaiveGate &gate, unsigned tclass, SimTime start, SimTime end)
{
    const auto masks = masks_between(gate, start, end);
    std::uint64_t n = 0;
    for (const auto m : masks)
        if (!((m >> tclass) & 1u))
            ++n;
    return n;
}

namespace {

/// Longest contiguous open stretch of tclass, or -1 if always open.
Duration naive_longest(const NaiveGate &g, unsigned tclass)
{
    bool any_closed = false;
    for (const auto &e : g.entries)
        any_closed |= !((e.first >> tclass) & 1u);
    if (!any_closed)
        return -1;
    Duration best = 0, cur = 0;
    for (int pass = 0; pass < 2; ++pass)
        for (const auto &e : g.entries) {
            if ((e.first >> tclass) & 1u) {
                cur += e.second;
                best = std::max(best, cur);
            } else {
                cur = 0;
            }
        }
    return best;
}

} // namespace

GateFuzzCase random_gate_case(std::uint64_t seed, Duration max_cycle, std::size_t frames)
{
    std::mt19937_64 rng(seed);
    auto uni = [&](std::int64_t lo, std::int64_t hi) { return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng); };
    GateFuzzCase c;
    const std::uint64_t bytes_per_ns_inv = 8'000'000'000ULL / c.rate_bps;
    while (true) {
        c.gate = NaiveGate{};
        c.gate.base = static_cast<SimTime>(uni(0, 3'000));
        const auto n = static_cast<std::size_t>(uni(2, 8));
        for (std::size_t i = 0; i < n; ++i)
            c.gate.entries.emplace_back(static_cast<std::uint8_t>(uni(0, 255)), uni(100, max_cycle / static_cast<Duration>(n)));
        std::vector<std::pair<unsigned, std::uint32_t>> usable; // class, max bytes
        for (unsigned k = 0; k < 8; ++k) {
            const Duration w = naive_longest(c.gate, k);
            const std::uint64_t max_bytes = w < 0 ? 1000 : std::min<std::uint64_t>(1000, static_cast<std::uint64_t>(w) / bytes_per_ns_inv);
            if (max_bytes >= 64)
                usable.emplace_back(k, static_cast<std::uint32_t>(max_bytes));
        }
        if (usable.empty())
            continue;
        std::set<SimTime> times;
        while (times.size() < frames)
            times.insert(static_cast<SimTime>(uni(0, 40'000)));
        std::uint64_t id = 1;
        for (const SimTime t : times) {
            const auto &[k, max_bytes] = usable[static_cast<std::size_t>(uni(0, static_cast<std::int64_t>(usable.size()) - 1))];
            c.arrivals.push_back({t, k, static_cast<std::uint32_t>(uni(64, max_bytes)), id++});
        }
        return c;
    }
}

GateFuzzOutcome run_gate_case(const GateFuzzCase &c, bool with_reference)
{
    EventEngine eng;
    NodeClock clock;
    std::vector<GclEntry> entries;
    for (const auto &[m, d] : c.gate.entries)
        entries.push_back({m, d});
    EgressPortConfig cfg;
    cfg.name = "fuzz";
    cfg.link.rate_bps = c.rate_bps;
    cfg.gcl.emplace(c.gate.base, entries);
    cfg.guard = GuardMode::fit;
    cfg.queue_capacity = 100'000;
    cfg.record_tx = true;
    EgressPort port(eng, cfg, clock, Rng(1), [](Frame, SimTime, SimTime) {});
    for (const auto &a : c.arrivals) {
        Frame f;
        f.id = a.id;
        f.size_bytes = a.size;
        f.priority = static_cast<std::uint8_t>(a.tclass);
        eng.schedule(a.t, [&port, f] { port.enqueue(f); });
    }
    eng.run();

    GateFuzzOutcome out;
    std::map<std::uint64_t, unsigned> cls;
    for (const auto &a : c.arrivals)
        cls[a.id] = a.tclass;
    for (const auto &r : port.tx_log()) {
        const Tx tx{r.frame_id, r.segments.front().start, r.segments.back().end};
        out.simulated.push_back(tx);
        out.closed_overlap_ns += closed_ns(c.gate, cls.at(r.frame_id), tx.start, tx.end);
    }
    out.transmitted = out.simulated.size();
    if (with_reference) {
        SimTime horizon = 0;
        for (const auto &t : out.simulated)
            horizon = std::max(horizon, t.end);
        horizon += static_cast<SimTime>(2 * c.gate.cycle()) + 40'000;
        out.reference = stepped_taprio(c.gate, c.arrivals, c.rate_bps, horizon);
    }
    return out;
}

BytePlan byte_step_preempt(std::uint64_t pframe_bytes, SimTime pstart, std::uint64_t express_bytes, SimTime arrival,
                           std::uint64_t rate_bps, std::uint32_t min_fragment)
{
    const auto bt = static_cast<SimTime>(wire_ns(1, rate_bps));
    std::uint64_t sent = 0;
    while (sent < pframe_bytes && pstart + (sent + 1) * bt <= arrival)
        ++sent;
    BytePlan p;
    std::uint64_t cut = sent + 1;
    while (cut <= pframe_bytes && cut % min_fragment != 0)
        ++cut;
    if (cut <= pframe_bytes && pframe_bytes - cut >= min_fragment) {
        p.preempts = true;
        p.point = cut;
        p.express_start = pstart + cut * bt;
        p.express_end = p.express_start + express_bytes * bt;
        p.pframe_end = p.express_end + (pframe_bytes - cut) * bt;
    } else {
        p.point = pframe_bytes;
        p.express_start = pstart + pframe_bytes * bt;
        p.express_end = p.express_start + express_bytes * bt;
        p.pframe_end = p.express_start;
    }
    return p;
}

PreemptFuzzOutcome preemption_fuzz(std::uint64_t seed, std::size_t cases, std::uint64_t rate_bps)
{
    std::mt19937_64 rng(seed);
    auto uni = [&](std::int64_t lo, std::int64_t hi) { return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng); };
    const auto bt = static_cast<SimTime>(wire_ns(1, rate_bps));
    PreemptFuzzOutcome out;
    for (std::size_t i = 0; i < cases; ++i) {
        const auto pbytes = static_cast<std::uint32_t>(uni(64, 1500));
        const auto ebytes = static_cast<std::uint32_t>(uni(64, 256));
        const auto arrival = static_cast<SimTime>(uni(1, static_cast<std::int64_t>(pbytes * bt) - 1));

        EventEngine eng;
        NodeClock clock;
        EgressPortConfig cfg;
        cfg.link.rate_bps = rate_bps;
        cfg.preemption = PreemptionConfig{true, 0x80, 64};
        cfg.record_tx = true;
        EgressPort port(eng, cfg, clock, Rng(1), [](Frame, SimTime, SimTime) {});
        Frame p;
        p.id = 1;
        p.size_bytes = pbytes;
        p.priority = 0;
        Frame e;
        e.id = 2;
        e.size_bytes = ebytes;
        e.priority = 7;
        eng.schedule(0, [&] { port.enqueue(p); });
        eng.schedule(arrival, [&] { port.enqueue(e); });
        eng.run();

        const BytePlan ref = byte_step_preempt(pbytes, 0, ebytes, arrival, rate_bps, 64);
        const TxRecord *pr = nullptr;
        const TxRecord *er = nullptr;
        for (const auto &r : port.tx_log())
            (r.frame_id == 1 ? pr : er) = &r;
        ++out.cases;
        if (!pr || !er) {
            ++out.plan_mismatches;
            continue;
        }
        if (er->segments.front().start != ref.express_start || er->segments.back().end != ref.express_end ||
            (ref.preempts && pr->segments.back().end != ref.pframe_end) ||
            (ref.preempts != (pr->segments.size() == 2)))
            ++out.plan_mismatches;

        SimTime on_wire = 0;
        for (const auto &s : pr->segments)
            on_wire += s.end - s.start;
        if (on_wire % bt != 0 || on_wire / bt != pbytes)
            ++out.conservation_failures;

        const std::uint64_t sent = arrival / bt;
        const auto delay = static_cast<Duration>(er->segments.front().start - arrival);
        if (pbytes - sent >= 128) {
            ++out.bound_checked;
            out.worst_access_delay = std::max(out.worst_access_delay, delay);
            if (delay > wire_ns(127, rate_bps))
                ++out.bound_violations;
        }
    }
    return out;
}

PsfpFuzzOutcome psfp_fuzz(std::uint64_t seed, std::size_t schedules, std::size_t frames_per_schedule)
{
    std::mt19937_64 rng(seed);
    auto uni = [&](std::int64_t lo, std::int64_t hi) { return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng); };
    PsfpFuzzOutcome out;
    const MacAddress dest = MacAddress::parse("02:00:00:00:00:02");
    for (std::size_t s = 0; s < schedules; ++s) {
        NaiveGate naive;
        naive.base = static_cast<SimTime>(uni(0, 5'000));
        std::vector<StreamGateEntry> entries;
        const auto n = static_cast<std::size_t>(uni(2, 6));
        for (std::size_t i = 0; i < n; ++i) {
            StreamGateEntry e;
            e.open = uni(0, 9) < 6;
            e.duration_ns = uni(1'000, 20'000);
            if (uni(0, 9) < 7)
                e.max_octets = static_cast<std::uint64_t>(uni(64, 4'000));
            if (uni(0, 1))
                e.ipv = static_cast<std::uint8_t>(uni(0, 7));
            entries.push_back(e);
            naive.entries.emplace_back(e.open ? 1 : 0, e.duration_ns);
        }

        EventEngine eng;
        NodeClock clock;
        EgressPortConfig pc;
        pc.name = "p2";
        pc.queue_capacity = 1'000'000;
        std::vector<Frame> forwarded;
        EgressPort port(eng, pc, clock, Rng(1), [&](Frame f, SimTime, SimTime) { forwarded.push_back(std::move(f)); });
        BridgeNode bridge(eng, "sw", clock, JitterDist::constant(0), Rng(2),
                          [](const std::string &, const std::string &, const Frame &) {});
        bridge.add_port("p2", &port);
        bridge.add_route(dest, "p2");
        IngressFilter filter;
        filter.rules = make_stream_rules({{StreamPattern{dest, 0, 0}, StreamHandle{0}}});
        filter.gates.emplace(StreamHandle{0}, StreamGate(naive.base, entries));
        bridge.set_ingress_filter("p1", std::move(filter));

        std::map<std::uint64_t, std::pair<SimTime, Frame>> sent;
        const auto span = static_cast<std::int64_t>(naive.base + 5 * static_cast<SimTime>(naive.cycle()));
        std::set<SimTime> times;
        while (times.size() < frames_per_schedule)
            times.insert(static_cast<SimTime>(uni(0, span)));
        std::uint64_t id = 1;
        for (const SimTime t : times) {
            Frame f;
            f.id = id++;
            f.size_bytes = static_cast<std::uint32_t>(uni(64, 1500));
            f.stream = StreamKey{dest, 0, 0};
            sent.emplace(f.id, std::make_pair(t, f));
            eng.schedule(t, [&bridge, f] { bridge.forward(f, "p1"); });
        }
        eng.run();

        out.frames += sent.size();
        out.passed += forwarded.size();
        std::map<std::pair<std::uint64_t, std::size_t>, std::uint64_t> octets;
        for (const auto &f : forwarded) {
            const auto &[t, original] = sent.at(f.id);
            if (t < naive.base || !naive.open(t, 0)) {
                ++out.closed_forwarded;
                continue;
            }
            octets[naive.window_at(t)] += f.size_bytes;
            if (!wire_equal(f, original))
                ++out.modified;
        }
        out.windows += octets.size();
        for (const auto &[w, sum] : octets) {
            const auto &e = entries[w.second];
            if (e.max_octets && sum > *e.max_octets)
                ++out.windows_over_budget;
        }
    }
    return out;
}

FrerFuzzOutcome frer_fuzz(std::uint64_t seed, std::size_t frames, double loss, std::size_t max_reorder,
                          std::uint16_t first_seq, std::size_t window)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> disp(0, max_reorder);

    struct Copy
    {
        std::size_t at;
        int path;
        std::size_t index;
    };
    std::vector<Copy> copies;
    std::vector<bool> survivor(frames, false);
    for (std::size_t i = 0; i < frames; ++i)
        for (int path = 0; path < 2; ++path)
            if (u01(rng) >= loss) {
                survivor[i] = true;
                copies.push_back({i + disp(rng), path, i});
            }
    std::stable_sort(copies.begin(), copies.end(), [](const Copy &a, const Copy &b) { return a.at < b.at; });

    RecoveryState state(window);
    std::vector<int> delivered(frames, 0);
    for (const auto &c : copies) {
        Frame f;
        f.seq = static_cast<std::uint16_t>(first_seq + c.index);
        if (state.recover(f) == RecoverResult::Accept)
            ++delivered[c.index];
    }

    FrerFuzzOutcome out;
    out.frames = frames;
    for (std::size_t i = 0; i < frames; ++i) {
        out.with_survivor += survivor[i];
        out.delivered += delivered[i] > 0;
        out.delivered_twice += delivered[i] > 1;
        out.survivor_not_delivered += survivor[i] && delivered[i] == 0;
        out.delivered_without_survivor += !survivor[i] && delivered[i] > 0;
    }
    return out;
}

nlohmann::json chain_scenario(std::uint32_t bridges, const std::string &preset)
{
    nlohmann::json nodes = nlohmann::json::array();
    nlohmann::json links = nlohmann::json::array();
    nodes.push_back({{"name", "talker"}, {"mac", "02:00:00:00:00:01"}});
    std::string prev = "talker.eth0";
    for (std::uint32_t i = 1; i <= bridges; ++i) {
        const std::string name = "sw" + std::to_string(i);
        nodes.push_back({{"name", name}, {"kind", "bridge"}, {"forwarding", {{"preset", preset}}}});
        links.push_back({{"a", prev}, {"b", name + ".p1"}});
        prev = name + ".p2";
    }
    nodes.push_back({{"name", "listener"}, {"mac", "02:00:00:00:00:02"}});
    links.push_back({{"a", prev}, {"b", "listener.eth0"}});
    return {
        {"nodes", nodes},
        {"links", links},
        {"traffic",
         {{{"name", "isochron"}, {"talker", "talker.eth0"}, {"listener", "listener"}, {"frame_size_bytes", 128}}}},
        {"run", {{"count", 100}, {"seed", 1}}},
    };
}

CqfSweepOutcome cqf_phase_sweep(std::uint32_t hops, Duration cycle, Duration grid)
{
    nlohmann::json doc = chain_scenario(hops);
    nlohmann::json names = nlohmann::json::array();
    for (std::uint32_t i = 1; i <= hops; ++i)
        names.push_back("sw" + std::to_string(i));
    doc["cqf"] = {{"cycle_time_ns", cycle}, {"ipv_even", 2}, {"ipv_odd", 3}, {"bridges", names}};
    const auto phases = static_cast<std::uint64_t>(cycle / grid);
    // Period one grid step longer than the cycle: successive frames walk
    // through every phase of the cycle, one frame per cycle.
    doc["traffic"][0]["period_ns"] = cycle + grid;
    doc["run"]["count"] = phases;
    doc["run"]["drain_ns"] = (hops + 3) * cycle;
    const ScenarioConfig cfg = parse_scenario(doc);
    const RunResult r = run_scenario(cfg);

    CqfSweepOutcome out;
    out.phases = phases;
    out.min_delay = std::numeric_limits<Duration>::max();
    for (const auto &tl : r.measured().timelines) {
        if (!tl.hw_rx || !tl.hw_tx)
            continue;
        ++out.delivered;
        const auto d = static_cast<Duration>(*tl.hw_rx - *tl.hw_tx);
        out.max_delay = std::max(out.max_delay, d);
        out.min_delay = std::min(out.min_delay, d);
    }
    return out;
}

} // namespace oracle
