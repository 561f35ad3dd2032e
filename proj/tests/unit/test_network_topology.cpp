#include "doctest.h"

#include <map>
#include <set>
#include <vector>

#include "oracles.hpp"
#include "tsnsim/bridge.hpp"
#include "tsnsim/cqf.hpp"
#include "tsnsim/errors.hpp"
#include "tsnsim/scenario.hpp"
#include "tsnsim/simulation.hpp"

using namespace tsnsim;

namespace {

const MacAddress kDest = MacAddress::parse("02:00:00:00:00:02");

struct Rig
{
    EventEngine eng;
    NodeClock clock;
    std::vector<std::pair<std::uint64_t, SimTime>> out;
    std::vector<std::string> drops;
    EgressPort port;
    BridgeNode bridge;

    explicit Rig(JitterDist latency)
        : port(eng, EgressPortConfig{}, clock, Rng(1),
               [this](Frame f, SimTime first, SimTime) { out.emplace_back(f.id, first); }),
          bridge(eng, "sw", clock, std::move(latency), Rng(2),
                 [this](const std::string &, const std::string &reason, const Frame &) { drops.push_back(reason); })
    {
        bridge.add_port("p2", &port);
        bridge.add_route(kDest, "p2");
    }

    void inject(SimTime t)
    {
        Frame f;
        f.id = 1;
        f.stream = StreamKey{kDest, 0, 0};
        eng.schedule(t, [this, f] { bridge.forward(f, "p1"); });
    }
};

ScenarioConfig cqf_chain(std::uint32_t hops, Duration cycle, Duration period, Duration phase, std::uint64_t count)
{
    auto doc = oracle::chain_scenario(hops);
    nlohmann::json names = nlohmann::json::array();
    for (std::uint32_t i = 1; i <= hops; ++i)
        names.push_back("sw" + std::to_string(i));
    doc["cqf"] = {{"cycle_time_ns", cycle}, {"ipv_even", 2}, {"ipv_odd", 3}, {"bridges", names}};
    doc["traffic"][0]["period_ns"] = period;
    doc["traffic"][0]["phase_ns"] = phase;
    doc["run"]["count"] = count;
    return parse_scenario(doc);
}

} // namespace

TEST_CASE("zero latency forwarding reaches egress at once")
{
    Rig rig(JitterDist::constant(0));
    rig.inject(5'000);
    rig.eng.run();
    REQUIRE(rig.out.size() == 1);
    CHECK(rig.out[0].second == 5'000);
    CHECK(rig.bridge.counters().forwarded == 1);
}

TEST_CASE("constant forwarding latency")
{
    Rig rig(JitterDist::constant(2'000));
    rig.inject(5'000);
    rig.eng.run();
    REQUIRE(rig.out.size() == 1);
    CHECK(rig.out[0].second == 7'000);
}

TEST_CASE("closed ingress gate drops without an egress event")
{
    Rig rig(JitterDist::constant(0));
    IngressFilter filter;
    filter.rules = make_stream_rules({{StreamPattern{kDest, std::nullopt, std::nullopt}, StreamHandle{0}}});
    filter.gates.emplace(StreamHandle{0}, StreamGate(0, {{false, 1'000'000, std::nullopt, std::nullopt}}));
    rig.bridge.set_ingress_filter("p1", std::move(filter));
    Frame f;
    f.stream = StreamKey{kDest, 0, 0};
    std::optional<EventEngine::Handle> h = 1;
    rig.eng.schedule(10, [&] { h = rig.bridge.forward(f, "p1"); });
    rig.eng.run();
    CHECK_FALSE(h.has_value());
    CHECK(rig.out.empty());
    CHECK(rig.bridge.counters().psfp_dropped == 1);
    CHECK(rig.drops == std::vector<std::string>{"psfp_closed_gate"});
}

TEST_CASE("unknown destination")
{
    Rig rig(JitterDist::constant(0));
    Frame f;
    f.stream = StreamKey{MacAddress{77}, 0, 0};
    rig.eng.schedule(0, [&] { rig.bridge.forward(f, "p1"); });
    CHECK_THROWS_AS(rig.eng.run(), UnknownEgress);
}

TEST_CASE("preset ordering")
{
    auto median_of = [](ForwardingPreset p) {
        Rng rng(3);
        std::vector<Duration> v;
        for (int i = 0; i < 20'001; ++i)
            v.push_back(preset_distribution(p).sample(rng));
        std::nth_element(v.begin(), v.begin() + 10'000, v.end());
        return v[10'000];
    };
    const auto xdp = median_of(ForwardingPreset::xdp);
    const auto af = median_of(ForwardingPreset::af_xdp);
    const auto lb = median_of(ForwardingPreset::linux_bridge);
    CHECK(xdp <= af);
    CHECK(af <= lb);
    CHECK(parse_forwarding_preset("af_xdp") == ForwardingPreset::af_xdp);
    CHECK_FALSE(parse_forwarding_preset("dpdk"));
    CHECK(preset_distribution(ForwardingPreset::custom).is_zero());
}

TEST_CASE("presets with zero latency give identical timestamps")
{
    std::vector<std::vector<PacketRecord>> runs;
    for (const char *preset : {"linux_bridge", "xdp", "af_xdp"}) {
        auto doc = oracle::chain_scenario(2, preset);
        for (auto &n : doc["nodes"])
            if (n.contains("forwarding"))
                n["forwarding"]["latency"] = 0;
        doc["traffic"][0]["wake_jitter"] = {{"kind", "uniform"}, {"min", 0}, {"max", 5000}};
        runs.push_back(run_scenario(parse_scenario(doc)).measured().records);
    }
    CHECK(runs[0].size() == 100);
    CHECK(runs[0] == runs[1]);
    CHECK(runs[1] == runs[2]);
}

TEST_CASE("cqf composition")
{
    const auto s = cqf_compose(CqfConfig{500'000, 2, 3, 1, 0});
    const auto &eg = s.egress.entries();
    REQUIRE(eg.size() == 2);
    CHECK(eg[0].gate_mask == 0xFB);
    CHECK(eg[0].duration_ns == 500'000);
    CHECK(eg[1].gate_mask == 0xF7);
    CHECK(eg[1].duration_ns == 500'000);
    const auto &in = s.ingress.entries();
    REQUIRE(in.size() == 2);
    CHECK(in[0].open);
    CHECK(in[0].ipv == 2);
    CHECK(in[1].ipv == 3);

    CHECK_THROWS_AS(cqf_compose(CqfConfig{0, 2, 3, 1, 0}), InvalidSchedule);
    CHECK_THROWS_AS(cqf_compose(CqfConfig{500'000, 2, 2, 1, 0}), InvalidSchedule);
}

TEST_CASE("cqf latency bound")
{
    CHECK(cqf_latency_bound(1, 0) == 0);
    CHECK(cqf_latency_bound(1, 500'000) == 1'000'000);
    CHECK(cqf_latency_bound(3, 500'000) == 2'000'000);
    CHECK_THROWS_AS(cqf_latency_bound(0, 500'000), ZeroHops);
}

TEST_CASE("a frame collected in one cycle leaves in the next")
{
    const auto r = run_scenario(cqf_chain(1, 500'000, 1'000'000, 100'000, 1));
    const auto &tl = r.measured().timelines.at(0);
    REQUIRE(tl.hw_rx);
    CHECK(*tl.hw_tx == 1'000'100'000);
    CHECK(*tl.hw_rx == 1'000'500'000);
}

TEST_CASE("frames of one cycle drain together in order")
{
    const auto r = run_scenario(cqf_chain(1, 500'000, 100'000, 0, 2));
    const auto &tls = r.measured().timelines;
    REQUIRE(tls.size() == 2);
    CHECK(*tls[0].hw_rx == 1'000'500'000);
    CHECK(*tls[1].hw_rx == 1'000'500'000 + 1'024);
}

TEST_CASE("phase sweep stays within the bound")
{
    for (std::uint32_t hops : {1u, 3u}) {
        const auto out = oracle::cqf_phase_sweep(hops, 500'000);
        CHECK(out.delivered == out.phases);
        CHECK(out.max_delay <= cqf_latency_bound(hops, 500'000));
        CHECK(out.max_delay > static_cast<Duration>(hops) * 500'000);
    }
}

TEST_CASE("alternating streams never share an egress window")
{
    auto doc = read_json_file(TSNSIM_SCENARIO_DIR "/cqf.json");
    doc["shapers"]["sw1.p2"] = {{"record_tx", true}};
    doc["shapers"]["sw2.p2"] = {{"record_tx", true}};
    doc["run"]["count"] = 2'000;
    const auto r = run_scenario(parse_scenario(doc));
    CHECK(r.tx_logs.size() == 2);
    for (const auto &[port, log] : r.tx_logs) {
        std::map<std::uint64_t, std::set<std::uint32_t>> windows;
        for (const auto &rec : log)
            windows[rec.segments.front().start / 500'000].insert(rec.origin.talker);
        CHECK(windows.size() == 4'000);
        for (const auto &[w, talkers] : windows)
            REQUIRE(talkers.size() == 1);
    }
}
