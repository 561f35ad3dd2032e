#include "doctest.h"

#include <stdexcept>

#include "oracles.hpp"
#include "tsnsim/errors.hpp"
#include "tsnsim/psfp.hpp"

using namespace tsnsim;

namespace {

Frame sized(std::uint64_t id, std::uint32_t size)
{
    Frame f;
    f.id = id;
    f.size_bytes = size;
    return f;
}

using Outcome = PsfpDecision::Outcome;

} // namespace

TEST_CASE("always-open gate passes without ipv")
{
    StreamGate g(0, {{true, 1'000'000, std::nullopt, std::nullopt}});
    Frame f = sized(1, 1500);
    const auto d = psfp_process(g, f, 123'456);
    CHECK(d.outcome == Outcome::Pass);
    CHECK_FALSE(d.ipv);
    CHECK_FALSE(f.ipv);
}

TEST_CASE("octet budget within one window")
{
    StreamGate g(0, {{true, 100'000, std::nullopt, 2'000}, {false, 100'000, std::nullopt, std::nullopt}});
    Frame a = sized(1, 1000), b = sized(2, 1000), c = sized(3, 1000);
    CHECK(psfp_process(g, a, 10).outcome == Outcome::Pass);
    CHECK(psfp_process(g, b, 20).outcome == Outcome::Pass);
    CHECK(psfp_process(g, c, 30).outcome == Outcome::DropOctetBudget);
    CHECK(g.running_octets() == 2'000);

    Frame d = sized(4, 1000);
    CHECK(psfp_process(g, d, 200'010).outcome == Outcome::Pass);
}

TEST_CASE("budget drop does not consume the remainder")
{
    StreamGate g(0, {{true, 100'000, std::nullopt, 1'600}});
    Frame big = sized(1, 1500), small = sized(2, 100), over = sized(3, 200);
    CHECK(psfp_process(g, over, 1).passed());
    CHECK_FALSE(psfp_process(g, big, 2).passed());
    CHECK(psfp_process(g, big, 3).outcome == Outcome::DropOctetBudget);
    CHECK(psfp_process(g, small, 4).passed());
}

TEST_CASE("closed window and instants before base drop")
{
    StreamGate g(1'000, {{true, 100, std::nullopt, std::nullopt}, {false, 100, std::nullopt, std::nullopt}});
    Frame f = sized(1, 64);
    CHECK(psfp_process(g, f, 1'150).outcome == Outcome::DropClosedGate);
    CHECK(psfp_process(g, f, 500).outcome == Outcome::DropClosedGate);
    CHECK(psfp_process(g, f, 1'100 - 1).passed());
    CHECK(psfp_process(g, f, 1'100).outcome == Outcome::DropClosedGate);
    CHECK(psfp_process(g, f, 1'200).passed());
}

TEST_CASE("ipv from the window")
{
    StreamGate g(0, {{true, 100, 5, std::nullopt}, {true, 100, std::nullopt, std::nullopt}});
    Frame f = sized(1, 64);
    const Frame before = f;
    const auto d = psfp_process(g, f, 50);
    CHECK(d.ipv == 5);
    CHECK(f.ipv == 5);
    CHECK(egress_class(f) == 5);
    CHECK(wire_equal(f, before));
}

TEST_CASE("assign_ipv")
{
    Frame f = sized(1, 64);
    f.priority = 0;
    CHECK(egress_class(assign_ipv(f, 3)) == 3);
    CHECK(egress_class(f) == 0);
    CHECK(assign_ipv(assign_ipv(f, 3), 6).ipv == 6);
    CHECK(wire_equal(assign_ipv(f, 3), f));
    CHECK_THROWS_AS(assign_ipv(f, 8), std::out_of_range);
}

TEST_CASE("ingress filter identification")
{
    const auto mac = MacAddress::parse("02:00:00:00:00:09");
    IngressFilter filter;
    filter.rules = make_stream_rules({{StreamPattern{mac, std::nullopt, std::nullopt}, StreamHandle{1}}});
    filter.gates.emplace(StreamHandle{1}, StreamGate(0, {{true, 100, 2, std::nullopt}}));

    Frame known = sized(1, 64);
    known.stream = StreamKey{mac, 0, 0};
    Frame other = sized(2, 64);
    other.stream = StreamKey{MacAddress{1}, 0, 0};

    CHECK(filter.apply(known, 10).ipv == 2);
    CHECK(filter.apply(other, 10).outcome == Outcome::Pass);
    filter.drop_unmatched = true;
    CHECK(filter.apply(other, 10).outcome == Outcome::DropNoStream);
    CHECK(std::string(to_string(Outcome::DropNoStream)) == "psfp_no_stream");
}

TEST_CASE("randomised traffic respects budgets and closed windows")
{
    const auto out = oracle::psfp_fuzz(5, 40, 300);
    CHECK(out.frames == 40 * 300);
    CHECK(out.passed > 0);
    CHECK(out.passed < out.frames);
    CHECK(out.windows > 0);
    CHECK(out.windows_over_budget == 0);
    CHECK(out.closed_forwarded == 0);
    CHECK(out.modified == 0);
}
