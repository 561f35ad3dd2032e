#include "doctest.h"

#include <algorithm>
#include <random>
#include <vector>

#include "tsnsim/clock.hpp"
#include "tsnsim/engine.hpp"
#include "tsnsim/errors.hpp"
#include "tsnsim/jitter.hpp"
#include "tsnsim/rng.hpp"

using namespace tsnsim;

TEST_CASE("event at the current time runs on the next step")
{
    EventEngine eng;
    bool ran = false;
    eng.schedule(0, [&] { ran = true; });
    CHECK(eng.run_until(0) == 1);
    CHECK(ran);
}

TEST_CASE("equal fire times run in insertion order")
{
    EventEngine eng;
    std::string order;
    eng.schedule(100, [&] { order += 'A'; });
    eng.schedule(100, [&] { order += 'B'; });
    eng.run();
    CHECK(order == "AB");
}

TEST_CASE("scheduling into the past is rejected")
{
    EventEngine eng;
    eng.run_until(10);
    CHECK_THROWS_AS(eng.schedule(5, [] {}), PastTime);
}

TEST_CASE("run_until on an empty queue advances the clock")
{
    EventEngine eng;
    CHECK(eng.run_until(1'000'000'000) == 0);
    CHECK(eng.now() == 1'000'000'000);
}

TEST_CASE("run_until stops at the limit")
{
    EventEngine eng;
    for (SimTime t : {1, 2, 3})
        eng.schedule(t, [] {});
    CHECK(eng.run_until(2) == 2);
    CHECK(eng.pending() == 1);
}

TEST_CASE("events may schedule further events")
{
    EventEngine eng;
    std::vector<SimTime> seen;
    eng.schedule(1, [&] {
        seen.push_back(eng.now());
        eng.schedule(2, [&] { seen.push_back(eng.now()); });
    });
    CHECK(eng.run() == 2);
    CHECK(seen == std::vector<SimTime>{1, 2});
}

TEST_CASE("cancelled events do not run")
{
    EventEngine eng;
    bool ran = false;
    const auto h = eng.schedule(5, [&] { ran = true; });
    CHECK(eng.cancel(h));
    CHECK_FALSE(eng.cancel(h));
    CHECK(eng.run() == 0);
    CHECK_FALSE(ran);
}

TEST_CASE("executed fire times never decrease")
{
    std::mt19937_64 gen(7);
    EventEngine eng;
    std::vector<SimTime> fired;
    for (int i = 0; i < 5000; ++i) {
        const SimTime t = gen() % 100'000;
        eng.schedule(t, [&, i] {
            fired.push_back(eng.now());
            if (i % 3 == 0)
                eng.schedule_in(static_cast<Duration>(gen() % 1000), [&] { fired.push_back(eng.now()); });
        });
    }
    eng.run();
    CHECK(std::is_sorted(fired.begin(), fired.end()));
    CHECK(fired.size() == 5000 + 1667);
}

TEST_CASE("identity clock")
{
    CHECK(clock_read(ClockModel{}, 12345) == 12345);
    std::mt19937_64 gen(3);
    for (int i = 0; i < 100'000; ++i) {
        const SimTime t = gen() >> 2;
        REQUIRE(clock_read(ClockModel{}, t) == t);
    }
}

TEST_CASE("pure offset")
{
    ClockModel c;
    c.offset_ns = 50;
    CHECK(clock_read(c, 1'000'000) == 1'000'050);
}

TEST_CASE("100 ppm drift gains 100 us over one second")
{
    ClockModel c;
    c.drift = {100, 1};
    c.last_sync_true_time = 5'000;
    CHECK(clock_read(c, 5'000 + 1'000'000'000) - (5'000 + 1'000'000'000) == 100'000);
}

TEST_CASE("negative readings are rejected")
{
    ClockModel c;
    c.offset_ns = -100;
    CHECK_THROWS_AS(clock_read(c, 50), ClockUnderflow);
}

TEST_CASE("drift is linear between syncs")
{
    std::mt19937_64 gen(11);
    for (int i = 0; i < 10'000; ++i) {
        ClockModel c;
        c.drift = {static_cast<std::int64_t>(gen() % 2001) - 1000, static_cast<std::int64_t>(gen() % 100 + 1)};
        c.offset_ns = static_cast<Duration>(gen() % 10'000);
        c.last_sync_true_time = gen() % 1'000'000'000;
        const SimTime t1 = c.last_sync_true_time + gen() % 10'000'000'000ULL;
        const SimTime t2 = t1 + gen() % 10'000'000'000ULL;
        // (t2 - t1) * (1 + num / (den * 1e6)), kept exact in long double terms.
        const long double expected =
            static_cast<long double>(t2 - t1) *
            (1.0L + static_cast<long double>(c.drift.num) / (static_cast<long double>(c.drift.den) * 1e6L));
        const auto got = static_cast<long double>(clock_read(c, t2)) - static_cast<long double>(clock_read(c, t1));
        REQUIRE(got - expected <= 1.0L);
        REQUIRE(expected - got <= 1.0L);
    }
}

TEST_CASE("sync replaces the offset with the residual sample")
{
    Rng rng(1);
    ClockModel c;
    c.offset_ns = 900;
    c.drift = {5, 1};
    CHECK(apply_sync(c, 1'000, rng).offset_ns == 0);
    c.sync_residual = JitterDist::constant(30);
    const auto s = apply_sync(c, 1'000, rng);
    CHECK(s.offset_ns == 30);
    CHECK(s.last_sync_true_time == 1'000);
    CHECK(s.drift.num == 5);
}

TEST_CASE("125 ms sync bounds a 10 ppm clock to 1.25 us")
{
    ClockModel m;
    m.drift = {10, 1};
    m.sync_interval_ns = 125'000'000;
    NodeClock clk(m);
    Duration worst = 0;
    for (SimTime t = 0; t < 2'000'000'000; t += 100'000) {
        if (t % 125'000'000 == 0 && t > 0)
            clk.sync(t);
        const auto off = static_cast<Duration>(clk.read(t)) - static_cast<Duration>(t);
        worst = std::max(worst, off < 0 ? -off : off);
    }
    CHECK(worst <= 1'250);
    CHECK(worst >= 1'249);
}

TEST_CASE("reading inversion finds the earliest true time")
{
    ClockModel c;
    c.offset_ns = 100;
    c.drift = {-37, 10};
    for (SimTime r : {SimTime{1'000'000}, SimTime{123'456'789}, SimTime{5'000'000'001}}) {
        const SimTime t = true_time_for_reading(c, r);
        CHECK(clock_read(c, t) >= r);
        CHECK(clock_read(c, t - 1) < r);
    }
}

TEST_CASE("rng fork is deterministic and label dependent")
{
    auto a = rng_fork(42, "talker/x/wake");
    auto b = rng_fork(42, "talker/x/wake");
    auto c = rng_fork(42, "talker/y/wake");
    int differing = 0;
    for (int i = 0; i < 100; ++i) {
        const auto va = a.next();
        CHECK(va == b.next());
        differing += va != c.next();
    }
    CHECK(differing > 90);
}

TEST_CASE("constant zero always samples zero")
{
    Rng rng(5);
    const auto d = JitterDist::constant(0);
    for (int i = 0; i < 1000; ++i)
        REQUIRE(d.sample(rng) == 0);
    CHECK(d.is_zero());
}

TEST_CASE("sampling is a pure function of the rng state")
{
    const auto d = JitterDist::normal(500, 100, 0);
    Rng a(9), b(9);
    for (int i = 0; i < 1000; ++i)
        REQUIRE(d.sample(a) == d.sample(b));
}

TEST_CASE("truncated normal stays inside four sigma and the lower bound")
{
    const auto d = JitterDist::normal(100, 50, 20);
    CHECK(d.lower_bound() == 20);
    CHECK(d.upper_bound() == 300);
    Rng rng(2);
    for (int i = 0; i < 100'000; ++i) {
        const auto v = d.sample(rng);
        REQUIRE(v >= 20);
        REQUIRE(v <= 300);
    }
}

TEST_CASE("uniform and empirical sample within their support")
{
    Rng rng(4);
    const auto u = JitterDist::uniform(-5, 5);
    const auto e = JitterDist::empirical({{10, 1.0}, {20, 3.0}});
    int twenties = 0;
    for (int i = 0; i < 10'000; ++i) {
        const auto v = u.sample(rng);
        REQUIRE(v >= -5);
        REQUIRE(v <= 5);
        const auto w = e.sample(rng);
        REQUIRE((w == 10 || w == 20));
        twenties += w == 20;
    }
    CHECK(twenties > 7'000);
    CHECK(twenties < 8'000);
}
