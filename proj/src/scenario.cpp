#include "tsnsim/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <set>
#include <sstream>

#include "tsnsim/errors.hpp"

namespace tsnsim {

using nlohmann::json;

namespace {

struct Diags
{
    std::vector<std::string> lines;
    void add(const std::string &path, const std::string &msg) { lines.push_back(path + ": " + msg); }
};

std::string join_path(const std::string &base, const std::string &key)
{
    return base.empty() ? key : base + "." + key;
}

std::string type_name(const json &j)
{
    return j.type_name();
}

/// Strict view over one JSON object: remembers which keys were read so the
/// rest can be reported as unknown.
class Obj
{
  public:
    Obj(const json &j, std::string path, Diags &d) : j_(j), path_(std::move(path)), d_(d)
    {
        if (!j_.is_object()) {
            d_.add(path_.empty() ? "<root>" : path_, "expected an object, got " + type_name(j_));
            valid_ = false;
        }
    }
    Obj(const Obj &) = delete;
    ~Obj() { finish(); }

    bool valid() const { return valid_; }
    const std::string &path() const { return path_; }
    Diags &diags() { return d_; }
    std::string at(const std::string &key) const { return join_path(path_, key); }

    const json *get(const std::string &key)
    {
        seen_.insert(key);
        if (!valid_)
            return nullptr;
        const auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

    template <class T> std::optional<T> integer(const std::string &key, T lo, T hi)
    {
        const json *v = get(key);
        if (!v)
            return std::nullopt;
        long double x = 0;
        if (v->is_number_integer() && v->is_number_unsigned())
            x = static_cast<long double>(v->get<std::uint64_t>());
        else if (v->is_number_integer())
            x = static_cast<long double>(v->get<std::int64_t>());
        else if (v->is_number_float() && std::floor(v->get<double>()) == v->get<double>())
            x = static_cast<long double>(v->get<double>());
        else {
            d_.add(at(key), "expected an integer, got " + (v->is_number() ? v->dump() : type_name(*v)));
            return std::nullopt;
        }
        if (x < static_cast<long double>(lo) || x > static_cast<long double>(hi)) {
            d_.add(at(key), "value " + v->dump() + " out of range [" + std::to_string(lo) + ", " +
                                std::to_string(hi) + "]");
            return std::nullopt;
        }
        return static_cast<T>(x);
    }

    template <class T> T integer_or(const std::string &key, T dflt, T lo, T hi)
    {
        return integer<T>(key, lo, hi).value_or(dflt);
    }

    std::optional<double> number(const std::string &key)
    {
        const json *v = get(key);
        if (!v)
            return std::nullopt;
        if (!v->is_number()) {
            d_.add(at(key), "expected a number, got " + type_name(*v));
            return std::nullopt;
        }
        return v->get<double>();
    }

    std::optional<bool> boolean(const std::string &key)
    {
        const json *v = get(key);
        if (!v)
            return std::nullopt;
        if (!v->is_boolean()) {
            d_.add(at(key), "expected true or false, got " + type_name(*v));
            return std::nullopt;
        }
        return v->get<bool>();
    }

    std::optional<std::string> string(const std::string &key)
    {
        const json *v = get(key);
        if (!v)
            return std::nullopt;
        if (!v->is_string()) {
            d_.add(at(key), "expected a string, got " + type_name(*v));
            return std::nullopt;
        }
        return v->get<std::string>();
    }

    std::optional<std::string> required_string(const std::string &key)
    {
        auto s = string(key);
        if (!s && valid_ && !j_.contains(key))
            d_.add(at(key), "required");
        return s;
    }

    void require(const std::string &key)
    {
        if (valid_ && !j_.contains(key))
            d_.add(at(key), "required");
    }

    std::optional<JitterDist> dist(const std::string &key)
    {
        const json *v = get(key);
        if (!v)
            return std::nullopt;
        try {
            return parse_dist(*v);
        } catch (const std::exception &e) {
            d_.add(at(key), e.what());
            return std::nullopt;
        }
    }

    std::optional<MacAddress> mac(const std::string &key)
    {
        auto s = string(key);
        if (!s)
            return std::nullopt;
        try {
            return MacAddress::parse(*s);
        } catch (const std::exception &e) {
            d_.add(at(key), e.what());
            return std::nullopt;
        }
    }

    std::optional<GateMask> mask(const std::string &key)
    {
        const json *v = get(key);
        if (!v)
            return std::nullopt;
        if (v->is_number_unsigned() && v->get<std::uint64_t>() <= 0xFF)
            return static_cast<GateMask>(v->get<std::uint64_t>());
        if (v->is_string()) {
            const auto s = v->get<std::string>();
            try {
                std::size_t pos = 0;
                const unsigned long x = std::stoul(s, &pos, 0);
                if (pos == s.size() && x <= 0xFF)
                    return static_cast<GateMask>(x);
            } catch (const std::exception &) {
            }
        }
        if (v->is_array()) {
            GateMask m = 0;
            bool ok = true;
            for (const auto &c : *v) {
                if (!c.is_number_unsigned() || c.get<std::uint64_t>() > 7)
                    ok = false;
                else
                    m = static_cast<GateMask>(m | (1u << c.get<unsigned>()));
            }
            if (ok)
                return m;
        }
        d_.add(at(key), "expected an 8-bit mask (0-255, \"0x..\" or a list of classes 0-7), got " + v->dump());
        return std::nullopt;
    }

    /// Object member as a nested strict view.
    const json *object(const std::string &key)
    {
        const json *v = get(key);
        if (v && !v->is_object()) {
            d_.add(at(key), "expected an object, got " + type_name(*v));
            return nullptr;
        }
        return v;
    }

    const json *array(const std::string &key)
    {
        const json *v = get(key);
        if (v && !v->is_array()) {
            d_.add(at(key), "expected an array, got " + type_name(*v));
            return nullptr;
        }
        return v;
    }

    void finish()
    {
        if (!valid_ || finished_)
            return;
        finished_ = true;
        for (const auto &[k, _] : j_.items())
            if (!seen_.count(k))
                d_.add(at(k), "unknown key");
    }

  private:
    const json &j_;
    std::string path_;
    Diags &d_;
    std::set<std::string> seen_;
    bool valid_ = true;
    bool finished_ = false;
};

constexpr auto kI64Max = std::numeric_limits<std::int64_t>::max();
constexpr auto kU64Max = std::numeric_limits<std::uint64_t>::max();

std::optional<PortRef> parse_port_ref(const std::string &text)
{
    const auto dot = text.find('.');
    if (dot == std::string::npos || dot == 0 || dot + 1 == text.size() || text.find('.', dot + 1) != std::string::npos)
        return std::nullopt;
    return PortRef{text.substr(0, dot), text.substr(dot + 1)};
}

std::optional<PortRef> port_ref_field(Obj &o, const std::string &key)
{
    const auto s = o.required_string(key);
    if (!s)
        return std::nullopt;
    auto r = parse_port_ref(*s);
    if (!r)
        o.diags().add(o.at(key), "expected \"node.port\", got \"" + *s + "\"");
    return r;
}

DriftPpm parse_drift(const json &v)
{
    if (v.is_number()) {
        const double x = v.get<double>();
        return DriftPpm{std::llround(x * 1000.0), 1000};
    }
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        const auto slash = s.find('/');
        std::size_t p1 = 0;
        std::size_t p2 = 0;
        try {
            if (slash == std::string::npos) {
                const std::int64_t n = std::stoll(s, &p1);
                if (p1 == s.size())
                    return DriftPpm{n, 1};
            } else {
                const std::int64_t n = std::stoll(s.substr(0, slash), &p1);
                const std::int64_t d = std::stoll(s.substr(slash + 1), &p2);
                if (p1 == slash && p2 == s.size() - slash - 1 && d > 0)
                    return DriftPpm{n, d};
            }
        } catch (const std::exception &) {
        }
    }
    throw Error("expected ppm as a number or \"num/den\", got " + v.dump());
}

ClockModel parse_clock(const json &j, const std::string &path, Diags &d)
{
    ClockModel c;
    Obj o(j, path, d);
    c.offset_ns = o.integer_or<Duration>("offset_ns", 0, -kI64Max, kI64Max);
    if (const json *v = o.get("drift_ppm")) {
        try {
            c.drift = parse_drift(*v);
        } catch (const std::exception &e) {
            d.add(o.at("drift_ppm"), e.what());
        }
    }
    c.sync_interval_ns = o.integer<Duration>("sync_interval_ns", 1, kI64Max);
    if (auto r = o.dist("sync_residual"))
        c.sync_residual = *r;
    return c;
}

std::vector<GclEntry> parse_gcl_entries(Obj &o, const std::string &key)
{
    std::vector<GclEntry> out;
    const json *arr = o.array(key);
    if (!arr) {
        o.require(key);
        return out;
    }
    for (std::size_t i = 0; i < arr->size(); ++i) {
        Obj e((*arr)[i], o.at(key) + "." + std::to_string(i), o.diags());
        if (!e.valid())
            continue;
        GclEntry g;
        e.require("gate_mask");
        e.require("duration_ns");
        g.gate_mask = e.mask("gate_mask").value_or(0);
        g.duration_ns = e.integer_or<Duration>("duration_ns", 0, 1, kI64Max);
        out.push_back(g);
    }
    if (out.empty())
        o.diags().add(o.at(key), "at least one entry required");
    return out;
}

NodeSpec parse_node(const json &j, const std::string &path, Diags &d)
{
    NodeSpec n;
    Obj o(j, path, d);
    n.name = o.required_string("name").value_or("");
    const auto kind = o.string("kind").value_or("end_station");
    if (kind == "end_station")
        n.kind = NodeKind::end_station;
    else if (kind == "bridge")
        n.kind = NodeKind::bridge;
    else
        d.add(o.at("kind"), "expected \"end_station\" or \"bridge\", got \"" + kind + "\"");
    n.mac = o.mac("mac");
    if (const json *fw = o.object("forwarding")) {
        Obj f(*fw, o.at("forwarding"), d);
        const auto preset = f.string("preset").value_or("custom");
        if (auto p = parse_forwarding_preset(preset))
            n.preset = *p;
        else
            d.add(f.at("preset"), "unknown preset \"" + preset + "\"");
        auto lat = f.dist("latency");
        if (lat)
            n.forwarding_latency = *lat;
        else if (n.preset != ForwardingPreset::custom)
            n.forwarding_latency = preset_distribution(n.preset);
    }
    if (const json *fdb = o.object("fdb")) {
        for (const auto &[mac, port] : fdb->items()) {
            const auto p = o.at("fdb") + "." + mac;
            try {
                if (!port.is_string())
                    throw Error("expected a port name");
                n.fdb[MacAddress::parse(mac)] = port.get<std::string>();
            } catch (const std::exception &e) {
                d.add(p, e.what());
            }
        }
    }
    if (n.kind == NodeKind::end_station && (o.valid() && j.contains("forwarding")))
        d.add(o.at("forwarding"), "only bridges forward");
    return n;
}

LinkSpec parse_link(const json &j, const std::string &path, Diags &d, std::size_t index)
{
    LinkSpec l;
    Obj o(j, path, d);
    l.name = o.string("name").value_or("link" + std::to_string(index));
    if (auto a = port_ref_field(o, "a"))
        l.a = *a;
    if (auto b = port_ref_field(o, "b"))
        l.b = *b;
    l.params.rate_bps = o.integer_or<std::uint64_t>("rate_bps", 1'000'000'000, 1, kU64Max);
    l.params.propagation_ns = o.integer_or<Duration>("propagation_ns", 0, 0, kI64Max);
    l.params.overhead_bytes = o.integer_or<std::uint64_t>("overhead_bytes", 0, 0, 1'000'000);
    if (auto loss = o.number("loss")) {
        if (*loss < 0.0 || *loss > 1.0)
            d.add(o.at("loss"), "must be within [0, 1]");
        else
            l.params.loss = *loss;
    }
    return l;
}

ShaperSpec parse_shaper(const json &j, const std::string &path, Diags &d)
{
    ShaperSpec s;
    Obj o(j, path, d);
    if (const json *t = o.object("taprio")) {
        Obj to(*t, o.at("taprio"), d);
        TaprioSpec ts;
        ts.base_time = to.integer_or<SimTime>("base_time_ns", 0, 0, kU64Max);
        ts.cycle_time_ns = to.integer<Duration>("cycle_time_ns", 1, kI64Max);
        ts.entries = parse_gcl_entries(to, "entries");
        const auto guard = to.string("guard").value_or("fit");
        if (guard == "fit")
            ts.guard = GuardMode::fit;
        else if (guard == "none")
            ts.guard = GuardMode::none;
        else
            d.add(to.at("guard"), "expected \"fit\" or \"none\"");
        s.taprio = std::move(ts);
    }
    if (const json *e = o.object("etf")) {
        Obj eo(*e, o.at("etf"), d);
        EtfSpec es;
        es.offload = eo.boolean("offload").value_or(false);
        es.delta_ns = eo.integer<Duration>("delta_ns", 0, kI64Max);
        s.etf = es;
    }
    if (const json *p = o.object("preemption")) {
        Obj po(*p, o.at("preemption"), d);
        s.preemption.enabled = po.boolean("enabled").value_or(true);
        s.preemption.express_classes = po.mask("express_classes").value_or(0);
        s.preemption.min_fragment_bytes = po.integer_or<std::uint32_t>("min_fragment_bytes", 64, 1, 9000);
    }
    s.queue_capacity = o.integer_or<std::size_t>("queue_capacity", 1000, 1, 100'000'000);
    s.record_tx = o.boolean("record_tx").value_or(false);
    return s;
}

StreamPattern parse_pattern(const json &j, const std::string &path, Diags &d)
{
    StreamPattern p;
    Obj o(j, path, d);
    p.dest_mac = o.mac("dest_mac");
    p.vlan_id = o.integer<std::uint16_t>("vlan_id", 0, 4095);
    p.pcp = o.integer<std::uint8_t>("pcp", 0, 7);
    return p;
}

FilterSpec parse_filter(const json &j, const std::string &path, Diags &d,
                        const std::vector<TrafficSpec> &traffic)
{
    FilterSpec f;
    Obj o(j, path, d);
    f.drop_unmatched = o.boolean("drop_unmatched").value_or(false);
    const json *streams = o.array("streams");
    if (!streams)
        return f;
    for (std::size_t i = 0; i < streams->size(); ++i) {
        Obj s((*streams)[i], o.at("streams") + "." + std::to_string(i), d);
        if (!s.valid())
            continue;
        FilterStreamSpec fs;
        const json *match = s.object("match");
        const auto by_name = s.string("stream");
        if (match && by_name)
            d.add(s.path(), "give either \"match\" or \"stream\", not both");
        if (match) {
            fs.match = parse_pattern(*match, s.at("match"), d);
        } else if (by_name) {
            const auto it = std::find_if(traffic.begin(), traffic.end(),
                                         [&](const TrafficSpec &t) { return t.name == *by_name; });
            if (it == traffic.end())
                d.add(s.at("stream"), "unknown stream \"" + *by_name + "\"");
            else
                fs.match = StreamPattern{it->dest_mac, it->vlan_id, it->pcp};
        } else {
            d.add(s.path(), "\"match\" or \"stream\" required");
        }
        fs.base_time = s.integer_or<SimTime>("base_time_ns", 0, 0, kU64Max);
        if (const json *entries = s.array("entries")) {
            for (std::size_t k = 0; k < entries->size(); ++k) {
                Obj e((*entries)[k], s.at("entries") + "." + std::to_string(k), d);
                if (!e.valid())
                    continue;
                StreamGateEntry g;
                e.require("duration_ns");
                g.open = e.boolean("open").value_or(true);
                g.duration_ns = e.integer_or<Duration>("duration_ns", 0, 1, kI64Max);
                g.ipv = e.integer<std::uint8_t>("ipv", 0, 7);
                g.max_octets = e.integer<std::uint64_t>("max_octets", 0, kU64Max);
                fs.entries.push_back(g);
            }
        }
        if (fs.entries.empty())
            fs.entries.push_back(StreamGateEntry{true, 1'000'000'000, std::nullopt, std::nullopt});
        f.streams.push_back(std::move(fs));
    }
    return f;
}

TrafficSpec parse_traffic(const json &j, const std::string &path, Diags &d, std::size_t index)
{
    TrafficSpec t;
    Obj o(j, path, d);
    t.name = o.string("name").value_or("stream" + std::to_string(index));
    if (auto p = port_ref_field(o, "talker"))
        t.talker = *p;
    t.listener = o.required_string("listener").value_or("");
    if (auto m = o.mac("dest_mac"))
        t.dest_mac = *m;
    t.vlan_id = o.integer_or<std::uint16_t>("vlan_id", 0, 0, 4095);
    t.pcp = o.integer_or<std::uint8_t>("pcp", 0, 0, 7);
    t.priority = o.integer<std::uint8_t>("priority", 0, 7);
    t.period_ns = o.integer_or<Duration>("period_ns", 500'000, 1, kI64Max);
    t.phase_ns = o.integer_or<Duration>("phase_ns", 0, 0, kI64Max);
    t.count = o.integer<std::uint64_t>("count", 1, kU64Max);
    t.frame_size_bytes = o.integer_or<std::uint32_t>("frame_size_bytes", 128, 1, 1'000'000);
    const auto mode = o.string("mode").value_or("sleep");
    if (mode == "sleep")
        t.mode = TalkerMode::sleep;
    else if (mode == "txtime")
        t.mode = TalkerMode::txtime;
    else
        d.add(o.at("mode"), "expected \"sleep\" or \"txtime\", got \"" + mode + "\"");
    t.advance_ns = o.integer_or<Duration>("advance_ns", 100'000, 0, kI64Max);
    for (auto [key, field] : {std::pair{"wake_jitter", &t.wake_jitter}, std::pair{"stack_latency", &t.stack_latency},
                              std::pair{"driver_latency", &t.driver_latency},
                              std::pair{"hw_precision", &t.hw_precision}, std::pair{"rx_latency", &t.rx_latency}})
        if (auto dist = o.dist(key))
            *field = *dist;
    return t;
}

RunSpec parse_run(const json &j, const std::string &path, Diags &d)
{
    RunSpec r;
    Obj o(j, path, d);
    r.count = o.integer_or<std::uint64_t>("count", r.count, 1, kU64Max);
    r.seed = o.integer_or<std::uint64_t>("seed", r.seed, 0, kU64Max);
    r.start_ns = o.integer_or<SimTime>("start_ns", r.start_ns, 0, kU64Max / 4);
    r.drain_ns = o.integer_or<Duration>("drain_ns", r.drain_ns, 0, kI64Max / 4);
    r.measure = o.string("measure");
    r.histogram_bin_ns = o.integer<Duration>("histogram_bin_ns", 1, kI64Max);
    return r;
}

template <class F> void each(Obj &root, const std::string &key, F &&f)
{
    if (const json *arr = root.array(key))
        for (std::size_t i = 0; i < arr->size(); ++i)
            f((*arr)[i], root.at(key) + "." + std::to_string(i), i);
}

} // namespace

JitterDist parse_dist(const json &j)
{
    if (j.is_number_integer())
        return JitterDist::constant(j.get<Duration>());
    if (j.is_number_float()) {
        const double x = j.get<double>();
        if (std::floor(x) != x)
            throw Error("a constant distribution takes integer nanoseconds");
        return JitterDist::constant(static_cast<Duration>(x));
    }
    if (!j.is_object())
        throw Error("expected a number or a distribution object, got " + std::string(j.type_name()));
    Diags d;
    std::optional<JitterDist> out;
    {
        Obj o(j, "", d);
        const auto kind = o.string("kind").value_or("");
        if (kind == "constant") {
            out = JitterDist::constant(o.integer_or<Duration>("value", 0, -kI64Max, kI64Max));
        } else if (kind == "uniform") {
            o.require("min");
            o.require("max");
            const auto lo = o.integer_or<Duration>("min", 0, -kI64Max, kI64Max);
            const auto hi = o.integer_or<Duration>("max", 0, -kI64Max, kI64Max);
            if (lo > hi)
                d.add("max", "must be >= min");
            out = JitterDist::uniform(lo, hi);
        } else if (kind == "normal") {
            o.require("mean");
            o.require("stddev");
            const double mean = o.number("mean").value_or(0.0);
            const double sd = o.number("stddev").value_or(0.0);
            if (sd < 0.0)
                d.add("stddev", "must be >= 0");
            out = JitterDist::normal(mean, sd, o.integer<Duration>("lower", -kI64Max, kI64Max));
        } else if (kind == "empirical") {
            std::vector<std::pair<Duration, double>> pts;
            const json *arr = o.array("points");
            if (arr) {
                for (const auto &p : *arr) {
                    if (!p.is_array() || p.size() != 2 || !p[0].is_number_integer() || !p[1].is_number() ||
                        p[1].get<double>() < 0.0) {
                        d.add("points", "each point is [value_ns, weight >= 0]");
                        break;
                    }
                    pts.emplace_back(p[0].get<Duration>(), p[1].get<double>());
                }
            }
            double total = 0.0;
            for (const auto &p : pts)
                total += p.second;
            if (pts.empty() || total <= 0.0)
                d.add("points", "needs at least one point with positive weight");
            out = JitterDist::empirical(std::move(pts));
        } else {
            d.add("kind", "expected constant, uniform, normal or empirical");
        }
    }
    if (!d.lines.empty()) {
        std::string msg = d.lines.front();
        for (std::size_t i = 1; i < d.lines.size(); ++i)
            msg += "; " + d.lines[i];
        throw Error(msg);
    }
    return *out;
}

json dist_to_json(const JitterDist &d)
{
    struct V
    {
        json operator()(const JitterDist::Constant &c) const { return {{"kind", "constant"}, {"value", c.value}}; }
        json operator()(const JitterDist::Uniform &u) const
        {
            return {{"kind", "uniform"}, {"min", u.min}, {"max", u.max}};
        }
        json operator()(const JitterDist::Normal &n) const
        {
            json j = {{"kind", "normal"}, {"mean", n.mean}, {"stddev", n.stddev}};
            if (n.lower)
                j["lower"] = *n.lower;
            return j;
        }
        json operator()(const JitterDist::Empirical &e) const
        {
            json pts = json::array();
            for (const auto &[v, w] : e.points)
                pts.push_back({v, w});
            return {{"kind", "empirical"}, {"points", pts}};
        }
    };
    return std::visit(V{}, d.kind());
}

const NodeSpec *ScenarioConfig::node(const std::string &name) const
{
    for (const auto &n : nodes)
        if (n.name == name)
            return &n;
    return nullptr;
}

const TrafficSpec *ScenarioConfig::stream(const std::string &name) const
{
    for (const auto &t : traffic)
        if (t.name == name)
            return &t;
    return nullptr;
}

const TrafficSpec &ScenarioConfig::measured() const
{
    if (run.measure)
        if (const auto *t = stream(*run.measure))
            return *t;
    return traffic.at(0);
}

ScenarioConfig parse_scenario(const json &doc)
{
    Diags d;
    ScenarioConfig cfg;
    {
        Obj root(doc, "", d);
        each(root, "nodes", [&](const json &j, const std::string &p, std::size_t) {
            cfg.nodes.push_back(parse_node(j, p, d));
        });
        each(root, "links", [&](const json &j, const std::string &p, std::size_t i) {
            cfg.links.push_back(parse_link(j, p, d, i));
        });
        if (const json *clocks = root.object("clocks")) {
            for (const auto &[name, spec] : clocks->items()) {
                const auto p = root.at("clocks") + "." + name;
                Obj c(spec, p, d);
                ClockSpec cs;
                if (const json *phc = c.object("phc"))
                    cs.phc = parse_clock(*phc, c.at("phc"), d);
                if (const json *sys = c.object("system"))
                    cs.system = parse_clock(*sys, c.at("system"), d);
                cfg.clocks[name] = cs;
            }
        }
        // Traffic first: filters may refer to streams by name.
        each(root, "traffic", [&](const json &j, const std::string &p, std::size_t i) {
            cfg.traffic.push_back(parse_traffic(j, p, d, i));
        });
        // Destination defaults to the listener's MAC.
        if (doc.is_object() && doc.contains("traffic") && doc["traffic"].is_array()) {
            for (std::size_t i = 0; i < cfg.traffic.size() && i < doc["traffic"].size(); ++i) {
                auto &t = cfg.traffic[i];
                if (doc["traffic"][i].is_object() && doc["traffic"][i].contains("dest_mac"))
                    continue;
                if (const auto *n = cfg.node(t.listener); n && n->mac)
                    t.dest_mac = *n->mac;
                else if (cfg.node(t.listener))
                    d.add("traffic." + std::to_string(i) + ".dest_mac", "required when the listener has no mac");
            }
        }

        if (const json *shapers = root.object("shapers")) {
            for (const auto &[port, spec] : shapers->items()) {
                const auto p = root.at("shapers") + "." + port;
                const auto ref = parse_port_ref(port);
                if (!ref) {
                    d.add(p, "key must be \"node.port\"");
                    continue;
                }
                cfg.shapers[*ref] = parse_shaper(spec, p, d);
            }
        }
        if (const json *filters = root.object("filters")) {
            for (const auto &[port, spec] : filters->items()) {
                const auto p = root.at("filters") + "." + port;
                const auto ref = parse_port_ref(port);
                if (!ref) {
                    d.add(p, "key must be \"node.port\"");
                    continue;
                }
                cfg.filters[*ref] = parse_filter(spec, p, d, cfg.traffic);
            }
        }
        if (const json *frer = root.object("frer")) {
            Obj fo(*frer, root.at("frer"), d);
            each(fo, "replicate", [&](const json &j, const std::string &p, std::size_t) {
                Obj r(j, p, d);
                FrerReplicateSpec rs;
                rs.node = r.required_string("node").value_or("");
                rs.stream = r.required_string("stream").value_or("");
                if (const json *ports = r.array("ports"))
                    for (const auto &port : *ports) {
                        if (port.is_string())
                            rs.ports.push_back(port.get<std::string>());
                        else
                            d.add(r.at("ports"), "port names must be strings");
                    }
                r.require("ports");
                cfg.frer.replicate.push_back(std::move(rs));
            });
            each(fo, "eliminate", [&](const json &j, const std::string &p, std::size_t) {
                Obj e(j, p, d);
                FrerEliminateSpec es;
                es.node = e.required_string("node").value_or("");
                es.stream = e.required_string("stream").value_or("");
                es.window = e.integer_or<std::size_t>("window", RecoveryState::kDefaultWindow, 1, 32768);
                cfg.frer.eliminate.push_back(std::move(es));
            });
        }
        if (const json *cqf = root.object("cqf")) {
            Obj co(*cqf, root.at("cqf"), d);
            CqfSpec cs;
            co.require("cycle_time_ns");
            cs.cycle_time_ns = co.integer_or<Duration>("cycle_time_ns", 0, 1, kI64Max);
            cs.ipv_even = co.integer_or<std::uint8_t>("ipv_even", 0, 0, 7);
            cs.ipv_odd = co.integer_or<std::uint8_t>("ipv_odd", 1, 0, 7);
            cs.base_time = co.integer_or<SimTime>("base_time_ns", 0, 0, kU64Max);
            for (auto [key, field] : {std::pair{"bridges", &cs.bridges}, std::pair{"streams", &cs.streams}})
                if (const json *arr = co.array(key))
                    for (const auto &v : *arr) {
                        if (v.is_string())
                            field->push_back(v.get<std::string>());
                        else
                            d.add(co.at(key), "names must be strings");
                    }
            co.require("bridges");
            cfg.cqf = std::move(cs);
        }
        if (const json *run = root.object("run"))
            cfg.run = parse_run(*run, root.at("run"), d);
    }

    if (d.lines.empty())
        d.lines = validate_scenario(cfg);
    if (!d.lines.empty())
        throw ConfigInvalid(std::move(d.lines));
    return cfg;
}

std::vector<std::string> validate_scenario(const ScenarioConfig &cfg)
{
    Diags d;
    std::set<std::string> names;
    for (std::size_t i = 0; i < cfg.nodes.size(); ++i) {
        const auto &n = cfg.nodes[i];
        const auto p = "nodes." + std::to_string(i);
        if (n.name.empty() || n.name.find('.') != std::string::npos)
            d.add(p + ".name", "must be non-empty and contain no '.'");
        else if (!names.insert(n.name).second)
            d.add(p + ".name", "duplicate node \"" + n.name + "\"");
        if (n.forwarding_latency.lower_bound() < 0)
            d.add(p + ".forwarding.latency", "can produce negative latencies");
    }
    if (cfg.nodes.empty())
        d.add("nodes", "at least one node required");

    std::set<PortRef> ports;
    std::map<PortRef, const LinkSpec *> link_of;
    for (std::size_t i = 0; i < cfg.links.size(); ++i) {
        const auto &l = cfg.links[i];
        const auto p = "links." + std::to_string(i);
        for (auto [side, ref] : {std::pair{"a", &l.a}, std::pair{"b", &l.b}}) {
            if (ref->node.empty())
                continue;
            if (!cfg.node(ref->node))
                d.add(p + "." + side, "unknown node \"" + ref->node + "\"");
            if (!ports.insert(*ref).second)
                d.add(p + "." + side, "port " + ref->str() + " already connected");
            link_of[*ref] = &l;
        }
        if (l.a.node == l.b.node && !l.a.node.empty())
            d.add(p, "a link cannot connect a node to itself");
    }

    for (const auto &[name, _] : cfg.clocks)
        if (!cfg.node(name))
            d.add("clocks." + name, "unknown node");

    std::set<PortRef> cqf_ports;
    if (cfg.cqf) {
        const auto &c = *cfg.cqf;
        if (c.ipv_even == c.ipv_odd)
            d.add("cqf.ipv_odd", "must differ from ipv_even");
        if (c.bridges.empty())
            d.add("cqf.bridges", "at least one bridge required");
        for (const auto &b : c.bridges) {
            const auto *n = cfg.node(b);
            if (!n || n->kind != NodeKind::bridge)
                d.add("cqf.bridges", "\"" + b + "\" is not a bridge");
            for (const auto &p : ports)
                if (p.node == b)
                    cqf_ports.insert(p);
        }
        for (const auto &s : c.streams)
            if (!cfg.stream(s))
                d.add("cqf.streams", "unknown stream \"" + s + "\"");
    }

    for (const auto &[ref, s] : cfg.shapers) {
        const auto p = "shapers." + ref.str();
        const auto *n = cfg.node(ref.node);
        if (!ports.count(ref))
            d.add(p, "no link attached to this port");
        if (s.etf && n && n->kind != NodeKind::end_station)
            d.add(p + ".etf", "launch-time queues are only available on end stations");
        if (s.taprio) {
            try {
                GateControlList(s.taprio->base_time, s.taprio->entries, s.taprio->cycle_time_ns);
            } catch (const std::exception &e) {
                d.add(p + ".taprio", e.what());
            }
            if (cqf_ports.count(ref))
                d.add(p + ".taprio", "port is scheduled by cqf");
        }
        if (s.preemption.enabled && s.preemption.express_classes == 0)
            d.add(p + ".preemption.express_classes", "at least one express class required");
    }

    for (const auto &[ref, f] : cfg.filters) {
        const auto p = "filters." + ref.str();
        const auto *n = cfg.node(ref.node);
        if (!ports.count(ref))
            d.add(p, "no link attached to this port");
        if (n && n->kind != NodeKind::bridge)
            d.add(p, "ingress filters are only available on bridges");
        if (cqf_ports.count(ref))
            d.add(p, "port is filtered by cqf");
        for (std::size_t i = 0; i < f.streams.size(); ++i) {
            try {
                StreamGate(f.streams[i].base_time, f.streams[i].entries);
            } catch (const std::exception &e) {
                d.add(p + ".streams." + std::to_string(i), e.what());
            }
        }
        std::vector<StreamRule> rules;
        for (std::size_t i = 0; i < f.streams.size(); ++i)
            rules.push_back({f.streams[i].match, StreamHandle{static_cast<std::uint32_t>(i)}});
        try {
            make_stream_rules(rules);
        } catch (const std::exception &e) {
            d.add(p + ".streams", e.what());
        }
    }

    auto port_exists = [&](const std::string &node, const std::string &port) {
        return ports.count(PortRef{node, port}) > 0;
    };
    for (std::size_t i = 0; i < cfg.frer.replicate.size(); ++i) {
        const auto &r = cfg.frer.replicate[i];
        const auto p = "frer.replicate." + std::to_string(i);
        const auto *n = cfg.node(r.node);
        if (!n || n->kind != NodeKind::bridge)
            d.add(p + ".node", "\"" + r.node + "\" is not a bridge");
        if (!cfg.stream(r.stream))
            d.add(p + ".stream", "unknown stream \"" + r.stream + "\"");
        if (r.ports.empty())
            d.add(p + ".ports", "at least one member port required");
        for (const auto &port : r.ports)
            if (!port_exists(r.node, port))
                d.add(p + ".ports", "no linked port " + r.node + "." + port);
    }
    for (std::size_t i = 0; i < cfg.frer.eliminate.size(); ++i) {
        const auto &e = cfg.frer.eliminate[i];
        const auto p = "frer.eliminate." + std::to_string(i);
        const auto *t = cfg.stream(e.stream);
        if (!t)
            d.add(p + ".stream", "unknown stream \"" + e.stream + "\"");
        const auto *n = cfg.node(e.node);
        if (!n)
            d.add(p + ".node", "unknown node \"" + e.node + "\"");
        else if (n->kind == NodeKind::end_station && t && t->listener != e.node)
            d.add(p + ".node", "an end station can only eliminate streams it listens to");
    }

    std::set<std::string> stream_names;
    std::set<StreamKey> stream_keys;
    std::map<PortRef, std::string> offload_precision;
    for (std::size_t i = 0; i < cfg.traffic.size(); ++i) {
        const auto &t = cfg.traffic[i];
        const auto p = "traffic." + std::to_string(i);
        if (!stream_names.insert(t.name).second)
            d.add(p + ".name", "duplicate stream \"" + t.name + "\"");
        if (!stream_keys.insert(t.key()).second)
            d.add(p, "another stream already uses this (dest_mac, vlan_id, pcp)");
        const auto *talker = cfg.node(t.talker.node);
        if (!talker || talker->kind != NodeKind::end_station)
            d.add(p + ".talker", "\"" + t.talker.node + "\" is not an end station");
        const auto *listener = cfg.node(t.listener);
        if (!listener || listener->kind != NodeKind::end_station)
            d.add(p + ".listener", "\"" + t.listener + "\" is not an end station");
        const auto link = link_of.find(t.talker);
        if (link == link_of.end()) {
            d.add(p + ".talker", "no link attached to " + t.talker.str());
        } else {
            const auto &lp = link->second->params;
            const Duration tt = transmission_time(t.frame_size_bytes, lp.rate_bps, lp.overhead_bytes);
            if (t.period_ns <= tt)
                d.add(p + ".period_ns",
                      "must exceed the frame's transmission time on the first link (" + std::to_string(tt) + " ns)");
        }
        try {
            check_frame_size(t.frame_size_bytes);
        } catch (const std::exception &e) {
            d.add(p + ".frame_size_bytes", e.what());
        }
        for (auto [key, dist] : {std::pair{"wake_jitter", &t.wake_jitter}, std::pair{"stack_latency", &t.stack_latency},
                                 std::pair{"driver_latency", &t.driver_latency},
                                 std::pair{"hw_precision", &t.hw_precision}, std::pair{"rx_latency", &t.rx_latency}})
            if (dist->lower_bound() < 0)
                d.add(p + "." + key, "can produce negative values");
        const auto shaper = cfg.shapers.find(t.talker);
        const bool has_etf = shaper != cfg.shapers.end() && shaper->second.etf;
        if (t.mode == TalkerMode::txtime) {
            if (!has_etf)
                d.add(p + ".mode", "txtime mode needs an etf shaper on " + t.talker.str());
            else if (shaper->second.etf->offload) {
                const auto [it, fresh] = offload_precision.emplace(t.talker, t.hw_precision.describe());
                if (!fresh && it->second != t.hw_precision.describe())
                    d.add(p + ".hw_precision", "streams sharing an offloaded port need the same hw_precision");
            }
            if (t.advance_ns < 0)
                d.add(p + ".advance_ns", "must be >= 0");
        }
    }
    if (cfg.traffic.empty())
        d.add("traffic", "at least one stream required");
    if (cfg.run.measure && !cfg.stream(*cfg.run.measure))
        d.add("run.measure", "unknown stream \"" + *cfg.run.measure + "\"");

    // Every listener must be reachable from its talker.
    if (d.lines.empty()) {
        std::map<std::string, std::vector<std::string>> adj;
        for (const auto &l : cfg.links) {
            adj[l.a.node].push_back(l.b.node);
            adj[l.b.node].push_back(l.a.node);
        }
        for (std::size_t i = 0; i < cfg.traffic.size(); ++i) {
            const auto &t = cfg.traffic[i];
            std::set<std::string> seen{t.talker.node};
            std::deque<std::string> q{t.talker.node};
            while (!q.empty()) {
                const auto u = q.front();
                q.pop_front();
                if (u != t.talker.node && cfg.node(u)->kind != NodeKind::bridge)
                    continue;
                for (const auto &v : adj[u])
                    if (seen.insert(v).second)
                        q.push_back(v);
            }
            if (!seen.count(t.listener))
                d.add("traffic." + std::to_string(i) + ".listener", "not reachable from the talker");
        }
    }
    return d.lines;
}

json read_json_file(const std::filesystem::path &path)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error &e) {
        throw ConfigInvalid({path.string() + ": " + e.what()});
    }
}

ScenarioConfig load_scenario(const std::filesystem::path &path) { return parse_scenario(read_json_file(path)); }

void set_dotted(json &doc, const std::string &dotted_key, json value)
{
    json *cur = &doc;
    std::stringstream ss(dotted_key);
    std::string part;
    std::vector<std::string> parts;
    while (std::getline(ss, part, '.'))
        parts.push_back(part);
    if (parts.empty())
        throw ConfigInvalid({dotted_key + ": empty parameter path"});
    for (std::size_t i = 0; i < parts.size(); ++i) {
        const bool last = i + 1 == parts.size();
        const auto &k = parts[i];
        if (cur->is_array()) {
            std::size_t idx = 0;
            try {
                std::size_t pos = 0;
                idx = std::stoul(k, &pos);
                if (pos != k.size())
                    throw std::invalid_argument(k);
            } catch (const std::exception &) {
                throw ConfigInvalid({dotted_key + ": \"" + k + "\" is not an array index"});
            }
            if (idx >= cur->size())
                throw ConfigInvalid({dotted_key + ": index " + k + " out of range"});
            cur = &(*cur)[idx];
        } else if (cur->is_object()) {
            if (!last && !cur->contains(k))
                (*cur)[k] = json::object();
            cur = &(*cur)[k];
        } else {
            throw ConfigInvalid({dotted_key + ": cannot descend into a " + std::string(cur->type_name())});
        }
        if (last)
            *cur = std::move(value);
    }
}

json parse_cli_value(const std::string &text)
{
    try {
        return json::parse(text);
    } catch (const json::parse_error &) {
        return json(text);
    }
}

} // namespace tsnsim
