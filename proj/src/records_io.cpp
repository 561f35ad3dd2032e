#include "tsnsim/records_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>

#include "tsnsim/errors.hpp"

namespace tsnsim {

namespace fs = std::filesystem;

namespace {

void put(std::ostream &out, const std::optional<SimTime> &v)
{
    out << ',';
    if (v)
        out << *v;
}

std::optional<std::uint64_t> parse_u64(std::string_view s)
{
    std::uint64_t v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size() || s.empty())
        return std::nullopt;
    return v;
}

std::ofstream open_out(const fs::path &path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot write " + path.string());
    return out;
}

} // namespace

void write_records(std::ostream &out, std::span<const PacketRecord> records)
{
    out << kRecordsHeader << '\n';
    for (const auto &r : records) {
        out << r.seq << ',' << r.intended_tx;
        put(out, r.sw_tx);
        put(out, r.hw_tx);
        put(out, r.hw_rx);
        put(out, r.sw_rx);
        out << '\n';
    }
}

void export_records(std::span<const PacketRecord> records, const fs::path &path)
{
    auto out = open_out(path);
    write_records(out, records);
    if (!out)
        throw IoError("write failed: " + path.string());
}

std::vector<PacketRecord> parse_records(std::istream &in)
{
    std::vector<PacketRecord> out;
    std::string line;
    std::size_t lineno = 0;
    bool header = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (!header) {
            if (line != kRecordsHeader)
                throw MalformedRow(lineno, std::string("expected header \"") + kRecordsHeader + "\"");
            header = true;
            continue;
        }
        if (line.empty())
            continue;
        std::vector<std::string_view> fields;
        std::string_view rest(line);
        while (true) {
            const auto comma = rest.find(',');
            fields.push_back(rest.substr(0, comma));
            if (comma == std::string_view::npos)
                break;
            rest.remove_prefix(comma + 1);
        }
        if (fields.size() != 6)
            throw MalformedRow(lineno, "expected 6 fields, got " + std::to_string(fields.size()));
        PacketRecord r;
        const auto seq = parse_u64(fields[0]);
        const auto intended = parse_u64(fields[1]);
        if (!seq)
            throw MalformedRow(lineno, "seq is not an unsigned integer");
        if (!intended)
            throw MalformedRow(lineno, "intended_tx_ns is not an unsigned integer");
        r.seq = *seq;
        r.intended_tx = *intended;
        std::optional<SimTime> *slots[] = {&r.sw_tx, &r.hw_tx, &r.hw_rx, &r.sw_rx};
        static constexpr const char *names[] = {"sw_tx_ns", "hw_tx_ns", "hw_rx_ns", "sw_rx_ns"};
        for (int i = 0; i < 4; ++i) {
            const auto f = fields[static_cast<std::size_t>(i) + 2];
            if (f.empty())
                continue;
            const auto v = parse_u64(f);
            if (!v)
                throw MalformedRow(lineno, std::string(names[i]) + " is not an unsigned integer");
            *slots[i] = *v;
        }
        out.push_back(r);
    }
    if (!header)
        throw MalformedRow(1, "missing header");
    return out;
}

std::vector<PacketRecord> read_records(const fs::path &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open " + path.string());
    return parse_records(in);
}

Duration infer_period(std::span<const PacketRecord> records)
{
    if (records.size() < 2)
        throw EmptyInput("need at least two records to infer the period");
    const auto &a = records[0];
    const auto &b = records[1];
    if (b.seq <= a.seq || b.intended_tx <= a.intended_tx)
        throw Error("records are not in increasing seq order");
    const auto dseq = static_cast<Duration>(b.seq - a.seq);
    const auto dt = static_cast<Duration>(b.intended_tx - a.intended_tx);
    if (dt % dseq != 0)
        throw Error("intended times are not on a regular grid");
    const Duration period = dt / dseq;
    for (const auto &r : records)
        if (static_cast<Int128>(r.intended_tx) - a.intended_tx !=
            (static_cast<Int128>(r.seq) - static_cast<Int128>(a.seq)) * period)
            throw Error("record " + std::to_string(r.seq) + " is off the intended grid");
    return period;
}

Report make_report(std::span<const PacketRecord> records, Duration period_ns, Duration bin_width_ns)
{
    Report r;
    r.period_ns = period_ns;
    r.bin_width_ns = bin_width_ns;
    r.records = records.size();
    for (const auto kind : kAllTimestampKinds) {
        const auto offs = present_offsets(records, period_ns, kind);
        if (!offs.empty())
            r.stats.emplace(kind, offset_stats(offs, bin_width_ns));
    }
    return r;
}

Report report(const fs::path &csv, std::optional<Duration> bin_width_ns, std::optional<Duration> period_ns)
{
    const auto records = read_records(csv);
    if (records.empty())
        throw EmptyInput(csv.string() + " has no records");
    const Duration period = period_ns ? *period_ns : infer_period(records);
    return make_report(records, period, bin_width_ns.value_or(100));
}

void write_report(const Report &r, const fs::path &dir, const nlohmann::json &extra)
{
    fs::create_directories(dir);
    nlohmann::json j = extra.is_object() ? extra : nlohmann::json::object();
    j["period_ns"] = r.period_ns;
    j["records"] = r.records;
    j["histogram_bin_ns"] = r.bin_width_ns;
    nlohmann::json stats = nlohmann::json::object();
    for (const auto &[kind, s] : r.stats) {
        stats[to_string(kind)] = to_json(s);
        auto out = open_out(dir / (std::string("histogram_") + to_string(kind) + ".tsv"));
        out << "bin_start_ns\tcount\n";
        for (const auto &[start, count] : s.histogram)
            out << start << '\t' << count << '\n';
    }
    j["stats"] = stats;
    auto out = open_out(dir / "stats.json");
    out << j.dump(2) << '\n';
    if (!out)
        throw IoError("write failed: " + (dir / "stats.json").string());
}

nlohmann::json run_summary(const RunResult &result)
{
    const auto &md = result.metadata;
    nlohmann::json meta = {
        {"seed", md.seed},
        {"rng_algorithm", md.rng_algorithm},
        {"measured_stream", md.measured_stream},
        {"histogram_bin_ns", md.histogram_bin_ns},
        {"t_end_ns", md.t_end},
        {"events", md.events},
    };
    if (md.cqf_bound_ns) {
        meta["cqf_hops"] = *md.cqf_hops;
        meta["cqf_bound_ns"] = *md.cqf_bound_ns;
    }
    nlohmann::json streams = nlohmann::json::object();
    for (const auto &[name, s] : result.streams)
        streams[name] = {{"generated", s.generated},
                         {"received", s.received},
                         {"duplicates", s.duplicates},
                         {"lost", s.generated - s.received},
                         {"period_ns", s.period_ns}};
    return {{"metadata", meta},
            {"streams", streams},
            {"drops", result.drops},
            {"drop_sites", result.drop_sites},
            {"counters", result.counters}};
}

void write_run_outputs(const RunResult &result, const fs::path &dir)
{
    fs::create_directories(dir);
    const StreamResult &m = result.measured();
    for (const auto &[name, s] : result.streams) {
        const auto file = name == m.name ? fs::path("records.csv") : fs::path("records_" + name + ".csv");
        export_records(s.records, dir / file);
    }
    const Report r = make_report(m.records, m.period_ns, result.metadata.histogram_bin_ns);
    write_report(r, dir, run_summary(result));
}

} // namespace tsnsim
