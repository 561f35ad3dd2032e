#include "tsnsim/stats.hpp"

#include <algorithm>
#include <cstdlib>
#include <map>

#include "tsnsim/errors.hpp"

namespace tsnsim {

const char *to_string(TimestampKind kind)
{
    switch (kind) {
    case TimestampKind::sw_tx: return "sw_tx";
    case TimestampKind::hw_tx: return "hw_tx";
    case TimestampKind::hw_rx: return "hw_rx";
    case TimestampKind::sw_rx: return "sw_rx";
    }
    return "?";
}

std::optional<TimestampKind> parse_timestamp_kind(std::string_view name)
{
    for (const auto k : kAllTimestampKinds)
        if (name == to_string(k))
            return k;
    return std::nullopt;
}

std::optional<SimTime> reading(const PacketRecord &rec, TimestampKind kind)
{
    switch (kind) {
    case TimestampKind::sw_tx: return rec.sw_tx;
    case TimestampKind::hw_tx: return rec.hw_tx;
    case TimestampKind::hw_rx: return rec.hw_rx;
    case TimestampKind::sw_rx: return rec.sw_rx;
    }
    return std::nullopt;
}

namespace {
std::vector<std::int64_t> offsets_impl(std::span<const PacketRecord> records, Duration period, TimestampKind kind,
                                       bool strict)
{
    if (records.empty())
        throw EmptyInput("no records");
    const PacketRecord &first = records.front();
    const Int128 base = static_cast<Int128>(first.intended_tx) - static_cast<Int128>(first.seq) * period;
    std::vector<std::int64_t> out;
    out.reserve(records.size());
    for (const auto &r : records) {
        const auto v = reading(r, kind);
        if (!v) {
            if (strict)
                throw MissingTimestamp("record " + std::to_string(r.seq) + " has no " + to_string(kind));
            continue;
        }
        const Int128 grid = base + static_cast<Int128>(r.seq) * period;
        out.push_back(static_cast<std::int64_t>(static_cast<Int128>(*v) - grid));
    }
    return out;
}
} // namespace

std::vector<std::int64_t> compute_offsets(std::span<const PacketRecord> records, Duration period_ns,
                                          TimestampKind kind)
{
    return offsets_impl(records, period_ns, kind, true);
}

std::vector<std::int64_t> present_offsets(std::span<const PacketRecord> records, Duration period_ns,
                                          TimestampKind kind)
{
    return offsets_impl(records, period_ns, kind, false);
}

OffsetStats offset_stats(std::span<const std::int64_t> offsets, Duration bin_width_ns)
{
    if (offsets.empty())
        throw EmptyInput("no offsets");
    if (bin_width_ns <= 0)
        throw Error("histogram bin width must be positive");
    OffsetStats s;
    s.count = offsets.size();
    s.bin_width_ns = bin_width_ns;

    std::vector<std::int64_t> sorted(offsets.begin(), offsets.end());
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    const std::size_t rank80 = (8 * n + 9) / 10; // ceil(0.8 n), 1-based
    s.min = sorted.front();
    s.max = sorted.back();
    s.median = sorted[(n - 1) / 2];
    s.p80 = sorted[rank80 - 1];

    std::vector<std::int64_t> mags(n);
    for (std::size_t i = 0; i < n; ++i)
        mags[i] = std::llabs(offsets[i]);
    std::sort(mags.begin(), mags.end());
    s.p80_radius = mags[rank80 - 1];
    s.max_abs = mags.back();

    // Sum exactly, divide once.
    Int128 sum = 0;
    for (const auto v : offsets)
        sum += v;
    s.mean = static_cast<double>(sum) / static_cast<double>(n);

    std::map<std::int64_t, std::uint64_t> bins;
    for (const auto v : offsets) {
        std::int64_t q = v / bin_width_ns;
        if (v % bin_width_ns != 0 && v < 0)
            --q;
        ++bins[q * bin_width_ns];
    }
    s.histogram.assign(bins.begin(), bins.end());
    return s;
}

nlohmann::json to_json(const OffsetStats &s, bool with_histogram)
{
    nlohmann::json j = {
        {"count", s.count}, {"min_ns", s.min},       {"max_ns", s.max},
        {"max_abs_ns", s.max_abs}, {"mean_ns", s.mean}, {"median_ns", s.median},
        {"p80_ns", s.p80}, {"p80_radius_ns", s.p80_radius}, {"histogram_bin_ns", s.bin_width_ns},
    };
    if (with_histogram) {
        auto h = nlohmann::json::array();
        for (const auto &[start, count] : s.histogram)
            h.push_back({start, count});
        j["histogram"] = h;
    }
    return j;
}

} // namespace tsnsim
