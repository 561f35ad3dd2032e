#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

#include "tsnsim/simulation.hpp"

namespace tsnsim {

enum class TimestampKind
{
    sw_tx,
    hw_tx,
    hw_rx,
    sw_rx,
};

inline constexpr std::array kAllTimestampKinds{TimestampKind::sw_tx, TimestampKind::hw_tx, TimestampKind::hw_rx,
                                               TimestampKind::sw_rx};

const char *to_string(TimestampKind kind);
std::optional<TimestampKind> parse_timestamp_kind(std::string_view name);
std::optional<SimTime> reading(const PacketRecord &rec, TimestampKind kind);

/// offset_k = reading_k - (base + seq_k * period), with base taken from the
/// first record: intended_tx - seq * period. Throws EmptyInput on no records
/// and MissingTimestamp if any record lacks the kind.
std::vector<std::int64_t> compute_offsets(std::span<const PacketRecord> records, Duration period_ns,
                                          TimestampKind kind);

/// Same, over only the records that carry the kind (lost packets skipped).
std::vector<std::int64_t> present_offsets(std::span<const PacketRecord> records, Duration period_ns,
                                          TimestampKind kind);

struct OffsetStats
{
    std::size_t count = 0;
    std::int64_t min = 0;
    std::int64_t max = 0;
    std::int64_t max_abs = 0;
    double mean = 0.0;
    std::int64_t median = 0;     // lower median of the signed offsets
    std::int64_t p80 = 0;        // nearest-rank 80th percentile of the signed offsets
    std::int64_t p80_radius = 0; // nearest-rank 80th percentile of |offset|
    Duration bin_width_ns = 100;
    std::vector<std::pair<std::int64_t, std::uint64_t>> histogram; // (bin start, count), non-empty bins

    bool operator==(const OffsetStats &) const = default;
};

/// Throws EmptyInput on an empty list.
OffsetStats offset_stats(std::span<const std::int64_t> offsets, Duration bin_width_ns = 100);

nlohmann::json to_json(const OffsetStats &s, bool with_histogram = false);

} // namespace tsnsim
