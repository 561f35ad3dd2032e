#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "tsnsim/scenario.hpp"
#include "tsnsim/simulation.hpp"
#include "tsnsim/stats.hpp"

namespace tsnsim {

inline constexpr const char *kRecordsHeader = "seq,intended_tx_ns,sw_tx_ns,hw_tx_ns,hw_rx_ns,sw_rx_ns";

void write_records(std::ostream &out, std::span<const PacketRecord> records);

/// Throws IoError if the file cannot be written.
void export_records(std::span<const PacketRecord> records, const std::filesystem::path &path);

/// Throws MalformedRow (1-based line numbers, header is line 1).
std::vector<PacketRecord> parse_records(std::istream &in);

/// Throws IoError if the file cannot be read.
std::vector<PacketRecord> read_records(const std::filesystem::path &path);

/// Period implied by the intended times. Throws EmptyInput with fewer than
/// two records, Error if the intended times are not on a regular grid.
Duration infer_period(std::span<const PacketRecord> records);

struct Report
{
    Duration period_ns = 0;
    Duration bin_width_ns = 100;
    std::size_t records = 0;
    std::map<TimestampKind, OffsetStats> stats; // kinds with at least one reading
};

Report make_report(std::span<const PacketRecord> records, Duration period_ns, Duration bin_width_ns);

/// Reads the CSV and summarises every timestamp kind. Period is inferred
/// when not given.
Report report(const std::filesystem::path &csv, std::optional<Duration> bin_width_ns = std::nullopt,
              std::optional<Duration> period_ns = std::nullopt);

/// stats.json and histogram_<kind>.tsv for a report.
void write_report(const Report &r, const std::filesystem::path &dir, const nlohmann::json &extra = {});

/// All outputs of a run: records.csv for the measured stream,
/// records_<stream>.csv for the others, stats.json and histograms.
void write_run_outputs(const RunResult &result, const std::filesystem::path &dir);

nlohmann::json run_summary(const RunResult &result);

} // namespace tsnsim
