#include <future>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "tsnsim/errors.hpp"
#include "tsnsim/records_io.hpp"
#include "tsnsim/scenario.hpp"
#include "tsnsim/simulation.hpp"

namespace fs = std::filesystem;
using namespace tsnsim;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

void print_summary(const RunResult &r, const fs::path &out)
{
    const auto &m = r.measured();
    std::cout << "stream " << m.name << ": " << m.received << "/" << m.generated << " received";
    std::uint64_t drops = 0;
    for (const auto &[_, n] : r.drops)
        drops += n;
    std::cout << ", " << drops << " drops, seed " << r.metadata.seed << "\n";
    std::cout << "outputs in " << out.string() << "\n";
}

int cmd_run(const std::string &scenario, const std::string &out, std::optional<std::uint64_t> seed)
{
    const ScenarioConfig cfg = load_scenario(scenario);
    const RunResult r = run_scenario(cfg, seed);
    write_run_outputs(r, out);
    print_summary(r, out);
    return 0;
}

int cmd_report(const std::string &csv, std::optional<Duration> bin, std::optional<Duration> period,
               const std::string &out)
{
    const Report r = report(csv, bin, period);
    for (const auto &[kind, s] : r.stats)
        std::cout << to_string(kind) << ": " << to_json(s).dump() << "\n";
    if (!out.empty())
        write_report(r, out, nlohmann::json{{"source", csv}});
    return 0;
}

int cmd_sweep(const std::string &scenario, const std::string &param, const std::vector<std::string> &values,
              const std::string &out)
{
    const nlohmann::json base = read_json_file(scenario);
    std::vector<ScenarioConfig> configs;
    for (const auto &v : values) {
        nlohmann::json doc = base;
        set_dotted(doc, param, parse_cli_value(v));
        configs.push_back(parse_scenario(doc));
    }
    std::vector<std::future<RunResult>> runs;
    for (const auto &cfg : configs)
        runs.push_back(std::async(std::launch::async, [&cfg] { return run_scenario(cfg); }));
    for (std::size_t i = 0; i < runs.size(); ++i) {
        const RunResult r = runs[i].get();
        const fs::path dir = fs::path(out) / (param + "=" + values[i]);
        write_run_outputs(r, dir);
        std::cout << param << "=" << values[i] << ": ";
        print_summary(r, dir);
    }
    return 0;
}

int cmd_validate(const std::string &scenario)
{
    const ScenarioConfig cfg = load_scenario(scenario);
    std::cout << scenario << ": ok (" << cfg.nodes.size() << " nodes, " << cfg.links.size() << " links, "
              << cfg.traffic.size() << " streams)\n";
    return 0;
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"Discrete-event simulator for TSN data paths"};
    app.require_subcommand(1);

    std::string scenario;
    std::string out = "out";
    std::optional<std::uint64_t> seed;
    auto *run = app.add_subcommand("run", "Run a scenario and write records, stats and histograms");
    run->add_option("scenario", scenario, "Scenario JSON file")->required();
    run->add_option("--out", out, "Output directory")->required();
    run->add_option("--seed", seed, "Override the scenario seed");

    std::string csv;
    std::optional<Duration> bin;
    std::optional<Duration> period;
    std::string report_out;
    auto *rep = app.add_subcommand("report", "Summarise a records CSV");
    rep->add_option("csv", csv, "Records CSV")->required();
    rep->add_option("--bin-ns", bin, "Histogram bin width (default 100)")->check(CLI::PositiveNumber);
    rep->add_option("--period", period, "Packet period in ns (default: inferred)")->check(CLI::PositiveNumber);
    rep->add_option("--out", report_out, "Write stats.json and histograms here");

    std::string param;
    std::vector<std::string> values;
    std::string sweep_out = "sweep";
    auto *sweep = app.add_subcommand("sweep", "Run a scenario once per parameter value, concurrently");
    sweep->add_option("scenario", scenario, "Scenario JSON file")->required();
    sweep->add_option("--param", param, "Dotted key, e.g. traffic.0.period_ns")->required();
    sweep->add_option("--values", values, "Comma-separated values")->required()->delimiter(',');
    sweep->add_option("--out", sweep_out, "Output root");

    auto *validate = app.add_subcommand("validate", "Check a scenario file");
    validate->add_option("scenario", scenario, "Scenario JSON file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitConfig;
    }

    try {
        if (*run)
            return cmd_run(scenario, out, seed);
        if (*rep)
            return cmd_report(csv, bin, period, report_out);
        if (*sweep)
            return cmd_sweep(scenario, param, values, sweep_out);
        if (*validate)
            return cmd_validate(scenario);
    } catch (const ConfigInvalid &e) {
        std::cerr << e.what() << "\n";
        return kExitConfig;
    } catch (const MalformedRow &e) {
        std::cerr << "malformed row: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return 0;
}
