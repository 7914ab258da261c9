#include "lmsim/errors.hpp"
#include "lmsim/log.hpp"
#include "lmsim/orchestrator.hpp"
#include "lmsim/scenario.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <string>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitRuntime = 3;

int guarded(const std::function<void()>& body) {
    try {
        body();
        return kExitOk;
    } catch (const lmsim::ParseError& e) {
        std::fprintf(stderr, "lmsim: parse error: %s\n", e.what());
        return kExitValidation;
    } catch (const lmsim::ValidationError& e) {
        std::fprintf(stderr, "lmsim: validation error: %s\n", e.what());
        return kExitValidation;
    } catch (const lmsim::Error& e) {
        std::fprintf(stderr, "lmsim: error: %s\n", e.what());
        return kExitRuntime;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "lmsim: unexpected error: %s\n", e.what());
        return kExitRuntime;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Scenario-driven last-mile delivery simulator"};
    app.require_subcommand(1);

    std::string scenario_path;
    std::string out_dir;
    std::string report_dir;
    std::string population_path;
    std::uint64_t seed = 0;
    int days = 0;
    bool freight_only = false;
    bool export_network = false;

    CLI::App* synth = app.add_subcommand("synth", "Synthesize the population only");
    synth->add_option("--scenario", scenario_path, "Scenario file")->required();
    synth->add_option("--out", out_dir, "Output directory")->required();

    CLI::App* run = app.add_subcommand("run", "Run a scenario end to end");
    run->add_option("--scenario", scenario_path, "Scenario file")->required();
    run->add_option("--out", out_dir, "Output directory")->required();
    CLI::Option* seed_opt = run->add_option("--seed", seed, "Override the scenario seed");
    CLI::Option* days_opt = run->add_option("--days", days, "Override the scenario day count");
    run->add_option("--population", population_path,
                    "Ingest a pre-built persons.csv instead of synthesizing");
    run->add_flag("--freight-only", freight_only,
                  "Disable the social layer and use fixed channel shares");
    run->add_flag("--export-network", export_network, "Write network.csv");

    CLI::App* report = app.add_subcommand("report", "Summarize a finished run directory");
    report->add_option("dir", report_dir, "Run directory")->required();

    CLI11_PARSE(app, argc, argv);

    if (synth->parsed()) {
        return guarded([&] {
            lmsim::ScenarioConfig config = lmsim::load_scenario(scenario_path);
            lmsim::synth_only(config, out_dir);
            std::printf("wrote %s/persons.csv and households.csv\n", out_dir.c_str());
        });
    }
    if (run->parsed()) {
        return guarded([&] {
            lmsim::ScenarioConfig config = lmsim::load_scenario(scenario_path);
            lmsim::RunOptions options;
            options.out_dir = out_dir;
            if (*seed_opt) {
                options.seed_override = seed;
            }
            if (*days_opt) {
                options.days_override = days;
            }
            if (!population_path.empty()) {
                options.population_override = population_path;
            }
            options.freight_only = freight_only;
            options.export_network = export_network;
            lmsim::RunResult result = lmsim::run_scenario(config, options);
            std::printf("run complete: %lld parcels created, %lld delivered, %lld failed\n",
                        result.parcels_created, result.parcels_delivered, result.parcels_failed);
        });
    }
    return guarded([&] {
        std::filesystem::path summary = lmsim::write_report(report_dir);
        std::printf("wrote %s\n", summary.string().c_str());
    });
}
