#pragma once

#include "lmsim/demand.hpp"
#include "lmsim/humat.hpp"
#include "lmsim/market.hpp"
#include "lmsim/popsynth.hpp"
#include "lmsim/scenario.hpp"
#include "lmsim/scheduling.hpp"
#include "lmsim/socnet.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace lmsim {

inline constexpr const char* kLmsimVersion = "0.1.0";

/// Module name -> version, recorded in every run manifest.
const std::map<std::string, std::string>& module_versions();

/// Reproducibility record, written once per run as manifest.json. The
/// checksums cover every emitted output file; the timing block is the
/// only environment-dependent content.
struct RunManifest {
    std::string scenario;
    std::uint64_t seed{0};
    int days{0};
    bool freight_only{false};
    std::map<std::string, std::string> versions;
    std::map<std::string, double> timings_s;
    std::map<std::string, std::string> file_checksums; // name -> sha256 hex
};

void write_manifest(const RunManifest& manifest, const std::filesystem::path& path);

struct RunOptions {
    std::filesystem::path out_dir;
    std::optional<std::uint64_t> seed_override;
    std::optional<int> days_override;
    std::optional<std::string> population_override; // persons.csv path
    bool freight_only{false};
    bool export_network{false};
};

/// Everything the execution phase needs, produced once per run.
struct SetupArtifacts {
    ScenarioConfig config;
    Population population;
    SocialNetwork network;
    std::vector<HumatAgent> agents; // empty in freight-only mode
    DiffusionSettings diffusion;
    std::vector<double> household_rates;   // expected parcels/day per household
    std::vector<std::string> demand_bands; // per person: household demand stratum label
    bool freight_only{false};
    SatisfactionKpi initial_kpis;    // pre-diffusion snapshot
    SatisfactionKpi calibrated_kpis; // after the setup diffusion
    DiffusionOutcome setup_diffusion;
};

/// Per-day tallies kept for conservation checks and tests.
struct DayLedger {
    int day{0};
    long long created{0};
    long long carrier_assigned{0};
    long long channel_assigned{0};
    long long delivered{0};
    long long failed{0};
    std::vector<double> post_diffusion_shares; // per catalog channel; empty in freight-only
};

struct RunResult {
    std::filesystem::path out_dir;
    std::vector<DayLedger> days;
    long long parcels_created{0};
    long long parcels_delivered{0};
    long long parcels_failed{0};
    /// Output file name -> content; written to out_dir only after the
    /// whole run succeeds, so failures leave no partial KPI files.
    std::map<std::string, std::string> files;
};

/// Setup phase: synthesize or ingest the population, calibrate expected
/// demand, build the social network, initialize agents, run the setup
/// diffusion, and snapshot the satisfaction KPIs.
SetupArtifacts setup_phase(const ScenarioConfig& config, const RunOptions& options,
                           RandomStream& root);

/// Execution phase: per simulated day, demand generation, carrier
/// allocation, channel split, crowdshipping matching and locker
/// assignment, tour building, delivery simulation, experience feedback,
/// and one diffusion round. Writes all per-day and aggregate output files.
RunResult execute_phase(SetupArtifacts& setup, int day_count, RandomStream& root,
                        const std::filesystem::path& out_dir);

/// Full run: setup, execution, KPI emission, and manifest with checksums.
RunResult run_scenario(const ScenarioConfig& config, const RunOptions& options);

/// Population synthesis only; writes persons.csv and households.csv.
void synth_only(const ScenarioConfig& config, const std::filesystem::path& out_dir);

/// Joins the run's KPI files into summary.json. Numeric fields copied
/// from the CSVs are byte-identical to their source tokens. Throws
/// MissingArtifact when the directory has no manifest.
std::filesystem::path write_report(const std::filesystem::path& run_dir);

} // namespace lmsim
