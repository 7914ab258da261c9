#include "lmsim/orchestrator.hpp"

#include "lmsim/csv.hpp"
#include "lmsim/errors.hpp"
#include "lmsim/json_writer.hpp"
#include "lmsim/log.hpp"
#include "lmsim/util.hpp"

#include <algorithm>
#include <chrono>
#include <map>

namespace lmsim {

const std::map<std::string, std::string>& module_versions() {
    static const std::map<std::string, std::string> versions = {
        {"scenario-core", "0.1.0"}, {"popsynth", "0.1.0"},  {"socnet", "0.1.0"},
        {"humat", "0.1.0"},         {"parcel-demand", "0.1.0"}, {"parcel-market", "0.1.0"},
        {"parcel-scheduling", "0.1.0"}, {"orchestrator", "0.1.0"},
    };
    return versions;
}

void write_manifest(const RunManifest& manifest, const std::filesystem::path& path) {
    JsonWriter out;
    out.begin_object();
    out.key("scenario").value(manifest.scenario);
    out.key("seed").value(manifest.seed);
    out.key("days").value(static_cast<long long>(manifest.days));
    out.key("freight_only").value(manifest.freight_only);
    out.key("versions").begin_object();
    for (const auto& [module, version] : manifest.versions) {
        out.key(module).value(version);
    }
    out.end_object();
    out.key("timings_s").begin_object();
    for (const auto& [phase, seconds] : manifest.timings_s) {
        out.key(phase).value(seconds);
    }
    out.end_object();
    out.key("files").begin_object();
    for (const auto& [name, checksum] : manifest.file_checksums) {
        out.key(name).value(checksum);
    }
    out.end_object();
    out.end_object();
    write_text_file(path, out.str());
}

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::vector<std::string> kpi_groupings(const ScenarioConfig& config, bool with_demand_band) {
    std::vector<std::string> groupings = {"all"};
    for (const Attribute& a : config.schema.attributes) {
        groupings.push_back(a.name);
    }
    if (with_demand_band) {
        groupings.push_back("demand_band");
    }
    return groupings;
}

SatisfactionKpi kpi_snapshot(const SetupArtifacts& setup) {
    SatisfactionKpi kpi;
    const ScenarioConfig& config = setup.config;
    for (const std::string& grouping : kpi_groupings(config, !setup.demand_bands.empty())) {
        SatisfactionKpi part;
        if (grouping == "demand_band") {
            std::vector<std::string> labels;
            labels.reserve(setup.agents.size());
            for (const HumatAgent& agent : setup.agents) {
                labels.push_back(setup.demand_bands[static_cast<std::size_t>(agent.person)]);
            }
            part = choice_shares_by_labels(setup.agents, labels, grouping,
                                           config.channel_catalog);
        } else {
            part = choice_shares(setup.agents, setup.population.persons, config.schema,
                                 config.channel_catalog, grouping);
        }
        kpi.rows.insert(kpi.rows.end(), part.rows.begin(), part.rows.end());
    }
    return kpi;
}

std::string kpi_to_csv(const SatisfactionKpi& kpi) {
    std::string out = csv_line(
        {"grouping", "category", "alternative", "agents", "share", "mean_satisfaction"});
    for (const KpiRow& row : kpi.rows) {
        out += csv_line({row.grouping, row.category, row.alternative, std::to_string(row.agents),
                         format_double(row.share), format_double(row.mean_satisfaction)});
    }
    return out;
}

std::vector<double> channel_shares(std::span<const HumatAgent> agents, std::size_t alt_count) {
    std::vector<double> shares(alt_count, 0.0);
    if (agents.empty()) {
        return shares;
    }
    for (const HumatAgent& agent : agents) {
        shares[static_cast<std::size_t>(agent.choice)] += 1.0;
    }
    for (double& s : shares) {
        s /= static_cast<double>(agents.size());
    }
    return shares;
}

} // namespace

// ---------------------------------------------------------------------------
// Setup phase
// ---------------------------------------------------------------------------

SetupArtifacts setup_phase(const ScenarioConfig& config, const RunOptions& options,
                           RandomStream& root) {
    SetupArtifacts setup;
    setup.config = config;
    setup.freight_only = options.freight_only;

    // Population synthesizer (or ingestion of a pre-built population).
    try {
        if (options.population_override) {
            setup.population = load_population(*options.population_override, config);
        } else if (config.population_file) {
            setup.population = load_population(config.base_dir / *config.population_file, config);
        } else {
            RandomStream rng = root.derive("popsynth");
            setup.population = synthesize_population(config, rng);
        }
    } catch (const Error&) {
        log_error("setup phase failed in module popsynth");
        throw;
    }

    // Expected household demand, used for KPI stratification and the
    // setup demand report.
    setup.household_rates.reserve(setup.population.households.size());
    double rate_sum = 0.0;
    for (const HouseholdRecord& hh : setup.population.households) {
        double rate = household_demand_rate(hh, setup.population, config);
        setup.household_rates.push_back(rate);
        rate_sum += rate;
    }
    double mean_rate = setup.population.households.empty()
                           ? 0.0
                           : rate_sum / static_cast<double>(setup.population.households.size());
    setup.demand_bands.reserve(setup.population.persons.size());
    for (const PersonRecord& p : setup.population.persons) {
        double rate = setup.household_rates[static_cast<std::size_t>(p.household)];
        setup.demand_bands.push_back(rate < mean_rate ? "low_demand" : "high_demand");
    }

    if (setup.freight_only) {
        return setup;
    }
    if (config.motives.motives.empty()) {
        throw ValidationError("files.motives",
                              "scenario has no motives; run with --freight-only instead");
    }

    try {
        RandomStream rng = root.derive("network");
        setup.network = build_network(setup.population.persons, config, rng);
    } catch (const Error&) {
        log_error("setup phase failed in module socnet");
        throw;
    }

    try {
        RandomStream rng = root.derive("humat.init");
        setup.agents = init_agents(setup.population.persons, config.schema, config.motives,
                                   config.priors, config.channel_catalog, rng);
    } catch (const Error&) {
        log_error("setup phase failed in module humat");
        throw;
    }
    setup.diffusion = diffusion_settings(config);

    setup.initial_kpis = kpi_snapshot(setup);

    // Pre-simulation preference calibration.
    RandomStream diffusion_rng = root.derive("setup.diffusion");
    setup.setup_diffusion =
        run_diffusion(setup.agents, setup.network, setup.diffusion,
                      config.channel_catalog.size(), config.humat.setup_max_rounds, diffusion_rng);
    log_info("setup diffusion: " + std::to_string(setup.setup_diffusion.rounds_run) + " rounds, " +
             (setup.setup_diffusion.converged ? "converged" : "round cap reached"));

    setup.calibrated_kpis = kpi_snapshot(setup);
    return setup;
}

// ---------------------------------------------------------------------------
// Execution phase
// ---------------------------------------------------------------------------

namespace {

struct ExecuteOutputs {
    std::string parcels_csv;
    std::string assignments_csv;
    std::string tours_csv;
    std::string market_csv;
    std::string daily_shares_csv;
    std::vector<Parcel> all_parcels;
    std::vector<SchedulingDayKpis> scheduling;
};

void append_tour_rows(std::string& out, const Tour& tour, const ScenarioConfig& config) {
    for (std::size_t s = 0; s < tour.stops.size(); ++s) {
        const TourStop& stop = tour.stops[s];
        std::vector<std::string> ids;
        ids.reserve(stop.parcel_ids.size());
        for (int id : stop.parcel_ids) {
            ids.push_back(std::to_string(id));
        }
        out += csv_line({std::to_string(tour.id),
                         config.carriers[static_cast<std::size_t>(tour.carrier)].carrier_id,
                         std::to_string(tour.day), std::to_string(s + 1),
                         config.zones[static_cast<std::size_t>(stop.zone)].zone_id,
                         join(ids, ';'), format_double(tour.leg_km[s])});
    }
    // Closing leg back to the depot.
    out += csv_line({std::to_string(tour.id),
                     config.carriers[static_cast<std::size_t>(tour.carrier)].carrier_id,
                     std::to_string(tour.day), std::to_string(tour.stops.size() + 1),
                     config.carriers[static_cast<std::size_t>(tour.carrier)].depot_zone, "",
                     format_double(tour.leg_km.back())});
}

} // namespace

RunResult execute_phase(SetupArtifacts& setup, int day_count, RandomStream& root,
                        const std::filesystem::path& out_dir) {
    const ScenarioConfig& config = setup.config;
    RunResult result;
    result.out_dir = out_dir;

    ExecuteOutputs out;
    out.parcels_csv =
        csv_line({"parcel_id", "day", "household", "zone", "carrier", "channel", "status"});
    out.assignments_csv = csv_line({"parcel_id", "channel", "detail", "fallback"});
    out.tours_csv =
        csv_line({"tour_id", "carrier", "day", "stop_seq", "zone", "parcels", "leg_km"});
    out.market_csv = csv_line({"day", "channel", "tagged", "fulfilled", "fallbacks",
                               "crowdship_detour_km", "locker_utilization",
                               "locker_capacity_available"});
    out.daily_shares_csv = csv_line({"day", "alternative", "share"});

    std::size_t alt_count = config.channel_catalog.size();
    std::size_t home = *config.channel_index(kChannelHomeCourier);
    bool has_crowdshipping = config.channel_index(kChannelCrowdshipping).has_value();
    int next_parcel_id = 1;
    int next_tour_id = 1;

    for (int day = 1; day <= day_count; ++day) {
        RandomStream day_rng = root.derive("day." + std::to_string(day));
        DayLedger ledger;
        ledger.day = day;

        // Demand and carrier allocation.
        RandomStream demand_rng = day_rng.derive("demand");
        std::vector<Parcel> parcels =
            generate_demand(setup.population, config, day, demand_rng, next_parcel_id);
        ledger.created = static_cast<long long>(parcels.size());

        RandomStream allocate_rng = day_rng.derive("allocate");
        allocate_carriers(parcels, config.carriers, config.demand.success_in_allocation,
                          allocate_rng);
        ledger.carrier_assigned = static_cast<long long>(parcels.size());

        // Channel preferences.
        RandomStream split_rng = day_rng.derive("split");
        channel_split(parcels, setup.population, setup.agents, config, setup.freight_only,
                      split_rng);

        // Market: crowdshipping matching and locker assignment.
        LockerDayState locker_state = init_locker_day(config.lockers, day);

        std::vector<CrowdshipperTrip> trips;
        if (has_crowdshipping) {
            RandomStream trips_rng = day_rng.derive("trips");
            trips = generate_crowdshipper_trips(setup.population, config, day, trips_rng);
        }

        std::vector<Parcel> crowd_tagged;
        std::vector<Parcel> locker_tagged;
        for (const Parcel& p : parcels) {
            const std::string& channel = config.channel_catalog[static_cast<std::size_t>(p.channel)];
            if (channel == kChannelCrowdshipping) {
                crowd_tagged.push_back(p);
            } else if (channel == kChannelParcelLocker) {
                locker_tagged.push_back(p);
            }
        }

        std::map<int, ChannelAssignment> assignment_by_parcel;
        MatchResult match = match_crowdshipping(crowd_tagged, trips, config);
        for (const ChannelAssignment& a : match.matched) {
            assignment_by_parcel[a.parcel] = a;
        }
        LockerAssignResult lockers = assign_lockers(locker_tagged, locker_state, config, day);
        for (const ChannelAssignment& a : lockers.assigned) {
            assignment_by_parcel[a.parcel] = a;
        }
        for (int id : match.unmatched) {
            ChannelAssignment a;
            a.parcel = id;
            a.channel = static_cast<int>(home);
            a.preferred = static_cast<int>(*config.channel_index(kChannelCrowdshipping));
            a.fallback = true;
            assignment_by_parcel[id] = a;
        }
        for (int id : lockers.unassigned) {
            ChannelAssignment a;
            a.parcel = id;
            a.channel = static_cast<int>(home);
            a.preferred = static_cast<int>(*config.channel_index(kChannelParcelLocker));
            a.fallback = true;
            assignment_by_parcel[id] = a;
        }
        for (const Parcel& p : parcels) {
            if (assignment_by_parcel.contains(p.id)) {
                continue;
            }
            ChannelAssignment a;
            a.parcel = p.id;
            a.channel = static_cast<int>(home);
            a.preferred = p.channel;
            assignment_by_parcel[p.id] = a;
        }

        // Finalize parcel channels; fallback parcels reroute to courier.
        for (Parcel& p : parcels) {
            const ChannelAssignment& a = assignment_by_parcel.at(p.id);
            p.channel = a.channel;
            p.fallback = a.fallback;
        }
        ledger.channel_assigned = static_cast<long long>(assignment_by_parcel.size());
        if (ledger.channel_assigned != ledger.created) {
            throw Error("channel conservation violated on day " + std::to_string(day));
        }

        // Matched and locker-assigned parcels pass through scheduled and
        // always arrive; courier parcels go through tours.
        for (Parcel& p : parcels) {
            const std::string& channel = config.channel_catalog[static_cast<std::size_t>(p.channel)];
            if (channel != kChannelHomeCourier) {
                p.status = ParcelStatus::delivered;
            }
        }

        std::vector<Parcel> courier;
        for (const Parcel& p : parcels) {
            if (static_cast<std::size_t>(p.channel) == home) {
                courier.push_back(p);
            }
        }
        std::vector<Tour> tours = build_tours(courier, config, day, next_tour_id);
        RandomStream delivery_rng = day_rng.derive("delivery");
        simulate_delivery(tours, courier, config, delivery_rng);
        {
            std::map<int, ParcelStatus> courier_status;
            for (const Parcel& p : courier) {
                courier_status[p.id] = p.status;
            }
            for (Parcel& p : parcels) {
                auto it = courier_status.find(p.id);
                if (it != courier_status.end()) {
                    p.status = it->second;
                }
            }
        }

        // Delivery outcomes feed the agents' experiential evaluations.
        std::vector<DeliveryOutcome> outcomes;
        outcomes.reserve(parcels.size());
        for (const Parcel& p : parcels) {
            const ChannelAssignment& a = assignment_by_parcel.at(p.id);
            DeliveryOutcome o;
            o.parcel = p.id;
            o.household = p.household;
            o.channel = p.channel;
            o.success = p.status == ParcelStatus::delivered;
            o.locker_distance_km = a.locker_distance_km;
            outcomes.push_back(o);
            if (p.status == ParcelStatus::delivered) {
                ++ledger.delivered;
            } else if (p.status == ParcelStatus::failed) {
                ++ledger.failed;
            }
        }
        if (ledger.delivered + ledger.failed != ledger.created) {
            throw Error("parcel conservation violated on day " + std::to_string(day));
        }

        if (!setup.freight_only) {
            for (const DeliveryOutcome& o : outcomes) {
                const HouseholdRecord& hh =
                    setup.population.households[static_cast<std::size_t>(o.household)];
                HumatAgent& dm = setup.agents[static_cast<std::size_t>(hh.decision_maker())];
                apply_experience(dm, o, config.motives, alt_count, config.humat.experience_eta,
                                 config.locker_params.walk_max_km);
            }
            RandomStream diffusion_rng = day_rng.derive("diffusion");
            diffusion_round(setup.agents, setup.network, setup.diffusion, alt_count,
                            diffusion_rng);
            ledger.post_diffusion_shares = channel_shares(setup.agents, alt_count);
            for (std::size_t a = 0; a < alt_count; ++a) {
                out.daily_shares_csv +=
                    csv_line({std::to_string(day), config.channel_catalog[a],
                              format_double(ledger.post_diffusion_shares[a])});
            }
        }

        // Emit per-day rows.
        for (const Parcel& p : parcels) {
            out.parcels_csv += csv_line(
                {std::to_string(p.id), std::to_string(p.day),
                 setup.population.households[static_cast<std::size_t>(p.household)].household_id,
                 config.zones[static_cast<std::size_t>(p.zone)].zone_id,
                 config.carriers[static_cast<std::size_t>(p.carrier)].carrier_id,
                 config.channel_catalog[static_cast<std::size_t>(p.channel)],
                 to_string(p.status)});
        }
        for (const Parcel& p : parcels) {
            const ChannelAssignment& a = assignment_by_parcel.at(p.id);
            std::string detail = "none";
            if (a.trip >= 0) {
                detail = std::to_string(a.trip);
            } else if (a.locker >= 0) {
                detail = config.lockers[static_cast<std::size_t>(a.locker)].locker_id;
            }
            out.assignments_csv += csv_line(
                {std::to_string(p.id), config.channel_catalog[static_cast<std::size_t>(a.channel)],
                 detail, a.fallback ? "true" : "false"});
        }
        for (const Tour& tour : tours) {
            append_tour_rows(out.tours_csv, tour, config);
        }

        std::vector<ChannelAssignment> day_assignments;
        day_assignments.reserve(assignment_by_parcel.size());
        for (const auto& [id, a] : assignment_by_parcel) {
            day_assignments.push_back(a);
        }
        MarketDayKpis market = market_kpis(day_assignments, locker_state, config.lockers, config,
                                           day);
        for (std::size_t c = 0; c < alt_count; ++c) {
            out.market_csv += csv_line(
                {std::to_string(day), config.channel_catalog[c], std::to_string(market.tagged[c]),
                 std::to_string(market.fulfilled[c]), std::to_string(market.fallbacks[c]),
                 format_double(market.crowdship_detour_km),
                 format_double(market.locker_utilization),
                 std::to_string(market.locker_capacity_available)});
        }

        std::vector<SchedulingDayKpis> sched = scheduling_kpis(tours, courier);
        out.scheduling.insert(out.scheduling.end(), sched.begin(), sched.end());

        out.all_parcels.insert(out.all_parcels.end(), parcels.begin(), parcels.end());
        result.parcels_created += ledger.created;
        result.parcels_delivered += ledger.delivered;
        result.parcels_failed += ledger.failed;
        result.days.push_back(std::move(ledger));
        log_debug("day " + std::to_string(day) + ": " + std::to_string(parcels.size()) +
                  " parcels");
    }

    // Aggregate KPI files.
    DemandKpis demand = demand_kpis(out.all_parcels);
    std::string demand_csv = csv_line({"day", "zone", "carrier", "parcels"});
    for (const auto& [key, count] : demand.counts) {
        auto [day, zone, carrier] = key;
        demand_csv += csv_line({std::to_string(day),
                                config.zones[static_cast<std::size_t>(zone)].zone_id,
                                config.carriers[static_cast<std::size_t>(carrier)].carrier_id,
                                std::to_string(count)});
    }

    std::string sched_csv = csv_line(
        {"day", "carrier", "tour_count", "total_km", "mean_parcels_per_tour", "failed"});
    for (const SchedulingDayKpis& k : out.scheduling) {
        sched_csv += csv_line({std::to_string(k.day),
                               config.carriers[static_cast<std::size_t>(k.carrier)].carrier_id,
                               std::to_string(k.tour_count), format_double(k.total_km),
                               format_double(k.mean_parcels_per_tour), std::to_string(k.failed)});
    }

    result.files["parcels.csv"] = std::move(out.parcels_csv);
    result.files["assignments.csv"] = std::move(out.assignments_csv);
    result.files["tours.csv"] = std::move(out.tours_csv);
    result.files["demand_kpis.csv"] = std::move(demand_csv);
    result.files["market_kpis.csv"] = std::move(out.market_csv);
    result.files["scheduling_kpis.csv"] = std::move(sched_csv);
    if (!setup.freight_only) {
        result.files["humat_daily_shares.csv"] = std::move(out.daily_shares_csv);
        result.files["humat_kpis.csv"] = kpi_to_csv(kpi_snapshot(setup));
    }
    return result;
}

// ---------------------------------------------------------------------------
// Full run
// ---------------------------------------------------------------------------

RunResult run_scenario(const ScenarioConfig& config, const RunOptions& options) {
    validate_scenario(config);

    std::uint64_t seed = options.seed_override.value_or(config.seed);
    int day_count = options.days_override.value_or(config.day_count);
    if (day_count < 0) {
        throw ValidationError("days", "must be >= 0");
    }

    std::filesystem::create_directories(options.out_dir);
    auto t_start = std::chrono::steady_clock::now();

    RandomStream root(seed, "lmsim");
    SetupArtifacts setup = setup_phase(config, options, root);
    double setup_seconds = seconds_since(t_start);

    auto t_execute = std::chrono::steady_clock::now();
    RunResult result = execute_phase(setup, day_count, root, options.out_dir);
    double execute_seconds = seconds_since(t_execute);

    // Setup-phase outputs.
    {
        std::filesystem::path persons_path = options.out_dir / "persons.csv";
        std::filesystem::path households_path = options.out_dir / "households.csv";
        write_population_csv(setup.population, config, persons_path, households_path);
        result.files["persons.csv"] = read_text_file(persons_path);
        result.files["households.csv"] = read_text_file(households_path);
    }
    {
        std::string csv = csv_line({"zone", "households", "expected_parcels_per_day"});
        std::map<int, std::pair<long long, double>> per_zone;
        for (std::size_t h = 0; h < setup.population.households.size(); ++h) {
            auto& acc = per_zone[setup.population.households[h].zone];
            acc.first += 1;
            acc.second += setup.household_rates[h];
        }
        for (const auto& [zone, acc] : per_zone) {
            csv += csv_line({config.zones[static_cast<std::size_t>(zone)].zone_id,
                             std::to_string(acc.first), format_double(acc.second)});
        }
        result.files["demand_setup_kpis.csv"] = std::move(csv);
    }
    if (!setup.freight_only) {
        result.files["humat_kpis_initial.csv"] = kpi_to_csv(setup.initial_kpis);
        result.files["humat_kpis_calibrated.csv"] = kpi_to_csv(setup.calibrated_kpis);
    }
    if (options.export_network && !setup.freight_only) {
        std::filesystem::path network_path = options.out_dir / "network.csv";
        write_network_csv(setup.network, setup.population.persons, network_path);
        result.files["network.csv"] = read_text_file(network_path);
    }

    // All outputs land on disk together once the run has fully succeeded.
    for (const auto& [name, content] : result.files) {
        write_text_file(options.out_dir / name, content);
    }

    // Manifest with checksums of everything written above.
    RunManifest manifest;
    manifest.scenario = config.name;
    manifest.seed = seed;
    manifest.days = day_count;
    manifest.freight_only = setup.freight_only;
    manifest.versions["lmsim"] = kLmsimVersion;
    for (const auto& [module, version] : module_versions()) {
        manifest.versions[module] = version;
    }
    manifest.timings_s["setup"] = setup_seconds;
    manifest.timings_s["execute"] = execute_seconds;
    manifest.timings_s["total"] = seconds_since(t_start);
    for (const auto& [name, content] : result.files) {
        manifest.file_checksums[name] = sha256_file_hex(options.out_dir / name);
    }
    write_manifest(manifest, options.out_dir / "manifest.json");

    log_info("run complete: " + std::to_string(result.parcels_created) + " parcels over " +
             std::to_string(day_count) + " days");
    return result;
}

void synth_only(const ScenarioConfig& config, const std::filesystem::path& out_dir) {
    validate_scenario(config);
    std::filesystem::create_directories(out_dir);
    RandomStream root(config.seed, "lmsim");
    RandomStream rng = root.derive("popsynth");
    Population pop;
    if (config.population_file) {
        pop = load_population(config.base_dir / *config.population_file, config);
    } else {
        pop = synthesize_population(config, rng);
    }
    write_population_csv(pop, config, out_dir / "persons.csv", out_dir / "households.csv");
}

} // namespace lmsim
