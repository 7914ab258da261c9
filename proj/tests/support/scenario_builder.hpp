#pragma once

// In-memory scenario construction for unit tests and fuzz harnesses.

#include "lmsim/random.hpp"
#include "lmsim/scenario.hpp"

#include <string>
#include <vector>

namespace lmsim::test {

/// Small, fully valid configuration: three close zones, one carrier, a
/// two-attribute schema (employment, income_band), and a three-motive
/// catalog covering all motive groups. Callers tweak what they need.
inline ScenarioConfig mini_config(std::vector<std::string> catalog = {"home_courier"}) {
    ScenarioConfig sc;
    sc.name = "mini";
    sc.day_count = 1;
    sc.seed = 1;
    sc.channel_catalog = std::move(catalog);

    sc.zones = {
        {"z1", {52.00, 4.30}, 1.0},
        {"z2", {52.01, 4.31}, 1.0},
        {"z3", {52.02, 4.29}, 1.0},
    };
    sc.carriers = {{"c1", 1.0, 1.0, "z1", 50}};

    sc.schema.attributes = {
        {"employment", {"employed", "not_employed"}},
        {"income_band", {"inc_low", "inc_high"}},
    };
    sc.marginals.targets = {{60.0, 40.0}, {55.0, 45.0}};
    sc.has_marginals = true;
    sc.employment_attribute = 0;
    sc.employed_category = 0;
    sc.income_attribute = 1;

    sc.population.size = 100;
    sc.population.household_size_weights = {0.5, 0.5};

    sc.demand.base_rate = 0.5;
    sc.demand.income_multipliers = {1.0, 1.0};

    auto layer = [&](double k_mean, double spatial, std::vector<double> attr) {
        LayerParams p;
        p.k_mean = k_mean;
        p.weights.spatial_weight = spatial;
        p.weights.attribute_weights = std::move(attr);
        double total = p.weights.spatial_weight;
        for (double w : p.weights.attribute_weights) {
            total += w;
        }
        for (double& w : p.weights.attribute_weights) {
            w /= total;
        }
        p.weights.spatial_weight /= total;
        return p;
    };
    sc.network.friendship = layer(4.0, 1.0, {1.0, 1.0});
    sc.network.job = layer(2.0, 0.5, {0.5, 1.0});
    sc.network.neighborhood = layer(3.0, 2.0, {0.0, 1.0});

    sc.motives.motives = {
        {"comfort", MotiveGroup::experiential, {{"all", "all", 0.6, 0.1}}},
        {"norm", MotiveGroup::social, {{"all", "all", 0.5, 0.1}}},
        {"thrift", MotiveGroup::values, {{"all", "all", 0.4, 0.1}}},
    };
    std::size_t alts = sc.channel_catalog.size();
    sc.priors.cells.assign(3 * alts, EvalPrior{0.2, 0.2});
    for (std::size_t a = 1; a < alts; ++a) {
        sc.priors.cells[0 * alts + a] = {0.1, 0.25};
        sc.priors.cells[1 * alts + a] = {0.0, 0.25};
        sc.priors.cells[2 * alts + a] = {0.3, 0.25};
    }

    sc.market.fixed_shares.assign(alts, 0.0);
    sc.market.fixed_shares[0] = 1.0;
    return sc;
}

/// Randomized valid scenario for fuzzing. `with_lockers` forces a
/// parcel_locker channel with generous or scarce locker capacity.
inline ScenarioConfig fuzz_scenario(RandomStream& rng, bool with_lockers) {
    std::vector<std::string> catalog = {"home_courier"};
    bool crowdshipping = rng.bernoulli(0.5);
    bool lockers = with_lockers || rng.bernoulli(0.5);
    if (crowdshipping) {
        catalog.emplace_back("crowdshipping");
    }
    if (lockers) {
        catalog.emplace_back("parcel_locker");
    }

    ScenarioConfig sc = mini_config(catalog);
    sc.seed = rng.next_u64();
    sc.day_count = 1 + static_cast<int>(rng.uniform_below(3));

    std::size_t zone_count = 2 + rng.uniform_below(4);
    sc.zones.clear();
    for (std::size_t z = 0; z < zone_count; ++z) {
        Zone zone;
        zone.zone_id = "z" + std::to_string(z + 1);
        zone.centroid.lat = 52.0 + rng.uniform(0.0, 0.05);
        zone.centroid.lon = 4.3 + rng.uniform(0.0, 0.05);
        zone.population_weight = rng.uniform(0.2, 2.0);
        sc.zones.push_back(zone);
    }

    std::size_t carrier_count = 1 + rng.uniform_below(3);
    sc.carriers.clear();
    std::vector<double> shares(carrier_count);
    double share_sum = 0.0;
    for (double& s : shares) {
        s = rng.uniform(0.2, 1.0);
        share_sum += s;
    }
    for (std::size_t c = 0; c < carrier_count; ++c) {
        Carrier carrier;
        carrier.carrier_id = "c" + std::to_string(c + 1);
        carrier.market_share = shares[c] / share_sum;
        carrier.success_rate = rng.uniform(0.5, 1.0);
        carrier.depot_zone = sc.zones[rng.uniform_below(sc.zones.size())].zone_id;
        carrier.vehicle_capacity = 5 + static_cast<int>(rng.uniform_below(60));
        sc.carriers.push_back(carrier);
    }
    // Renormalize exactly; validation demands 1e-9.
    double total = 0.0;
    for (const Carrier& c : sc.carriers) {
        total += c.market_share;
    }
    sc.carriers.back().market_share += 1.0 - total;

    if (lockers) {
        std::size_t locker_count = 1 + rng.uniform_below(4);
        for (std::size_t l = 0; l < locker_count; ++l) {
            LockerSpec locker;
            locker.locker_id = "lk" + std::to_string(l + 1);
            const Zone& zone = sc.zones[rng.uniform_below(sc.zones.size())];
            locker.zone = zone.zone_id;
            locker.position.lat = zone.centroid.lat + rng.uniform(-0.002, 0.002);
            locker.position.lon = zone.centroid.lon + rng.uniform(-0.002, 0.002);
            locker.capacity = 1 + static_cast<int>(rng.uniform_below(30));
            locker.availability_pattern = rng.bernoulli(0.3) ? "10" : "1";
            sc.lockers.push_back(locker);
        }
        sc.locker_params.walk_max_km = rng.uniform(0.5, 3.0);
    }

    sc.population.size = 40 + static_cast<long long>(rng.uniform_below(80));
    sc.demand.base_rate = rng.uniform(0.1, 1.0);
    sc.demand.employment_multiplier = rng.uniform(0.0, 0.5);
    sc.demand.success_in_allocation = rng.bernoulli(0.5);

    if (crowdshipping) {
        sc.crowdshipping.participation_rate = rng.uniform(0.0, 0.4);
        sc.crowdshipping.max_detour_km = rng.uniform(0.5, 8.0);
        sc.crowdshipping.trip_capacity = 1 + static_cast<int>(rng.uniform_below(3));
    }

    // Mixed freight-only and coupled runs exercise both paths.
    sc.market.fixed_shares.assign(sc.channel_catalog.size(), 0.0);
    double fsum = 0.0;
    for (double& s : sc.market.fixed_shares) {
        s = rng.uniform(0.1, 1.0);
        fsum += s;
    }
    for (double& s : sc.market.fixed_shares) {
        s /= fsum;
    }
    double ftotal = 0.0;
    for (double s : sc.market.fixed_shares) {
        ftotal += s;
    }
    sc.market.fixed_shares.back() += 1.0 - ftotal;
    return sc;
}

} // namespace lmsim::test
