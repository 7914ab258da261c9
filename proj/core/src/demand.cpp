#include "lmsim/demand.hpp"

#include "lmsim/errors.hpp"

#include <cassert>

namespace lmsim {

const char* to_string(ParcelStatus status) {
    switch (status) {
    case ParcelStatus::created: return "created";
    case ParcelStatus::assigned: return "assigned";
    case ParcelStatus::scheduled: return "scheduled";
    case ParcelStatus::delivered: return "delivered";
    case ParcelStatus::failed: return "failed";
    }
    return "?";
}

double household_demand_rate(const HouseholdRecord& household, const Population& pop,
                             const ScenarioConfig& config) {
    double rate = config.demand.base_rate;
    if (household.income_category >= 0 && !config.demand.income_multipliers.empty()) {
        rate *= config.demand.income_multipliers[static_cast<std::size_t>(
            household.income_category)];
    }
    if (config.employment_attribute && config.demand.employment_multiplier > 0.0) {
        int employed = 0;
        for (int member : household.members) {
            const PersonRecord& p = pop.persons[static_cast<std::size_t>(member)];
            if (p.categories[*config.employment_attribute] ==
                static_cast<int>(config.employed_category)) {
                ++employed;
            }
        }
        rate *= 1.0 + config.demand.employment_multiplier * static_cast<double>(employed);
    }
    return rate;
}

std::vector<Parcel> generate_demand(const Population& pop, const ScenarioConfig& config, int day,
                                    RandomStream& rng, int& next_parcel_id) {
    std::vector<Parcel> parcels;
    for (std::size_t h = 0; h < pop.households.size(); ++h) {
        const HouseholdRecord& hh = pop.households[h];
        double rate = household_demand_rate(hh, pop, config);
        long long count = rng.poisson(rate);
        for (long long k = 0; k < count; ++k) {
            Parcel p;
            p.id = next_parcel_id++;
            p.day = day;
            p.household = static_cast<int>(h);
            p.zone = hh.zone;
            parcels.push_back(p);
        }
    }
    return parcels;
}

void allocate_carriers(std::span<Parcel> parcels, std::span<const Carrier> carriers,
                       bool use_success_weights, RandomStream& rng) {
    std::vector<double> weights;
    weights.reserve(carriers.size());
    for (const Carrier& c : carriers) {
        weights.push_back(use_success_weights ? c.market_share * c.success_rate : c.market_share);
    }
    for (Parcel& p : parcels) {
        assert(p.status == ParcelStatus::created);
        p.carrier = static_cast<int>(rng.categorical(weights));
        p.status = ParcelStatus::assigned;
    }
}

DemandKpis demand_kpis(std::span<const Parcel> parcels) {
    DemandKpis kpis;
    for (const Parcel& p : parcels) {
        ++kpis.counts[{p.day, p.zone, p.carrier}];
        ++kpis.total;
    }
    return kpis;
}

long long DemandKpis::day_total(int day) const {
    long long total = 0;
    for (const auto& [key, count] : counts) {
        if (std::get<0>(key) == day) {
            total += count;
        }
    }
    return total;
}

} // namespace lmsim
