#pragma once

#include "lmsim/popsynth.hpp"
#include "lmsim/random.hpp"
#include "lmsim/scenario.hpp"

#include <map>
#include <span>
#include <vector>

namespace lmsim {

enum class ParcelStatus { created, assigned, scheduled, delivered, failed };

const char* to_string(ParcelStatus status);

struct Parcel {
    int id{0};
    int day{0};
    int household{-1};
    int zone{-1};    // destination, the household's zone
    int carrier{-1}; // set by allocate_carriers
    int channel{-1}; // set by the market module
    bool fallback{false};
    ParcelStatus status{ParcelStatus::created};
};

/// Expected parcels per day for one household:
/// base_rate * income_multiplier * (1 + employment_multiplier * employed_members).
double household_demand_rate(const HouseholdRecord& household, const Population& pop,
                             const ScenarioConfig& config);

/// Monte-Carlo daily demand: household counts drawn Poisson(rate). Parcel
/// ids continue from next_parcel_id, ascending.
std::vector<Parcel> generate_demand(const Population& pop, const ScenarioConfig& config, int day,
                                    RandomStream& rng, int& next_parcel_id);

/// Assigns each parcel a carrier, drawn with probability proportional to
/// market_share (times success_rate when use_success_weights). Sets status
/// to assigned.
void allocate_carriers(std::span<Parcel> parcels, std::span<const Carrier> carriers,
                       bool use_success_weights, RandomStream& rng);

struct DemandKpis {
    // (day, zone index, carrier index) -> parcel count
    std::map<std::tuple<int, int, int>, long long> counts;
    long long total{0};

    long long day_total(int day) const;
};

DemandKpis demand_kpis(std::span<const Parcel> parcels);

} // namespace lmsim
