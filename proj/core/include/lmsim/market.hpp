#pragma once

#include "lmsim/demand.hpp"
#include "lmsim/humat.hpp"
#include "lmsim/popsynth.hpp"
#include "lmsim/random.hpp"
#include "lmsim/scenario.hpp"

#include <span>
#include <vector>

namespace lmsim {

struct CrowdshipperTrip {
    int id{0};
    int person{-1};
    int day{0};
    int origin_zone{-1};
    int dest_zone{-1};
    double max_detour_km{0.0};
    int capacity{1};
    int remaining{1};
};

/// Daily locker book-keeping, aligned with ScenarioConfig::lockers.
struct LockerDayState {
    std::vector<int> remaining;
    std::vector<bool> available;
};

LockerDayState init_locker_day(std::span<const LockerSpec> lockers, int day);

struct ChannelAssignment {
    int parcel{-1};
    int channel{-1};   // final fulfillment channel
    int preferred{-1}; // channel tagged by channel_split
    int trip{-1};      // crowdshipping detail
    int locker{-1};    // parcel_locker detail
    bool fallback{false};
    double detour_km{0.0};
    double locker_distance_km{0.0};
};

/// Tags each parcel with its household decision-maker's current choice,
/// or draws from the fixed share vector in freight-only mode. Throws
/// MissingAgent when a household has no decision-maker agent.
void channel_split(std::span<Parcel> parcels, const Population& pop,
                   std::span<const HumatAgent> agents, const ScenarioConfig& config,
                   bool freight_only, RandomStream& rng);

/// Employed persons participate with probability participation_rate;
/// trip origin is the home zone, destination drawn from the od pattern.
std::vector<CrowdshipperTrip> generate_crowdshipper_trips(const Population& pop,
                                                          const ScenarioConfig& config, int day,
                                                          RandomStream& rng);

/// Extra distance a trip incurs to pick the parcel up at its carrier's
/// depot and drop it at its destination zone.
double trip_detour_km(const CrowdshipperTrip& trip, const Parcel& parcel,
                      const ScenarioConfig& config);

struct MatchResult {
    std::vector<ChannelAssignment> matched;
    std::vector<int> unmatched; // parcel ids, ascending
};

/// Greedy matching in ascending parcel id: each parcel takes the feasible
/// trip with the smallest detour (ties by lower trip id), subject to the
/// trip's detour bound and remaining capacity.
MatchResult match_crowdshipping(std::span<const Parcel> parcels,
                                std::vector<CrowdshipperTrip>& trips,
                                const ScenarioConfig& config);

struct LockerAssignResult {
    std::vector<ChannelAssignment> assigned;
    std::vector<int> unassigned; // parcel ids, ascending
};

/// Nearest available locker with remaining capacity within walk_max_km of
/// the destination zone centroid; ties by locker id.
LockerAssignResult assign_lockers(std::span<const Parcel> parcels, LockerDayState& state,
                                  const ScenarioConfig& config, int day);

struct MarketDayKpis {
    int day{0};
    std::vector<long long> tagged;       // per channel: preferred-channel counts
    std::vector<long long> fulfilled;    // per channel: assignments on that channel
    std::vector<long long> fallbacks;    // per preferred channel: rerouted to home_courier
    double crowdship_detour_km{0.0};
    double locker_utilization{0.0};      // assigned / total capacity of available lockers
    long long locker_capacity_available{0};
};

MarketDayKpis market_kpis(std::span<const ChannelAssignment> assignments,
                          const LockerDayState& locker_state,
                          std::span<const LockerSpec> lockers, const ScenarioConfig& config,
                          int day);

} // namespace lmsim
