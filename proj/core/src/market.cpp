#include "lmsim/market.hpp"

#include "lmsim/errors.hpp"
#include "lmsim/geo.hpp"

#include <algorithm>
#include <cassert>
#include <limits>

namespace lmsim {

LockerDayState init_locker_day(std::span<const LockerSpec> lockers, int day) {
    LockerDayState state;
    state.remaining.reserve(lockers.size());
    state.available.reserve(lockers.size());
    for (const LockerSpec& l : lockers) {
        bool open = l.available_on(day);
        state.available.push_back(open);
        state.remaining.push_back(open ? l.capacity : 0);
    }
    return state;
}

void channel_split(std::span<Parcel> parcels, const Population& pop,
                   std::span<const HumatAgent> agents, const ScenarioConfig& config,
                   bool freight_only, RandomStream& rng) {
    if (freight_only) {
        for (Parcel& p : parcels) {
            p.channel = static_cast<int>(rng.categorical(config.market.fixed_shares));
        }
        return;
    }
    for (Parcel& p : parcels) {
        const HouseholdRecord& hh = pop.households[static_cast<std::size_t>(p.household)];
        std::size_t dm = static_cast<std::size_t>(hh.decision_maker());
        if (dm >= agents.size() || agents[dm].person != hh.decision_maker()) {
            throw MissingAgent("household '" + hh.household_id +
                               "' has no decision-maker agent");
        }
        p.channel = agents[dm].choice;
    }
}

std::vector<CrowdshipperTrip> generate_crowdshipper_trips(const Population& pop,
                                                          const ScenarioConfig& config, int day,
                                                          RandomStream& rng) {
    std::vector<CrowdshipperTrip> trips;
    double rate = config.crowdshipping.participation_rate;
    if (rate <= 0.0 || !config.employment_attribute) {
        return trips;
    }

    // Destination weights per the configured OD pattern; the origin zone
    // is excluded so origin != destination always holds.
    std::vector<double> base_weights(config.zones.size(), 0.0);
    if (config.crowdshipping.od_pattern == OdPattern::depot_weighted) {
        for (const Carrier& c : config.carriers) {
            base_weights[*config.zone_index(c.depot_zone)] += c.market_share;
        }
    } else {
        for (std::size_t z = 0; z < config.zones.size(); ++z) {
            base_weights[z] = config.zones[z].population_weight;
        }
    }

    int trip_id = static_cast<int>(day) * 100000;
    for (std::size_t i = 0; i < pop.persons.size(); ++i) {
        const PersonRecord& person = pop.persons[i];
        if (person.categories[*config.employment_attribute] !=
            static_cast<int>(config.employed_category)) {
            continue;
        }
        if (!rng.bernoulli(rate)) {
            continue;
        }
        std::vector<double> weights = base_weights;
        weights[static_cast<std::size_t>(person.zone)] = 0.0;
        double total = 0.0;
        for (double w : weights) {
            total += w;
        }
        if (total <= 0.0) {
            // Degenerate geography (all weight on the origin zone): fall
            // back to a uniform draw over the other zones.
            for (std::size_t z = 0; z < weights.size(); ++z) {
                weights[z] = z == static_cast<std::size_t>(person.zone) ? 0.0 : 1.0;
            }
            if (config.zones.size() < 2) {
                continue; // a single-zone scenario cannot host trips
            }
        }
        CrowdshipperTrip trip;
        trip.id = trip_id++;
        trip.person = static_cast<int>(i);
        trip.day = day;
        trip.origin_zone = person.zone;
        trip.dest_zone = static_cast<int>(rng.categorical(weights));
        trip.max_detour_km = config.crowdshipping.max_detour_km;
        trip.capacity = config.crowdshipping.trip_capacity;
        trip.remaining = trip.capacity;
        trips.push_back(trip);
    }
    return trips;
}

double trip_detour_km(const CrowdshipperTrip& trip, const Parcel& parcel,
                      const ScenarioConfig& config) {
    const LatLon origin = config.zones[static_cast<std::size_t>(trip.origin_zone)].centroid;
    const LatLon destination = config.zones[static_cast<std::size_t>(trip.dest_zone)].centroid;
    const Carrier& carrier = config.carriers[static_cast<std::size_t>(parcel.carrier)];
    const LatLon depot = config.zones[*config.zone_index(carrier.depot_zone)].centroid;
    const LatLon drop = config.zones[static_cast<std::size_t>(parcel.zone)].centroid;

    return great_circle_km(origin, depot) + great_circle_km(depot, drop) +
           great_circle_km(drop, destination) - great_circle_km(origin, destination);
}

MatchResult match_crowdshipping(std::span<const Parcel> parcels,
                                std::vector<CrowdshipperTrip>& trips,
                                const ScenarioConfig& config) {
    MatchResult result;
    for (const Parcel& parcel : parcels) {
        int best_trip = -1;
        double best_detour = std::numeric_limits<double>::infinity();
        for (std::size_t t = 0; t < trips.size(); ++t) {
            CrowdshipperTrip& trip = trips[t];
            if (trip.remaining <= 0) {
                continue;
            }
            double detour = trip_detour_km(trip, parcel, config);
            if (detour > trip.max_detour_km) {
                continue;
            }
            if (detour < best_detour ||
                (detour == best_detour && best_trip >= 0 &&
                 trip.id < trips[static_cast<std::size_t>(best_trip)].id)) {
                best_detour = detour;
                best_trip = static_cast<int>(t);
            }
        }
        if (best_trip < 0) {
            result.unmatched.push_back(parcel.id);
            continue;
        }
        CrowdshipperTrip& trip = trips[static_cast<std::size_t>(best_trip)];
        --trip.remaining;
        assert(trip.remaining >= 0);
        ChannelAssignment a;
        a.parcel = parcel.id;
        a.channel = parcel.channel;
        a.preferred = parcel.channel;
        a.trip = trip.id;
        a.detour_km = best_detour;
        result.matched.push_back(a);
    }
    return result;
}

LockerAssignResult assign_lockers(std::span<const Parcel> parcels, LockerDayState& state,
                                  const ScenarioConfig& config, int day) {
    (void)day;
    LockerAssignResult result;
    double walk_max = config.locker_params.walk_max_km;
    for (const Parcel& parcel : parcels) {
        const LatLon home = config.zones[static_cast<std::size_t>(parcel.zone)].centroid;
        int best = -1;
        double best_dist = std::numeric_limits<double>::infinity();
        for (std::size_t l = 0; l < config.lockers.size(); ++l) {
            if (!state.available[l] || state.remaining[l] <= 0) {
                continue;
            }
            double dist = great_circle_km(home, config.lockers[l].position);
            if (dist > walk_max) {
                continue;
            }
            if (dist < best_dist ||
                (dist == best_dist && best >= 0 &&
                 config.lockers[l].locker_id <
                     config.lockers[static_cast<std::size_t>(best)].locker_id)) {
                best_dist = dist;
                best = static_cast<int>(l);
            }
        }
        if (best < 0) {
            result.unassigned.push_back(parcel.id);
            continue;
        }
        --state.remaining[static_cast<std::size_t>(best)];
        assert(state.remaining[static_cast<std::size_t>(best)] >= 0);
        ChannelAssignment a;
        a.parcel = parcel.id;
        a.channel = parcel.channel;
        a.preferred = parcel.channel;
        a.locker = best;
        a.locker_distance_km = best_dist;
        result.assigned.push_back(a);
    }
    return result;
}

MarketDayKpis market_kpis(std::span<const ChannelAssignment> assignments,
                          const LockerDayState& locker_state,
                          std::span<const LockerSpec> lockers, const ScenarioConfig& config,
                          int day) {
    MarketDayKpis kpis;
    kpis.day = day;
    std::size_t channels = config.channel_catalog.size();
    kpis.tagged.assign(channels, 0);
    kpis.fulfilled.assign(channels, 0);
    kpis.fallbacks.assign(channels, 0);

    for (const ChannelAssignment& a : assignments) {
        ++kpis.tagged[static_cast<std::size_t>(a.preferred)];
        ++kpis.fulfilled[static_cast<std::size_t>(a.channel)];
        kpis.crowdship_detour_km += a.detour_km;
        if (a.fallback) {
            ++kpis.fallbacks[static_cast<std::size_t>(a.preferred)];
        }
    }

    long long capacity = 0;
    long long used = 0;
    for (std::size_t l = 0; l < lockers.size(); ++l) {
        if (!locker_state.available[l]) {
            continue;
        }
        capacity += lockers[l].capacity;
        used += lockers[l].capacity - locker_state.remaining[l];
    }
    kpis.locker_capacity_available = capacity;
    kpis.locker_utilization =
        capacity > 0 ? static_cast<double>(used) / static_cast<double>(capacity) : 0.0;
    return kpis;
}

} // namespace lmsim
