#pragma once

#include "lmsim/demand.hpp"
#include "lmsim/random.hpp"
#include "lmsim/scenario.hpp"

#include <span>
#include <vector>

namespace lmsim {

struct TourStop {
    int zone{-1};
    std::vector<int> parcel_ids;
};

struct Tour {
    int id{0};
    int carrier{-1};
    int day{0};
    std::vector<TourStop> stops;
    std::vector<double> leg_km; // stops.size() + 1 legs, depot to depot
    double total_km{0.0};
};

/// Symmetric distance matrix for a depot (node 0) and m stops (1..m).
using DistanceMatrix = std::vector<std::vector<double>>;

/// Visit order produced by nearest-neighbor construction from the depot.
/// Returns stop node indices (1-based into the matrix).
std::vector<int> nearest_neighbor_order(const DistanceMatrix& dist);

double route_length(const DistanceMatrix& dist, std::span<const int> order);

/// Best-improvement 2-opt over a depot-anchored route. Repeats until no
/// exchange shortens the route by more than 1e-9 km. Never increases the
/// length and preserves the stop set.
void two_opt(std::vector<int>& order, const DistanceMatrix& dist);

/// Builds depot-to-depot tours for all home_courier parcels of one day:
/// parcels group by destination zone into stops, stops chunk into tours
/// of at most vehicle_capacity parcels along the nearest-neighbor order,
/// and each tour is routed by nearest-neighbor plus 2-opt. Marks parcels
/// scheduled. Tour ids continue from next_tour_id.
std::vector<Tour> build_tours(std::span<Parcel> parcels, const ScenarioConfig& config, int day,
                              int& next_tour_id);

/// Resolves delivery outcomes for toured parcels. With success rates
/// already consumed by allocation, every delivery succeeds; otherwise each
/// parcel fails independently with 1 - success_rate. Returns the failed
/// parcel ids.
std::vector<int> simulate_delivery(std::span<const Tour> tours, std::span<Parcel> parcels,
                                   const ScenarioConfig& config, RandomStream& rng);

struct SchedulingDayKpis {
    int day{0};
    int carrier{-1};
    long long tour_count{0};
    double total_km{0.0};
    double mean_parcels_per_tour{0.0};
    long long failed{0};
};

std::vector<SchedulingDayKpis> scheduling_kpis(std::span<const Tour> tours,
                                               std::span<const Parcel> parcels);

} // namespace lmsim
