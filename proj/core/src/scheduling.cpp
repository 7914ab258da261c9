#include "lmsim/scheduling.hpp"

#include "lmsim/errors.hpp"
#include "lmsim/geo.hpp"

#include <algorithm>
#include <cassert>
#include <limits>
#include <map>

namespace lmsim {

std::vector<int> nearest_neighbor_order(const DistanceMatrix& dist) {
    std::size_t stops = dist.size() - 1;
    std::vector<int> order;
    order.reserve(stops);
    std::vector<bool> visited(dist.size(), false);
    int current = 0; // depot
    for (std::size_t step = 0; step < stops; ++step) {
        int best = -1;
        double best_dist = std::numeric_limits<double>::infinity();
        for (std::size_t v = 1; v < dist.size(); ++v) {
            if (visited[v]) {
                continue;
            }
            double d = dist[static_cast<std::size_t>(current)][v];
            if (d < best_dist) {
                best_dist = d;
                best = static_cast<int>(v);
            }
        }
        visited[static_cast<std::size_t>(best)] = true;
        order.push_back(best);
        current = best;
    }
    return order;
}

double route_length(const DistanceMatrix& dist, std::span<const int> order) {
    if (order.empty()) {
        return 0.0;
    }
    double total = dist[0][static_cast<std::size_t>(order.front())];
    for (std::size_t i = 0; i + 1 < order.size(); ++i) {
        total += dist[static_cast<std::size_t>(order[i])][static_cast<std::size_t>(order[i + 1])];
    }
    total += dist[static_cast<std::size_t>(order.back())][0];
    return total;
}

void two_opt(std::vector<int>& order, const DistanceMatrix& dist) {
    if (order.size() < 2) {
        return;
    }
    constexpr double kMinGain = 1e-9;
    auto node = [&](std::size_t pos) -> std::size_t {
        return static_cast<std::size_t>(order[pos]);
    };
    while (true) {
        double best_gain = 0.0;
        std::size_t best_i = 0;
        std::size_t best_j = 0;
        // Reversing order[i..j] replaces edges (i-1, i) and (j, j+1); the
        // depot anchors both route ends.
        for (std::size_t i = 0; i < order.size() - 1; ++i) {
            std::size_t before = i == 0 ? 0 : node(i - 1);
            for (std::size_t j = i + 1; j < order.size(); ++j) {
                std::size_t after = j + 1 == order.size() ? 0 : node(j + 1);
                double removed = dist[before][node(i)] + dist[node(j)][after];
                double added = dist[before][node(j)] + dist[node(i)][after];
                double gain = removed - added;
                if (gain > best_gain) {
                    best_gain = gain;
                    best_i = i;
                    best_j = j;
                }
            }
        }
        if (best_gain <= kMinGain) {
            break;
        }
        std::reverse(order.begin() + static_cast<std::ptrdiff_t>(best_i),
                     order.begin() + static_cast<std::ptrdiff_t>(best_j) + 1);
    }
}

std::vector<Tour> build_tours(std::span<Parcel> parcels, const ScenarioConfig& config, int day,
                              int& next_tour_id) {
    std::vector<Tour> tours;

    for (std::size_t c = 0; c < config.carriers.size(); ++c) {
        const Carrier& carrier = config.carriers[c];
        std::size_t capacity = static_cast<std::size_t>(carrier.vehicle_capacity);

        // Group this carrier's parcels by destination zone (ascending
        // zone index, parcels ascending by id within a stop).
        std::map<int, std::vector<int>> by_zone;
        std::map<int, std::vector<Parcel*>> parcel_refs;
        for (Parcel& p : parcels) {
            if (p.carrier == static_cast<int>(c)) {
                by_zone[p.zone].push_back(p.id);
                parcel_refs[p.zone].push_back(&p);
            }
        }
        if (by_zone.empty()) {
            continue;
        }

        // A zone with more parcels than the vehicle holds splits into
        // several stops of at most `capacity` parcels.
        std::vector<TourStop> stops;
        for (auto& [zone, ids] : by_zone) {
            for (std::size_t off = 0; off < ids.size(); off += capacity) {
                TourStop stop;
                stop.zone = zone;
                std::size_t end = std::min(off + capacity, ids.size());
                stop.parcel_ids.assign(ids.begin() + static_cast<std::ptrdiff_t>(off),
                                       ids.begin() + static_cast<std::ptrdiff_t>(end));
                stops.push_back(std::move(stop));
            }
        }

        const LatLon depot = config.zones[*config.zone_index(carrier.depot_zone)].centroid;
        auto stop_point = [&](const TourStop& s) {
            return config.zones[static_cast<std::size_t>(s.zone)].centroid;
        };

        // Nearest-neighbor order over all stops, then chunk into tours
        // along that order without exceeding vehicle capacity.
        DistanceMatrix all(stops.size() + 1, std::vector<double>(stops.size() + 1, 0.0));
        for (std::size_t i = 0; i <= stops.size(); ++i) {
            LatLon a = i == 0 ? depot : stop_point(stops[i - 1]);
            for (std::size_t j = i + 1; j <= stops.size(); ++j) {
                LatLon b = stop_point(stops[j - 1]);
                double d = great_circle_km(a, b);
                all[i][j] = d;
                all[j][i] = d;
            }
        }
        std::vector<int> visit = nearest_neighbor_order(all);

        std::vector<std::vector<int>> chunks; // stop indices (0-based into stops)
        std::vector<int> current;
        std::size_t load = 0;
        for (int v : visit) {
            std::size_t s = static_cast<std::size_t>(v - 1);
            std::size_t parcels_here = stops[s].parcel_ids.size();
            if (!current.empty() && load + parcels_here > capacity) {
                chunks.push_back(std::move(current));
                current.clear();
                load = 0;
            }
            current.push_back(static_cast<int>(s));
            load += parcels_here;
        }
        if (!current.empty()) {
            chunks.push_back(std::move(current));
        }

        for (const std::vector<int>& chunk : chunks) {
            // Route this tour's stops: nearest neighbor, then 2-opt.
            DistanceMatrix dist(chunk.size() + 1, std::vector<double>(chunk.size() + 1, 0.0));
            for (std::size_t i = 0; i <= chunk.size(); ++i) {
                LatLon a = i == 0 ? depot : stop_point(stops[static_cast<std::size_t>(chunk[i - 1])]);
                for (std::size_t j = i + 1; j <= chunk.size(); ++j) {
                    LatLon b = stop_point(stops[static_cast<std::size_t>(chunk[j - 1])]);
                    double d = great_circle_km(a, b);
                    dist[i][j] = d;
                    dist[j][i] = d;
                }
            }
            std::vector<int> order = nearest_neighbor_order(dist);
            two_opt(order, dist);

            Tour tour;
            tour.id = next_tour_id++;
            tour.carrier = static_cast<int>(c);
            tour.day = day;
            int prev = 0;
            for (int o : order) {
                tour.stops.push_back(stops[static_cast<std::size_t>(chunk[static_cast<std::size_t>(o - 1)])]);
                tour.leg_km.push_back(dist[static_cast<std::size_t>(prev)][static_cast<std::size_t>(o)]);
                prev = o;
            }
            tour.leg_km.push_back(dist[static_cast<std::size_t>(prev)][0]);
            tour.total_km = 0.0;
            for (double leg : tour.leg_km) {
                tour.total_km += leg;
            }
            tours.push_back(std::move(tour));
        }
    }

    // Mark everything routed as scheduled.
    std::map<int, Parcel*> by_id;
    for (Parcel& p : parcels) {
        by_id[p.id] = &p;
    }
    for (const Tour& tour : tours) {
        for (const TourStop& stop : tour.stops) {
            for (int id : stop.parcel_ids) {
                by_id[id]->status = ParcelStatus::scheduled;
            }
        }
    }
    return tours;
}

std::vector<int> simulate_delivery(std::span<const Tour> tours, std::span<Parcel> parcels,
                                   const ScenarioConfig& config, RandomStream& rng) {
    std::map<int, Parcel*> by_id;
    for (Parcel& p : parcels) {
        by_id[p.id] = &p;
    }
    std::vector<int> failed;
    for (const Tour& tour : tours) {
        double success_rate = config.carriers[static_cast<std::size_t>(tour.carrier)].success_rate;
        for (const TourStop& stop : tour.stops) {
            for (int id : stop.parcel_ids) {
                Parcel* p = by_id.at(id);
                assert(p->status == ParcelStatus::scheduled);
                bool ok = config.demand.success_in_allocation || rng.bernoulli(success_rate);
                p->status = ok ? ParcelStatus::delivered : ParcelStatus::failed;
                if (!ok) {
                    failed.push_back(id);
                }
            }
        }
    }
    return failed;
}

std::vector<SchedulingDayKpis> scheduling_kpis(std::span<const Tour> tours,
                                               std::span<const Parcel> parcels) {
    std::map<std::pair<int, int>, SchedulingDayKpis> acc; // (day, carrier)
    std::map<int, const Parcel*> by_id;
    for (const Parcel& p : parcels) {
        by_id[p.id] = &p;
    }

    std::map<std::pair<int, int>, long long> parcel_totals;
    for (const Tour& tour : tours) {
        auto key = std::make_pair(tour.day, tour.carrier);
        SchedulingDayKpis& k = acc[key];
        k.day = tour.day;
        k.carrier = tour.carrier;
        ++k.tour_count;
        k.total_km += tour.total_km;
        for (const TourStop& stop : tour.stops) {
            parcel_totals[key] += static_cast<long long>(stop.parcel_ids.size());
            for (int id : stop.parcel_ids) {
                if (by_id.at(id)->status == ParcelStatus::failed) {
                    ++k.failed;
                }
            }
        }
    }
    std::vector<SchedulingDayKpis> out;
    out.reserve(acc.size());
    for (auto& [key, k] : acc) {
        k.mean_parcels_per_tour =
            k.tour_count > 0
                ? static_cast<double>(parcel_totals[key]) / static_cast<double>(k.tour_count)
                : 0.0;
        out.push_back(k);
    }
    return out;
}

} // namespace lmsim
