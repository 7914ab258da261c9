#pragma once

namespace lmsim {

inline constexpr double kEarthRadiusKm = 6371.0088;

struct LatLon {
    double lat{0.0};
    double lon{0.0};

    bool operator==(const LatLon&) const = default;
};

/// Haversine great-circle distance in kilometres.
double great_circle_km(LatLon a, LatLon b);

} // namespace lmsim
