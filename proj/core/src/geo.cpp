#include "lmsim/geo.hpp"

#include <cmath>
#include <numbers>

namespace lmsim {

double great_circle_km(LatLon a, LatLon b) {
    constexpr double deg = std::numbers::pi / 180.0;
    double phi1 = a.lat * deg;
    double phi2 = b.lat * deg;
    double dphi = (b.lat - a.lat) * deg;
    double dlam = (b.lon - a.lon) * deg;

    double sp = std::sin(dphi * 0.5);
    double sl = std::sin(dlam * 0.5);
    double h = sp * sp + std::cos(phi1) * std::cos(phi2) * sl * sl;
    h = std::min(1.0, std::max(0.0, h));
    return 2.0 * kEarthRadiusKm * std::asin(std::sqrt(h));
}

} // namespace lmsim
