#pragma once

#include <utility>

#include <Eigen/Core>

#include "bce/types.hpp"

namespace bce::gnss {

// WGS84 ellipsoid.
inline constexpr double kWgs84A = 6378137.0;
inline constexpr double kWgs84F = 1.0 / 298.257223563;
inline constexpr double kWgs84E2 = kWgs84F * (2.0 - kWgs84F);

// lat/lon in radians, height in meters.
Vec3 geodetic_to_ecef(double lat_rad, double lon_rad, double height_m);

// Inverse of geodetic_to_ecef (iterative, converges to sub-millimeter).
// Returns (lat_rad, lon_rad, height_m).
Vec3 ecef_to_geodetic(const Vec3& ecef);

// Rotation whose rows map an ECEF delta into local East, North, Up at the
// given geodetic latitude/longitude.
Eigen::Matrix3d enu_rotation(double lat_rad, double lon_rad);

// ECEF point expressed in the ENU frame anchored at ref_ecef.
Vec3 ecef_to_enu(const Vec3& point_ecef, const Vec3& ref_ecef);

// Elevation and azimuth (radians) of target as seen from the observer.
// Azimuth is measured clockwise from north; elevation from the horizon.
std::pair<double, double> elevation_azimuth(const Vec3& observer_ecef, const Vec3& target_ecef);

}  // namespace bce::gnss
