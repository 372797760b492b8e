#include "bce/gnss/geodesy.hpp"

#include <cmath>

namespace bce::gnss {

Vec3 geodetic_to_ecef(double lat_rad, double lon_rad, double height_m) {
  const double sl = std::sin(lat_rad);
  const double cl = std::cos(lat_rad);
  const double n = kWgs84A / std::sqrt(1.0 - kWgs84E2 * sl * sl);
  return Vec3((n + height_m) * cl * std::cos(lon_rad),
              (n + height_m) * cl * std::sin(lon_rad),
              (n * (1.0 - kWgs84E2) + height_m) * sl);
}

Vec3 ecef_to_geodetic(const Vec3& ecef) {
  const double lon = std::atan2(ecef.y(), ecef.x());
  const double p = std::hypot(ecef.x(), ecef.y());
  double lat = std::atan2(ecef.z(), p * (1.0 - kWgs84E2));
  double height = 0.0;
  for (int i = 0; i < 12; ++i) {
    const double sl = std::sin(lat);
    const double n = kWgs84A / std::sqrt(1.0 - kWgs84E2 * sl * sl);
    height = p / std::cos(lat) - n;
    lat = std::atan2(ecef.z(), p * (1.0 - kWgs84E2 * n / (n + height)));
  }
  return Vec3(lat, lon, height);
}

Eigen::Matrix3d enu_rotation(double lat_rad, double lon_rad) {
  const double sl = std::sin(lat_rad), cl = std::cos(lat_rad);
  const double so = std::sin(lon_rad), co = std::cos(lon_rad);
  Eigen::Matrix3d r;
  r << -so, co, 0.0,
       -sl * co, -sl * so, cl,
       cl * co, cl * so, sl;
  return r;
}

Vec3 ecef_to_enu(const Vec3& point_ecef, const Vec3& ref_ecef) {
  const Vec3 lla = ecef_to_geodetic(ref_ecef);
  return enu_rotation(lla.x(), lla.y()) * (point_ecef - ref_ecef);
}

std::pair<double, double> elevation_azimuth(const Vec3& observer_ecef, const Vec3& target_ecef) {
  const Vec3 enu = ecef_to_enu(target_ecef, observer_ecef);
  const double horiz = std::hypot(enu.x(), enu.y());
  const double el = std::atan2(enu.z(), horiz);
  const double az = std::atan2(enu.x(), enu.y());
  return {el, az};
}

}  // namespace bce::gnss
