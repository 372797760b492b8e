#include <doctest.h>

#include <cmath>

#include "bce/gnss/geodesy.hpp"
#include "bce/gnss/observation_model.hpp"

using namespace bce;
using namespace bce::gnss;

TEST_CASE("elevation obliquity") {
  CHECK(elevation_mapping(M_PI / 2.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(elevation_mapping(M_PI / 6.0) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(elevation_mapping(M_PI / 4.0) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
  CHECK_THROWS_AS(elevation_mapping(0.0), std::invalid_argument);
  CHECK_THROWS_AS(elevation_mapping(-0.1), std::invalid_argument);
  CHECK_THROWS_AS(elevation_mapping(M_PI / 2.0 + 0.01), std::invalid_argument);
}

TEST_CASE("satellite state validation") {
  SatelliteState sat;
  sat.sat_id = "G01";
  sat.position = Vec3(2.0e7, 1.0e7, 5.0e6);
  sat.clock_bias_m = 12.0;
  sat.elevation_rad = 0.7;
  sat.cn0_dbhz = 45.0;
  CHECK_NOTHROW(validate(sat));

  SatelliteState low_el = sat;
  low_el.elevation_rad = 0.0;
  CHECK_THROWS_AS(validate(low_el), std::invalid_argument);
  SatelliteState weak = sat;
  weak.cn0_dbhz = 10.0;
  CHECK_THROWS_AS(validate(weak), std::invalid_argument);
  SatelliteState broken = sat;
  broken.position[1] = NAN;
  CHECK_THROWS_AS(validate(broken), std::invalid_argument);
}

TEST_CASE("pseudorange and carrier models") {
  // Receiver at the origin of a local frame built from a real site; satellite
  // placed at a known geometric range.
  Vec3 rx = geodetic_to_ecef(0.6921, -1.3958, 300.0);
  Vec3 los = rx.normalized();  // straight up
  double range = 2.02e7;

  SatelliteState sat;
  sat.sat_id = "G09";
  sat.position = rx + range * los;
  sat.clock_bias_m = -30.0;
  sat.elevation_rad = M_PI / 2.0;
  sat.cn0_dbhz = 45.0;

  double clock_m = 120.0;
  double tropo_wet = 0.1;
  double zenith_dry = 2.3;
  double expect = range + (clock_m - sat.clock_bias_m) + (zenith_dry + tropo_wet) * 1.0;
  CHECK(model_pseudorange(sat, rx, clock_m, tropo_wet, zenith_dry) ==
        doctest::Approx(expect).epsilon(1e-12));

  // At 30 degrees elevation the troposphere doubles.
  SatelliteState oblique = sat;
  oblique.elevation_rad = M_PI / 6.0;
  CHECK(model_pseudorange(oblique, rx, clock_m, tropo_wet, zenith_dry) ==
        doctest::Approx(range + 150.0 + 2.4 * 2.0).epsilon(1e-12));

  double amb = -7.25;
  CHECK(model_carrier_phase(sat, rx, clock_m, tropo_wet, zenith_dry, amb) ==
        doctest::Approx(expect + amb).epsilon(1e-12));
}

TEST_CASE("geodesy round trips") {
  double lat = 0.6921, lon = -1.3958, h = 300.0;
  Vec3 ecef = geodetic_to_ecef(lat, lon, h);
  Vec3 lla = ecef_to_geodetic(ecef);
  CHECK(lla[0] == doctest::Approx(lat).epsilon(1e-12));
  CHECK(lla[1] == doctest::Approx(lon).epsilon(1e-12));
  CHECK(lla[2] == doctest::Approx(h).epsilon(1e-6));

  // Equator/prime-meridian anchor point.
  Vec3 eq = geodetic_to_ecef(0.0, 0.0, 0.0);
  CHECK(eq[0] == doctest::Approx(kWgs84A).epsilon(1e-12));
  CHECK(eq[1] == doctest::Approx(0.0).scale(1.0));
  CHECK(eq[2] == doctest::Approx(0.0).scale(1.0));

  Eigen::Matrix3d r = enu_rotation(lat, lon);
  CHECK((r * r.transpose() - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(r.determinant() == doctest::Approx(1.0).epsilon(1e-12));

  CHECK(ecef_to_enu(ecef, ecef).norm() == doctest::Approx(0.0).scale(1.0));

  // A point 100 m up has a purely vertical ENU offset.
  Vec3 above = geodetic_to_ecef(lat, lon, h + 100.0);
  Vec3 enu = ecef_to_enu(above, ecef);
  CHECK(std::abs(enu[0]) < 1e-6);
  CHECK(std::abs(enu[1]) < 1e-6);
  CHECK(enu[2] == doctest::Approx(100.0).epsilon(1e-6));
}

TEST_CASE("elevation and azimuth from site to target") {
  Vec3 site = geodetic_to_ecef(0.6921, -1.3958, 300.0);
  Eigen::Matrix3d r = enu_rotation(0.6921, -1.3958);
  Vec3 up = site + r.row(2).transpose() * 1.0e6;
  auto [el_up, az_up] = elevation_azimuth(site, up);
  CHECK(el_up == doctest::Approx(M_PI / 2.0).epsilon(1e-6));

  // A nearby point due east sits at azimuth pi/2 and near-zero elevation.
  Vec3 east = site + r.row(0).transpose() * 1000.0;
  auto [el_e, az_e] = elevation_azimuth(site, east);
  CHECK(std::abs(el_e) < 1e-3);
  CHECK(az_e == doctest::Approx(M_PI / 2.0).epsilon(1e-6));
}
