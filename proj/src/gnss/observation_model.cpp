#include "bce/gnss/observation_model.hpp"

#include <cmath>
#include <stdexcept>

namespace bce::gnss {

void validate(const SatelliteState& sat) {
  if (!sat.position.allFinite() || !std::isfinite(sat.clock_bias_m)) {
    throw std::invalid_argument("satellite state must be finite");
  }
  if (!(sat.elevation_rad > 0.0) || sat.elevation_rad > M_PI / 2.0 + 1e-12) {
    throw std::invalid_argument("satellite elevation must lie in (0, pi/2]");
  }
  if (sat.cn0_dbhz < 20.0 || sat.cn0_dbhz > 55.0) {
    throw std::invalid_argument("satellite cn0 must lie in [20, 55] dB-Hz");
  }
}

double elevation_mapping(double elevation_rad) {
  if (!(elevation_rad > 0.0) || elevation_rad > M_PI / 2.0 + 1e-12) {
    throw std::invalid_argument("elevation must lie in (0, pi/2]");
  }
  return 1.0 / std::sin(elevation_rad);
}

double model_pseudorange(const SatelliteState& sat, const Vec3& receiver_ecef, double clock_m,
                         double tropo_wet_m, double zenith_dry_m) {
  const double range = (sat.position - receiver_ecef).norm();
  const double tropo = (zenith_dry_m + tropo_wet_m) * elevation_mapping(sat.elevation_rad);
  return range + (clock_m - sat.clock_bias_m) + tropo;
}

double model_carrier_phase(const SatelliteState& sat, const Vec3& receiver_ecef, double clock_m,
                           double tropo_wet_m, double zenith_dry_m, double ambiguity_m) {
  return model_pseudorange(sat, receiver_ecef, clock_m, tropo_wet_m, zenith_dry_m) + ambiguity_m;
}

}  // namespace bce::gnss
