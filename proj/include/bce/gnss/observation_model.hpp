#pragma once

#include <string>

#include "bce/types.hpp"

namespace bce::gnss {

struct SatelliteState {
  std::string sat_id;
  Vec3 position = Vec3::Zero();  // ECEF, m
  double clock_bias_m = 0.0;
  double elevation_rad = 0.0;    // as seen from the receiver, (0, pi/2]
  double cn0_dbhz = 45.0;
};

// Throws std::invalid_argument unless elevation is in (0, pi/2] and cn0 in
// [20, 55] dB-Hz.
void validate(const SatelliteState& sat);

// Troposphere obliquity factor 1/sin(el). Requires el in (0, pi/2].
double elevation_mapping(double elevation_rad);

// Geometric range + receiver-minus-satellite clock + mapped troposphere:
//   |X_s - X_u| + (clk_u - clk_s) + (zenith_dry + tropo_wet) / sin(el).
// All arguments in meters; pure and deterministic.
double model_pseudorange(const SatelliteState& sat, const Vec3& receiver_ecef, double clock_m,
                         double tropo_wet_m, double zenith_dry_m);

// model_pseudorange plus the carrier ambiguity, carried in meters.
double model_carrier_phase(const SatelliteState& sat, const Vec3& receiver_ecef, double clock_m,
                           double tropo_wet_m, double zenith_dry_m, double ambiguity_m);

}  // namespace bce::gnss
