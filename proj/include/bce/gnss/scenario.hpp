#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bce/gnss/observation_model.hpp"
#include "bce/gnss/tracking_noise.hpp"
#include "bce/types.hpp"

namespace bce::gnss {

// One satellite of the synthetic constellation. Line-of-sight direction is
// azimuth/elevation as seen from the scenario reference point, drifting
// linearly over the run; the satellite sits at a fixed range along it.
struct SatelliteSpec {
  std::string id;
  double azimuth_deg = 0.0;
  double elevation_deg = 45.0;
  double azimuth_rate_dps = 0.0;
  double elevation_rate_dps = 0.0;
  double cn0_dbhz = 45.0;
  double clock_bias_m = 0.0;
  double range_m = 20200e3;
};

// Biased noise mode injected per (satellite, epoch) with the given
// probability, emulating multipath or degraded tracking.
struct ContaminationConfig {
  double probability = 0.0;
  double range_bias_mean_m = 10.0;
  double range_bias_sigma_m = 1.0;
  double phase_bias_mean_m = 0.0;
  double phase_bias_sigma_m = 0.0;
};

struct ScenarioConfig {
  double duration_s = 600.0;
  double interval_s = 1.0;
  Vec3 reference_lla = Vec3(39.65, -79.97, 300.0);       // deg, deg, m
  std::vector<std::pair<double, Vec3>> waypoints_enu;    // (time s, ENU m); default path if empty
  std::vector<SatelliteSpec> satellites;                 // default 9-sat spread if empty
  TrackingConfig tracking = low_grade_tracking();
  double sigma_rho_m = 2.5;     // generation noise floor, code
  double sigma_phi_m = 0.025;   // generation noise floor, carrier
  ContaminationConfig contamination;
  double zenith_dry_m = 2.3;
  double tropo_wet_truth_m = 0.1;
  double clock_drift_mps = 1.0;
  double clock_walk_sigma_m = 0.05;
  double ambiguity_sigma_m = 30.0;
  double elevation_mask_deg = 10.0;
  std::uint64_t rng_seed = 0;
};

struct EpochObservation {
  double epoch_s = 0.0;
  std::string sat_id;
  double pseudorange_m = 0.0;
  double carrier_phase_m = 0.0;
  // 1/0 ground-truth label; -1 when loaded from a file without the column.
  int contaminated = 0;
};

struct Scenario {
  std::vector<double> epochs;
  std::vector<Vec3> truth_positions_ecef;
  std::vector<double> truth_clock_m;
  double truth_tropo_wet_m = 0.0;
  double zenith_dry_m = 2.3;
  // Per epoch, aligned lists of visible satellites and their observations.
  std::vector<std::vector<SatelliteState>> satellites;
  std::vector<std::vector<EpochObservation>> observations;
};

// The 9-satellite default constellation and default walking path used when
// the config leaves those fields empty.
std::vector<SatelliteSpec> default_constellation();
std::vector<std::pair<double, Vec3>> default_waypoints(double duration_s);

void validate(const ScenarioConfig& cfg);

// Deterministic synthetic scenario: piecewise-linear truth trajectory through
// the waypoints, ramp-plus-random-walk receiver clock, constant wet zenith
// delay, per-satellite constant carrier ambiguities, observation noise
// sigma = max(config floor, tracking-loop thermal value), and per
// (satellite, epoch) contamination draws. Throws std::runtime_error if fewer
// than 4 satellites clear the elevation mask at any epoch.
Scenario generate_scenario(const ScenarioConfig& cfg);

}  // namespace bce::gnss
