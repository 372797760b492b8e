#pragma once

#include <string>
#include <vector>

#include "bce/gnss/scenario.hpp"
#include "bce/types.hpp"

namespace bce::harness {

// Observation rows grouped by epoch; satellites[k][i] pairs with
// observations[k][i].
struct ObservationSet {
  std::vector<double> epochs;
  std::vector<std::vector<gnss::SatelliteState>> satellites;
  std::vector<std::vector<gnss::EpochObservation>> observations;

  std::size_t total_rows() const;
};

struct TruthSet {
  std::vector<double> epochs;
  std::vector<Vec3> positions_ecef;
  std::vector<double> clock_m;
  std::vector<double> tropo_wet_m;
};

ObservationSet to_observation_set(const gnss::Scenario& scenario);
TruthSet to_truth_set(const gnss::Scenario& scenario);

// CSV schema (header mandatory, UTF-8, '.' decimal separator):
//   epoch_s,sat_id,sat_x_m,sat_y_m,sat_z_m,sat_clock_m,elevation_rad,
//   cn0_dbhz,pseudorange_m,carrier_phase_m,contaminated
// Values are written with 17 significant digits so a round-trip is exact.
void write_observations_csv(const std::string& path, const ObservationSet& obs);

// Schema: epoch_s,x_m,y_m,z_m,clock_m,tropo_wet_m
void write_truth_csv(const std::string& path, const TruthSet& truth);

// Loaders throw std::runtime_error naming the file, line, and problem. The
// contaminated column is optional on input (-1 when absent).
ObservationSet load_observations(const std::string& path);
TruthSet load_truth(const std::string& path);

}  // namespace bce::harness
