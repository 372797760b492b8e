#include "bce/gnss/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "bce/gnss/geodesy.hpp"
#include "bce/rng.hpp"

namespace bce::gnss {
namespace {

constexpr double kDegToRad = M_PI / 180.0;

Vec3 interpolate_waypoints(const std::vector<std::pair<double, Vec3>>& wps, double t) {
  if (t <= wps.front().first) return wps.front().second;
  if (t >= wps.back().first) return wps.back().second;
  for (std::size_t i = 1; i < wps.size(); ++i) {
    if (t <= wps[i].first) {
      const double span = wps[i].first - wps[i - 1].first;
      const double a = span > 0.0 ? (t - wps[i - 1].first) / span : 1.0;
      return (1.0 - a) * wps[i - 1].second + a * wps[i].second;
    }
  }
  return wps.back().second;
}

}  // namespace

std::vector<SatelliteSpec> default_constellation() {
  std::vector<SatelliteSpec> sats;
  for (int i = 0; i < 9; ++i) {
    SatelliteSpec s;
    char id[8];
    std::snprintf(id, sizeof(id), "G%02d", i + 1);
    s.id = id;
    s.azimuth_deg = 40.0 * i;
    s.elevation_deg = 22.0 + static_cast<double>((i * 23) % 55);
    s.azimuth_rate_dps = 0.01 * ((i % 5) - 2);
    s.elevation_rate_dps = 0.003 * ((i % 3) - 1);
    s.cn0_dbhz = 45.0;
    s.clock_bias_m = 10.0 * ((i % 7) - 3);
    sats.push_back(std::move(s));
  }
  return sats;
}

std::vector<std::pair<double, Vec3>> default_waypoints(double duration_s) {
  // Gentle walking loop, ~1.5 m/s.
  return {{0.0, Vec3(0, 0, 0)},
          {duration_s * 1.0 / 3.0, Vec3(300, 0, 0)},
          {duration_s * 2.0 / 3.0, Vec3(300, 200, 0)},
          {duration_s, Vec3(0, 200, 0)}};
}

void validate(const ScenarioConfig& cfg) {
  if (!(cfg.interval_s > 0.0) || !(cfg.duration_s >= cfg.interval_s)) {
    throw std::invalid_argument("scenario: need interval > 0 and duration >= interval");
  }
  validate(cfg.tracking);
  if (cfg.sigma_rho_m < 0.0 || cfg.sigma_phi_m < 0.0) {
    throw std::invalid_argument("scenario: noise floors must be non-negative");
  }
  const ContaminationConfig& c = cfg.contamination;
  if (!(c.probability >= 0.0 && c.probability <= 1.0)) {
    throw std::invalid_argument("scenario: contamination probability must lie in [0, 1]");
  }
  if (c.range_bias_sigma_m < 0.0 || c.phase_bias_sigma_m < 0.0) {
    throw std::invalid_argument("scenario: contamination sigmas must be non-negative");
  }
  if (!(cfg.elevation_mask_deg >= 0.0 && cfg.elevation_mask_deg < 90.0)) {
    throw std::invalid_argument("scenario: elevation mask must lie in [0, 90)");
  }
  if (!cfg.waypoints_enu.empty()) {
    for (std::size_t i = 1; i < cfg.waypoints_enu.size(); ++i) {
      if (cfg.waypoints_enu[i].first < cfg.waypoints_enu[i - 1].first) {
        throw std::invalid_argument("scenario: waypoint times must be non-decreasing");
      }
    }
  }
}

Scenario generate_scenario(const ScenarioConfig& cfg) {
  validate(cfg);
  const auto waypoints =
      cfg.waypoints_enu.empty() ? default_waypoints(cfg.duration_s) : cfg.waypoints_enu;
  const auto sats = cfg.satellites.empty() ? default_constellation() : cfg.satellites;

  const double lat = cfg.reference_lla.x() * kDegToRad;
  const double lon = cfg.reference_lla.y() * kDegToRad;
  const Vec3 ref_ecef = geodetic_to_ecef(lat, lon, cfg.reference_lla.z());
  const Eigen::Matrix3d enu = enu_rotation(lat, lon);

  Scenario out;
  out.truth_tropo_wet_m = cfg.tropo_wet_truth_m;
  out.zenith_dry_m = cfg.zenith_dry_m;

  const int num_epochs = static_cast<int>(std::floor(cfg.duration_s / cfg.interval_s)) + 1;
  Rng rng(cfg.rng_seed);

  // Fixed draw order keeps runs bit-stable: ambiguities first, then per
  // epoch the clock step followed by per-satellite observation draws.
  std::vector<double> ambiguity(sats.size());
  for (std::size_t s = 0; s < sats.size(); ++s) {
    ambiguity[s] = rng.normal(0.0, cfg.ambiguity_sigma_m);
  }

  double clock_walk = 0.0;
  for (int k = 0; k < num_epochs; ++k) {
    const double t = k * cfg.interval_s;
    const Vec3 pos = ref_ecef + enu.transpose() * interpolate_waypoints(waypoints, t);
    if (k > 0) clock_walk += rng.normal(0.0, cfg.clock_walk_sigma_m);
    const double clock = cfg.clock_drift_mps * t + clock_walk;

    std::vector<SatelliteState> epoch_sats;
    std::vector<EpochObservation> epoch_obs;
    for (std::size_t s = 0; s < sats.size(); ++s) {
      const SatelliteSpec& spec = sats[s];
      const double az = (spec.azimuth_deg + spec.azimuth_rate_dps * t) * kDegToRad;
      const double el = (spec.elevation_deg + spec.elevation_rate_dps * t) * kDegToRad;
      if (el <= cfg.elevation_mask_deg * kDegToRad || el > M_PI / 2.0) continue;

      // Satellite placed along the line of sight from the reference point;
      // the recorded elevation is re-derived from the actual receiver.
      const Vec3 los_enu(std::sin(az) * std::cos(el), std::cos(az) * std::cos(el), std::sin(el));
      SatelliteState st;
      st.sat_id = spec.id;
      st.position = ref_ecef + enu.transpose() * (spec.range_m * los_enu);
      st.clock_bias_m = spec.clock_bias_m;
      st.elevation_rad = elevation_azimuth(pos, st.position).first;
      st.cn0_dbhz = spec.cn0_dbhz;
      validate(st);

      const double sigma_rho = std::max(cfg.sigma_rho_m, dll_sigma_m(cfg.tracking, st.cn0_dbhz));
      const double sigma_phi = std::max(cfg.sigma_phi_m, pll_sigma_m(cfg.tracking, st.cn0_dbhz));

      EpochObservation obs;
      obs.epoch_s = t;
      obs.sat_id = spec.id;
      obs.pseudorange_m =
          model_pseudorange(st, pos, clock, cfg.tropo_wet_truth_m, cfg.zenith_dry_m) +
          rng.normal(0.0, sigma_rho);
      obs.carrier_phase_m = model_carrier_phase(st, pos, clock, cfg.tropo_wet_truth_m,
                                                cfg.zenith_dry_m, ambiguity[s]) +
                            rng.normal(0.0, sigma_phi);
      obs.contaminated = rng.bernoulli(cfg.contamination.probability) ? 1 : 0;
      if (obs.contaminated == 1) {
        obs.pseudorange_m += rng.normal(cfg.contamination.range_bias_mean_m,
                                        cfg.contamination.range_bias_sigma_m);
        obs.carrier_phase_m += rng.normal(cfg.contamination.phase_bias_mean_m,
                                          cfg.contamination.phase_bias_sigma_m);
      }
      epoch_sats.push_back(std::move(st));
      epoch_obs.push_back(std::move(obs));
    }
    if (epoch_sats.size() < 4) {
      throw std::runtime_error("scenario: fewer than 4 satellites visible at epoch " +
                               std::to_string(t));
    }

    out.epochs.push_back(t);
    out.truth_positions_ecef.push_back(pos);
    out.truth_clock_m.push_back(clock);
    out.satellites.push_back(std::move(epoch_sats));
    out.observations.push_back(std::move(epoch_obs));
  }
  return out;
}

}  // namespace bce::gnss
