#include "bce/harness/config.hpp"

#include <fstream>
#include <set>
#include <stdexcept>

namespace bce::harness {
namespace {

using nlohmann::json;

// Typed field access with unknown-key detection per section.
class Section {
 public:
  Section(const json& j, std::string name) : j_(j), name_(std::move(name)) {
    if (!j_.is_object()) {
      throw std::invalid_argument("config section '" + name_ + "' must be an object");
    }
  }

  bool has(const char* key) {
    seen_.insert(key);
    return j_.contains(key);
  }

  template <typename T>
  void get(const char* key, T& out) {
    if (!has(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw std::invalid_argument("config " + name_ + "." + key + ": " + e.what());
    }
  }

  const json& raw(const char* key) {
    seen_.insert(key);
    return j_.at(key);
  }

  void finish() const {
    for (const auto& item : j_.items()) {
      if (seen_.count(item.key()) == 0) {
        throw std::invalid_argument("config " + name_ + ": unknown key '" + item.key() + "'");
      }
    }
  }

 private:
  const json& j_;
  std::string name_;
  std::set<std::string> seen_;
};

Vec parse_vector(const json& j, const std::string& what) {
  if (!j.is_array()) throw std::invalid_argument(what + " must be an array");
  Vec v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  return v;
}

Mat parse_matrix(const json& j, const std::string& what) {
  if (!j.is_array() || j.empty()) throw std::invalid_argument(what + " must be a 2-D array");
  const std::size_t rows = j.size();
  const std::size_t cols = j[0].size();
  Mat m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    if (!j[r].is_array() || j[r].size() != cols) {
      throw std::invalid_argument(what + " rows must have equal length");
    }
    for (std::size_t c = 0; c < cols; ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = j[r][c].get<double>();
    }
  }
  return m;
}

void apply_tracking_config(const json& j, gnss::TrackingConfig& cfg) {
  Section s(j, "tracking");
  if (s.has("preset")) {
    const std::string preset = s.raw("preset").get<std::string>();
    if (preset == "low_grade") {
      cfg = gnss::low_grade_tracking();
    } else if (preset == "high_grade") {
      cfg = gnss::high_grade_tracking();
    } else {
      throw std::invalid_argument("tracking.preset must be low_grade or high_grade");
    }
  }
  s.get("fs_mhz", cfg.fs_mhz);
  s.get("d_el_chips", cfg.d_el_chips);
  s.get("b_rho_hz", cfg.b_rho_hz);
  s.get("b_phi_hz", cfg.b_phi_hz);
  s.get("b_fe_hz", cfg.b_fe_hz);
  s.get("chip_rate_hz", cfg.chip_rate_hz);
  s.get("integration_time_s", cfg.integration_time_s);
  s.finish();
}

void apply_contamination_config(const json& j, gnss::ContaminationConfig& cfg) {
  Section s(j, "contamination");
  s.get("probability", cfg.probability);
  s.get("range_bias_mean_m", cfg.range_bias_mean_m);
  s.get("range_bias_sigma_m", cfg.range_bias_sigma_m);
  s.get("phase_bias_mean_m", cfg.phase_bias_mean_m);
  s.get("phase_bias_sigma_m", cfg.phase_bias_sigma_m);
  s.finish();
}

gnss::SatelliteSpec parse_satellite(const json& j, std::size_t index) {
  Section s(j, "satellites[" + std::to_string(index) + "]");
  gnss::SatelliteSpec spec;
  s.get("id", spec.id);
  if (spec.id.empty()) throw std::invalid_argument("satellite entries need an id");
  s.get("azimuth_deg", spec.azimuth_deg);
  s.get("elevation_deg", spec.elevation_deg);
  s.get("azimuth_rate_dps", spec.azimuth_rate_dps);
  s.get("elevation_rate_dps", spec.elevation_rate_dps);
  s.get("cn0_dbhz", spec.cn0_dbhz);
  s.get("clock_bias_m", spec.clock_bias_m);
  s.get("range_m", spec.range_m);
  s.finish();
  return spec;
}

}  // namespace

nlohmann::json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

void apply_scenario_config(const json& j, gnss::ScenarioConfig& cfg) {
  Section s(j, "scenario");
  s.get("duration_s", cfg.duration_s);
  s.get("interval_s", cfg.interval_s);
  if (s.has("reference_lla")) {
    const Vec v = parse_vector(s.raw("reference_lla"), "scenario.reference_lla");
    if (v.size() != 3) throw std::invalid_argument("scenario.reference_lla needs 3 entries");
    cfg.reference_lla = v;
  }
  if (s.has("waypoints_enu")) {
    cfg.waypoints_enu.clear();
    for (const json& wp : s.raw("waypoints_enu")) {
      if (!wp.is_array() || wp.size() != 2) {
        throw std::invalid_argument("scenario.waypoints_enu entries must be [time, [e,n,u]]");
      }
      const Vec p = parse_vector(wp[1], "waypoint position");
      if (p.size() != 3) throw std::invalid_argument("waypoint positions need 3 entries");
      cfg.waypoints_enu.emplace_back(wp[0].get<double>(), Vec3(p));
    }
  }
  if (s.has("satellites")) {
    cfg.satellites.clear();
    const json& sats = s.raw("satellites");
    for (std::size_t i = 0; i < sats.size(); ++i) {
      cfg.satellites.push_back(parse_satellite(sats[i], i));
    }
  }
  if (s.has("tracking")) apply_tracking_config(s.raw("tracking"), cfg.tracking);
  s.get("sigma_rho_m", cfg.sigma_rho_m);
  s.get("sigma_phi_m", cfg.sigma_phi_m);
  if (s.has("contamination")) apply_contamination_config(s.raw("contamination"), cfg.contamination);
  s.get("zenith_dry_m", cfg.zenith_dry_m);
  s.get("tropo_wet_truth_m", cfg.tropo_wet_truth_m);
  s.get("clock_drift_mps", cfg.clock_drift_mps);
  s.get("clock_walk_sigma_m", cfg.clock_walk_sigma_m);
  s.get("ambiguity_sigma_m", cfg.ambiguity_sigma_m);
  s.get("elevation_mask_deg", cfg.elevation_mask_deg);
  s.get("rng_seed", cfg.rng_seed);
  s.finish();
}

void apply_solver_config(const json& j, SolverConfig& cfg) {
  Section s(j, "solver");
  s.get("max_iterations", cfg.max_iterations);
  s.get("abs_error_tol", cfg.abs_error_tol);
  s.get("rel_error_tol", cfg.rel_error_tol);
  s.get("lambda_init", cfg.lambda_init);
  s.get("lambda_up", cfg.lambda_up);
  s.get("lambda_down", cfg.lambda_down);
  s.get("lambda_max", cfg.lambda_max);
  if (s.has("jacobian_mode")) {
    const std::string mode = s.raw("jacobian_mode").get<std::string>();
    if (mode == "analytic") {
      cfg.jacobian_mode = JacobianMode::analytic;
    } else if (mode == "central_difference") {
      cfg.jacobian_mode = JacobianMode::central_difference;
    } else {
      throw std::invalid_argument("solver.jacobian_mode must be analytic or central_difference");
    }
  }
  s.get("fd_step", cfg.fd_step);
  s.finish();
}

void apply_vb_config(const json& j, VbConfig& cfg) {
  Section s(j, "vb");
  s.get("max_components", cfg.max_components);
  s.get("alpha0", cfg.alpha0);
  s.get("kappa0", cfg.kappa0);
  s.get("nu0", cfg.nu0);
  if (s.has("m0")) cfg.m0 = parse_vector(s.raw("m0"), "vb.m0");
  if (s.has("S0")) cfg.S0 = parse_matrix(s.raw("S0"), "vb.S0");
  s.get("free_energy_rel_tol", cfg.free_energy_rel_tol);
  s.get("max_sweeps", cfg.max_sweeps);
  s.get("prune_min_count", cfg.prune_min_count);
  s.get("rng_seed", cfg.rng_seed);
  s.finish();
}

void apply_bce_config(const json& j, BceConfig& cfg) {
  Section s(j, "bce");
  s.get("max_outer_iterations", cfg.max_outer_iterations);
  s.get("outer_error_rel_tol", cfg.outer_error_rel_tol);
  s.get("keep_history", cfg.keep_history);
  if (s.has("vb")) apply_vb_config(s.raw("vb"), cfg.vb);
  s.finish();
}

void apply_estimation_setup(const json& j, EstimationSetup& cfg) {
  Section s(j, "estimation");
  s.get("apriori_sigma_rho_m", cfg.apriori_sigma_rho_m);
  s.get("apriori_sigma_phi_m", cfg.apriori_sigma_phi_m);
  s.get("motion_prior_sigma_m", cfg.motion_prior_sigma_m);
  s.get("first_position_prior_sigma_m", cfg.first_position_prior_sigma_m);
  s.get("tropo_prior_sigma_m", cfg.tropo_prior_sigma_m);
  s.get("zenith_dry_m", cfg.zenith_dry_m);
  s.get("joint_range_phase_factors", cfg.joint_range_phase_factors);
  s.finish();
}

HarnessConfig parse_harness_config(const json& doc) {
  HarnessConfig cfg;
  Section s(doc, "top level");
  if (s.has("scenario")) apply_scenario_config(s.raw("scenario"), cfg.scenario);
  if (s.has("solver")) apply_solver_config(s.raw("solver"), cfg.solver);
  if (s.has("bce")) apply_bce_config(s.raw("bce"), cfg.bce);
  if (s.has("estimation")) apply_estimation_setup(s.raw("estimation"), cfg.estimation);
  if (s.has("maxmix")) {
    Section m(s.raw("maxmix"), "maxmix");
    m.get("outlier_weight", cfg.maxmix_outlier_weight);
    m.get("covariance_scale", cfg.maxmix_covariance_scale);
    m.get("max_rounds", cfg.maxmix_max_rounds);
    m.finish();
  }
  if (s.has("kernel_width")) {
    cfg.kernel_width = s.raw("kernel_width").get<double>();
  }
  s.finish();
  return cfg;
}

EstimatorConfig make_estimator_config(const HarnessConfig& cfg, EstimatorKind kind) {
  EstimatorConfig out;
  out.kind = kind;
  out.kernel_width = cfg.kernel_width;
  out.maxmix_outlier_weight = cfg.maxmix_outlier_weight;
  out.maxmix_covariance_scale = cfg.maxmix_covariance_scale;
  out.maxmix_max_rounds = cfg.maxmix_max_rounds;
  out.bce = cfg.bce;
  return out;
}

}  // namespace bce::harness
