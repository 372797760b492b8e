#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "bce/bce_solver.hpp"
#include "bce/gnss/scenario.hpp"
#include "bce/harness/estimators.hpp"
#include "bce/harness/graph_builder.hpp"
#include "bce/nlls_solver.hpp"

namespace bce::harness {

// Everything the CLI reads from a config file. Sections and field names
// mirror the config structs; unknown keys are rejected so typos surface
// instead of silently using defaults.
struct HarnessConfig {
  gnss::ScenarioConfig scenario;
  SolverConfig solver;
  BceConfig bce;
  EstimationSetup estimation;
  std::optional<double> kernel_width;
  double maxmix_outlier_weight = 0.1;
  double maxmix_covariance_scale = 10.0;
  int maxmix_max_rounds = 10;
};

nlohmann::json load_json_file(const std::string& path);

void apply_scenario_config(const nlohmann::json& j, gnss::ScenarioConfig& cfg);
void apply_solver_config(const nlohmann::json& j, SolverConfig& cfg);
void apply_vb_config(const nlohmann::json& j, VbConfig& cfg);
void apply_bce_config(const nlohmann::json& j, BceConfig& cfg);
void apply_estimation_setup(const nlohmann::json& j, EstimationSetup& cfg);

// Top-level sections: "scenario", "solver", "bce", "estimation", "maxmix",
// and scalar "kernel_width". All optional.
HarnessConfig parse_harness_config(const nlohmann::json& doc);

// Applies the shared pieces of a HarnessConfig to one estimator's config.
EstimatorConfig make_estimator_config(const HarnessConfig& cfg, EstimatorKind kind);

}  // namespace bce::harness
