#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>

#include "bce/bce_solver.hpp"
#include "bce/harness/graph_builder.hpp"
#include "bce/mixture.hpp"
#include "bce/robust_kernels.hpp"

namespace bce::harness {

enum class EstimatorKind { l2, huber, cauchy, dcs, maxmix, bce };

const char* estimator_name(EstimatorKind kind);
std::optional<EstimatorKind> parse_estimator(const std::string& name);

struct EstimatorConfig {
  EstimatorKind kind = EstimatorKind::l2;
  // Kernel width override for huber/cauchy/dcs; per-kernel default otherwise.
  std::optional<double> kernel_width;
  // Static two-component mixture per measurement: the a-priori model with
  // weight 0.9 plus an outlier component with the covariance inflated.
  double maxmix_outlier_weight = 0.1;
  double maxmix_covariance_scale = 10.0;
  int maxmix_max_rounds = 10;
  BceConfig bce;
};

struct EstimatorRun {
  EstimatorKind kind = EstimatorKind::l2;
  std::vector<Vec3> positions;
  std::vector<double> clocks_m;             // per epoch
  double tropo_wet_m = 0.0;
  std::map<std::string, double> ambiguities_m;  // by satellite id
  bool converged = false;
  bool failed = false;
  std::string error_message;
  double wall_seconds = 0.0;  // around the estimation only, no I/O
  double per_observation_seconds = 0.0;
  SolveReport solve;
  IrlsReport irls;  // kernel estimators
  BceReport bce;    // bce only
  // Final grouped raw residuals with their assigned component, for 2-D
  // (range, phase) groups; filled by the bce estimator only.
  std::vector<std::array<double, 3>> residual_scatter;
};

// Runs one estimator on its own copy of the graph. For BCE, an unset vb
// scale-matrix prior is derived from the graph's a-priori measurement
// covariance (S0 = nu0 * blockdiag of the first group's member covariances).
EstimatorRun run_estimator(FactorGraph graph, const EstimatorConfig& config,
                           const SolverConfig& solver, std::size_t num_epochs,
                           std::size_t num_observations);

}  // namespace bce::harness
