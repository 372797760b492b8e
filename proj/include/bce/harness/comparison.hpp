#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "bce/harness/estimators.hpp"
#include "bce/harness/metrics.hpp"

namespace bce::harness {

struct ComparisonEntry {
  std::string estimator;
  StatsSummary stats;  // valid only when !failed
  bool converged = false;
  bool failed = false;
  std::string error_message;
  double wall_seconds = 0.0;
  double per_observation_seconds = 0.0;
  std::uint64_t graph_hash = 0;
};

struct ComparisonResult {
  std::size_t num_epochs = 0;
  std::size_t num_observations = 0;
  std::vector<ComparisonEntry> entries;
  // Plot payloads from the first bce entry, when present.
  std::vector<Gmm> bce_gmm_history;
  std::vector<std::array<double, 3>> bce_residual_scatter;
};

// Runs every estimator on an identical fresh copy of the graph built from
// the observations; the copy's hash is recorded and checked against the
// first build. A failing estimator is recorded without aborting the table.
ComparisonResult run_comparison(const ObservationSet& obs, const TruthSet& truth,
                                const std::vector<EstimatorConfig>& estimators,
                                const EstimationSetup& setup, const SolverConfig& solver);

// Deterministic result document: metrics and convergence only, no timing.
nlohmann::json comparison_results_json(const ComparisonResult& result);
// Wall-clock figures, kept apart so result files are reproducible.
nlohmann::json comparison_timing_json(const ComparisonResult& result);
std::string comparison_table(const ComparisonResult& result);

struct SweepCell {
  double scale = 1.0;
  std::string estimator;
  double median_m = 0.0;
  bool failed = false;
};

// Re-runs the comparison with every a-priori measurement covariance scaled
// by s (sigma scaled by sqrt(s)); kernel widths stay in whitened units. The
// s = 1 cells coincide exactly with run_comparison on the same inputs.
std::vector<SweepCell> sensitivity_sweep(const ObservationSet& obs, const TruthSet& truth,
                                         const std::vector<EstimatorConfig>& estimators,
                                         const EstimationSetup& setup,
                                         const SolverConfig& solver,
                                         const std::vector<double>& scales);

std::string sweep_csv(const std::vector<SweepCell>& cells);

// Writes box_plot.csv (epoch_index, estimator, error_m), gmm_history.jsonl
// (one mixture per line), and residual_scatter.csv (range_res_m, phase_res_m,
// component_index) under dir.
void emit_plot_data(const std::string& dir, const ComparisonResult& result);

}  // namespace bce::harness
