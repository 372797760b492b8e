#include "bce/harness/comparison.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace bce::harness {
namespace {

void check_alignment(const ObservationSet& obs, const TruthSet& truth) {
  if (obs.epochs.size() != truth.epochs.size()) {
    throw std::invalid_argument("observations and truth disagree on epoch count");
  }
  for (std::size_t k = 0; k < obs.epochs.size(); ++k) {
    if (std::abs(obs.epochs[k] - truth.epochs[k]) > 1e-9) {
      throw std::invalid_argument("observations and truth disagree at epoch index " +
                                  std::to_string(k));
    }
  }
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  return out;
}

}  // namespace

ComparisonResult run_comparison(const ObservationSet& obs, const TruthSet& truth,
                                const std::vector<EstimatorConfig>& estimators,
                                const EstimationSetup& setup, const SolverConfig& solver) {
  check_alignment(obs, truth);

  const FactorGraph base = build_graph(obs, setup);
  const std::uint64_t base_hash = base.structure_hash();

  ComparisonResult result;
  result.num_epochs = obs.epochs.size();
  result.num_observations = obs.total_rows();

  for (const EstimatorConfig& cfg : estimators) {
    FactorGraph copy = base;
    const std::uint64_t hash = copy.structure_hash();
    if (hash != base_hash) {
      throw std::logic_error("graph copy hash mismatch before estimator run");
    }

    EstimatorRun run = run_estimator(std::move(copy), cfg, solver, result.num_epochs,
                                     result.num_observations);

    ComparisonEntry entry;
    entry.estimator = estimator_name(cfg.kind);
    entry.converged = run.converged;
    entry.failed = run.failed;
    entry.error_message = run.error_message;
    entry.wall_seconds = run.wall_seconds;
    entry.per_observation_seconds = run.per_observation_seconds;
    entry.graph_hash = hash;
    if (!run.failed) {
      entry.stats = rsos_horizontal_stats(run.positions, truth.positions_ecef);
    }
    result.entries.push_back(std::move(entry));

    if (cfg.kind == EstimatorKind::bce && !run.failed && result.bce_gmm_history.empty()) {
      if (!run.bce.history.empty()) {
        for (const auto& rec : run.bce.history) result.bce_gmm_history.push_back(rec.gmm);
      } else if (!run.bce.final_gmm.components.empty()) {
        result.bce_gmm_history.push_back(run.bce.final_gmm);
      }
      result.bce_residual_scatter = run.residual_scatter;
    }
  }
  return result;
}

nlohmann::json comparison_results_json(const ComparisonResult& result) {
  nlohmann::json doc;
  doc["num_epochs"] = result.num_epochs;
  doc["num_observations"] = result.num_observations;
  doc["estimators"] = nlohmann::json::array();
  for (const ComparisonEntry& e : result.entries) {
    nlohmann::json j;
    j["name"] = e.estimator;
    j["converged"] = e.converged;
    j["failed"] = e.failed;
    j["error_message"] = e.error_message;
    j["graph_hash"] = e.graph_hash;
    if (!e.failed) {
      j["median_m"] = e.stats.median;
      j["variance_m2"] = e.stats.variance;
      j["max_m"] = e.stats.max;
      j["per_epoch_errors_m"] = e.stats.per_epoch_errors;
    }
    doc["estimators"].push_back(std::move(j));
  }
  return doc;
}

nlohmann::json comparison_timing_json(const ComparisonResult& result) {
  nlohmann::json doc;
  doc["estimators"] = nlohmann::json::array();
  for (const ComparisonEntry& e : result.entries) {
    nlohmann::json j;
    j["name"] = e.estimator;
    j["wall_seconds"] = e.wall_seconds;
    j["per_observation_seconds"] = e.per_observation_seconds;
    doc["estimators"].push_back(std::move(j));
  }
  return doc;
}

std::string comparison_table(const ComparisonResult& result) {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof(line), "%-8s %12s %14s %12s %14s %10s\n", "name", "median_m",
                "variance_m2", "max_m", "s_per_obs", "converged");
  out << line;
  for (const ComparisonEntry& e : result.entries) {
    if (e.failed) {
      std::snprintf(line, sizeof(line), "%-8s FAILED: %s\n", e.estimator.c_str(),
                    e.error_message.c_str());
    } else {
      std::snprintf(line, sizeof(line), "%-8s %12.4f %14.6f %12.4f %14.3e %10s\n",
                    e.estimator.c_str(), e.stats.median, e.stats.variance, e.stats.max,
                    e.per_observation_seconds, e.converged ? "yes" : "no");
    }
    out << line;
  }
  return out.str();
}

std::vector<SweepCell> sensitivity_sweep(const ObservationSet& obs, const TruthSet& truth,
                                         const std::vector<EstimatorConfig>& estimators,
                                         const EstimationSetup& setup,
                                         const SolverConfig& solver,
                                         const std::vector<double>& scales) {
  std::vector<SweepCell> cells;
  for (double s : scales) {
    if (!(s > 0.0) || !std::isfinite(s)) {
      throw std::invalid_argument("sweep scales must be positive");
    }
    EstimationSetup scaled = setup;
    const double root = std::sqrt(s);
    scaled.apriori_sigma_rho_m *= root;
    scaled.apriori_sigma_phi_m *= root;

    const ComparisonResult result = run_comparison(obs, truth, estimators, scaled, solver);
    for (const ComparisonEntry& e : result.entries) {
      SweepCell cell;
      cell.scale = s;
      cell.estimator = e.estimator;
      cell.failed = e.failed;
      cell.median_m = e.failed ? std::numeric_limits<double>::quiet_NaN() : e.stats.median;
      cells.push_back(std::move(cell));
    }
  }
  return cells;
}

std::string sweep_csv(const std::vector<SweepCell>& cells) {
  std::ostringstream out;
  out << "scale,estimator,median_m\n";
  char buf[96];
  for (const SweepCell& c : cells) {
    std::snprintf(buf, sizeof(buf), "%.17g,%s,%.17g\n", c.scale, c.estimator.c_str(),
                  c.median_m);
    out << buf;
  }
  return out.str();
}

void emit_plot_data(const std::string& dir, const ComparisonResult& result) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);

  {
    std::ofstream out = open_out((fs::path(dir) / "box_plot.csv").string());
    out << "epoch_index,estimator,error_m\n";
    char buf[96];
    for (const ComparisonEntry& e : result.entries) {
      if (e.failed) continue;
      for (std::size_t k = 0; k < e.stats.per_epoch_errors.size(); ++k) {
        std::snprintf(buf, sizeof(buf), "%zu,%s,%.17g\n", k, e.estimator.c_str(),
                      e.stats.per_epoch_errors[k]);
        out << buf;
      }
    }
  }
  {
    std::ofstream out = open_out((fs::path(dir) / "gmm_history.jsonl").string());
    for (const Gmm& g : result.bce_gmm_history) out << gmm_to_json(g).dump() << '\n';
  }
  {
    std::ofstream out = open_out((fs::path(dir) / "residual_scatter.csv").string());
    out << "range_res_m,phase_res_m,component_index\n";
    char buf[96];
    for (const auto& row : result.bce_residual_scatter) {
      std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%d\n", row[0], row[1],
                    static_cast<int>(row[2]));
      out << buf;
    }
  }
}

}  // namespace bce::harness
