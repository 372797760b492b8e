// Command-line driver: synthetic GNSS scenario generation, single-estimator
// solves, estimator comparisons, a-priori covariance sensitivity sweeps, and
// runtime benchmarks. Exit codes: 0 success, 1 usage error, 2 runtime failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "bce/harness/comparison.hpp"
#include "bce/harness/config.hpp"
#include "bce/harness/csv.hpp"

namespace {

namespace fs = std::filesystem;
using namespace bce;
using namespace bce::harness;

HarnessConfig load_config(const std::string& path) {
  if (path.empty()) return {};
  return parse_harness_config(load_json_file(path));
}

std::vector<EstimatorConfig> estimator_list(const HarnessConfig& cfg, const std::string& csv) {
  std::vector<EstimatorConfig> out;
  std::stringstream ss(csv);
  std::string token;
  while (std::getline(ss, token, ',')) {
    if (token.empty()) continue;
    const auto kind = parse_estimator(token);
    if (!kind) throw CLI::ValidationError("--estimators", "unknown estimator '" + token + "'");
    out.push_back(make_estimator_config(cfg, *kind));
  }
  if (out.empty()) throw CLI::ValidationError("--estimators", "no estimators given");
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << text;
}

void write_json(const std::string& path, const nlohmann::json& doc) {
  write_text(path, doc.dump(2) + "\n");
}

int cmd_simulate(const std::string& config_path, const std::string& out_dir) {
  const HarnessConfig cfg = load_config(config_path);
  const gnss::Scenario scenario = gnss::generate_scenario(cfg.scenario);
  fs::create_directories(out_dir);
  const ObservationSet obs = to_observation_set(scenario);
  write_observations_csv((fs::path(out_dir) / "observations.csv").string(), obs);
  write_truth_csv((fs::path(out_dir) / "truth.csv").string(), to_truth_set(scenario));
  std::printf("wrote %zu epochs, %zu observation rows to %s\n", scenario.epochs.size(),
              obs.total_rows(), out_dir.c_str());
  return 0;
}

int cmd_solve(const std::string& obs_path, const std::string& truth_path,
              const std::string& estimator, double kernel_width, bool has_width,
              const std::string& config_path, const std::string& out_dir) {
  HarnessConfig cfg = load_config(config_path);
  if (has_width) cfg.kernel_width = kernel_width;

  const auto kind = parse_estimator(estimator);
  if (!kind) throw CLI::ValidationError("--estimator", "unknown estimator '" + estimator + "'");

  const ObservationSet obs = load_observations(obs_path);
  const FactorGraph graph = build_graph(obs, cfg.estimation, cfg.solver);
  EstimatorRun run = run_estimator(graph, make_estimator_config(cfg, *kind), cfg.solver,
                                   obs.epochs.size(), obs.total_rows());

  fs::create_directories(out_dir);
  nlohmann::json report;
  report["estimator"] = estimator_name(*kind);
  report["converged"] = run.converged;
  report["failed"] = run.failed;
  report["error_message"] = run.error_message;

  if (!run.failed) {
    {
      std::ofstream out((fs::path(out_dir) / "solution.csv").string());
      if (!out) throw std::runtime_error("cannot write solution.csv");
      out << "epoch_s,x_m,y_m,z_m,clock_m\n";
      char buf[200];
      for (std::size_t k = 0; k < obs.epochs.size(); ++k) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%.17g\n", obs.epochs[k],
                      run.positions[k].x(), run.positions[k].y(), run.positions[k].z(),
                      run.clocks_m[k]);
        out << buf;
      }
    }
    report["tropo_wet_m"] = run.tropo_wet_m;
    report["ambiguities_m"] = run.ambiguities_m;
    report["solve_iterations"] = run.solve.iterations;
    report["initial_error"] = run.solve.initial_error;
    report["final_error"] = run.solve.final_error;
    if (*kind == EstimatorKind::bce) {
      report["bce_outer_iterations"] = run.bce.outer_iterations;
      report["bce_grouped_error_history"] = run.bce.grouped_error_history;
      report["final_gmm"] = gmm_to_json(run.bce.final_gmm);
      if (!run.bce.history.empty()) {
        std::ofstream out((fs::path(out_dir) / "gmm_history.jsonl").string());
        for (const auto& rec : run.bce.history) out << gmm_to_json(rec.gmm).dump() << '\n';
      }
    }
    if (!truth_path.empty()) {
      const TruthSet truth = load_truth(truth_path);
      const StatsSummary stats = rsos_horizontal_stats(run.positions, truth.positions_ecef);
      report["median_m"] = stats.median;
      report["variance_m2"] = stats.variance;
      report["max_m"] = stats.max;
      std::printf("%s: median %.4f m, variance %.6f m^2, max %.4f m\n", estimator.c_str(),
                  stats.median, stats.variance, stats.max);
    }
  }
  write_json((fs::path(out_dir) / "report.json").string(), report);
  if (run.failed) {
    std::fprintf(stderr, "estimator failed: %s\n", run.error_message.c_str());
    return 2;
  }
  return 0;
}

int cmd_compare(const std::string& obs_path, const std::string& truth_path,
                const std::string& estimators, const std::string& config_path,
                const std::string& out_dir) {
  HarnessConfig cfg = load_config(config_path);
  cfg.bce.keep_history = true;  // the comparison emits the model-evolution trace
  const std::vector<EstimatorConfig> specs = estimator_list(cfg, estimators);

  const ObservationSet obs = load_observations(obs_path);
  const TruthSet truth = load_truth(truth_path);
  const ComparisonResult result = run_comparison(obs, truth, specs, cfg.estimation, cfg.solver);

  fs::create_directories(out_dir);
  write_json((fs::path(out_dir) / "results.json").string(), comparison_results_json(result));
  write_json((fs::path(out_dir) / "timing.json").string(), comparison_timing_json(result));
  const std::string table = comparison_table(result);
  write_text((fs::path(out_dir) / "table.txt").string(), table);
  emit_plot_data(out_dir, result);
  std::fputs(table.c_str(), stdout);
  return 0;
}

int cmd_sweep(const std::string& obs_path, const std::string& truth_path,
              const std::string& scales_csv, const std::string& estimators,
              const std::string& config_path, const std::string& out_dir) {
  const HarnessConfig cfg = load_config(config_path);
  const std::vector<EstimatorConfig> specs = estimator_list(cfg, estimators);

  std::vector<double> scales;
  std::stringstream ss(scales_csv);
  std::string token;
  while (std::getline(ss, token, ',')) {
    if (!token.empty()) scales.push_back(std::stod(token));
  }
  if (scales.empty()) throw CLI::ValidationError("--scales", "no scales given");

  const ObservationSet obs = load_observations(obs_path);
  const TruthSet truth = load_truth(truth_path);
  const std::vector<SweepCell> cells =
      sensitivity_sweep(obs, truth, specs, cfg.estimation, cfg.solver, scales);

  fs::create_directories(out_dir);
  const std::string csv = sweep_csv(cells);
  write_text((fs::path(out_dir) / "sweep.csv").string(), csv);
  std::fputs(csv.c_str(), stdout);
  return 0;
}

int cmd_bench(const std::string& obs_path, const std::string& truth_path,
              const std::string& estimators, int repeats, const std::string& config_path,
              const std::string& out_dir) {
  HarnessConfig cfg = load_config(config_path);
  const std::vector<EstimatorConfig> specs = estimator_list(cfg, estimators);

  const ObservationSet obs = load_observations(obs_path);
  const TruthSet truth = load_truth(truth_path);

  ComparisonResult best;
  for (int i = 0; i < repeats; ++i) {
    ComparisonResult r = run_comparison(obs, truth, specs, cfg.estimation, cfg.solver);
    if (i == 0) {
      best = std::move(r);
    } else {
      for (std::size_t e = 0; e < best.entries.size(); ++e) {
        if (r.entries[e].wall_seconds < best.entries[e].wall_seconds) {
          best.entries[e].wall_seconds = r.entries[e].wall_seconds;
          best.entries[e].per_observation_seconds = r.entries[e].per_observation_seconds;
        }
      }
    }
  }

  fs::create_directories(out_dir);
  write_json((fs::path(out_dir) / "timing.json").string(), comparison_timing_json(best));
  const std::string table = comparison_table(best);
  write_text((fs::path(out_dir) / "bench.txt").string(), table);
  std::fputs(table.c_str(), stdout);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Robust GNSS batch estimation with measurement-error covariance adaptation"};
  app.require_subcommand(1);

  std::string config_path, out_dir, obs_path, truth_path;
  std::string estimator = "l2";
  std::string estimators = "l2,dcs,maxmix,bce";
  std::string scales = "0.01,0.1,1,10,100";
  double kernel_width = 0.0;
  int repeats = 1;

  CLI::App* simulate = app.add_subcommand("simulate", "Generate a synthetic scenario");
  simulate->add_option("--config", config_path, "JSON config file");
  simulate->add_option("--out", out_dir, "Output directory")->required();

  CLI::App* solve = app.add_subcommand("solve", "Run one estimator on an observation file");
  solve->add_option("--obs", obs_path, "Observation CSV")->required();
  solve->add_option("--truth", truth_path, "Truth CSV (enables error metrics)");
  solve->add_option("--estimator", estimator, "l2|huber|cauchy|dcs|maxmix|bce")->required();
  CLI::Option* width_opt = solve->add_option("--kernel-width", kernel_width,
                                             "Kernel width override (whitened units)");
  solve->add_option("--config", config_path, "JSON config file");
  solve->add_option("--out", out_dir, "Output directory")->required();

  CLI::App* compare = app.add_subcommand("compare", "Run several estimators and tabulate");
  compare->add_option("--obs", obs_path, "Observation CSV")->required();
  compare->add_option("--truth", truth_path, "Truth CSV")->required();
  compare->add_option("--estimators", estimators, "Comma-separated estimator list");
  compare->add_option("--config", config_path, "JSON config file");
  compare->add_option("--out", out_dir, "Output directory")->required();

  CLI::App* sweep = app.add_subcommand("sweep", "A-priori covariance sensitivity sweep");
  sweep->add_option("--obs", obs_path, "Observation CSV")->required();
  sweep->add_option("--truth", truth_path, "Truth CSV")->required();
  sweep->add_option("--scales", scales, "Comma-separated covariance scale factors");
  sweep->add_option("--estimators", estimators, "Comma-separated estimator list");
  sweep->add_option("--config", config_path, "JSON config file");
  sweep->add_option("--out", out_dir, "Output directory")->required();

  CLI::App* bench = app.add_subcommand("bench", "Runtime benchmark (timing-focused compare)");
  bench->add_option("--obs", obs_path, "Observation CSV")->required();
  bench->add_option("--truth", truth_path, "Truth CSV")->required();
  bench->add_option("--estimators", estimators, "Comma-separated estimator list");
  bench->add_option("--repeats", repeats, "Repetitions, fastest time kept")
      ->check(CLI::PositiveNumber);
  bench->add_option("--config", config_path, "JSON config file");
  bench->add_option("--out", out_dir, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(config_path, out_dir);
    if (solve->parsed()) {
      return cmd_solve(obs_path, truth_path, estimator, kernel_width, width_opt->count() > 0,
                       config_path, out_dir);
    }
    if (compare->parsed()) {
      return cmd_compare(obs_path, truth_path, estimators, config_path, out_dir);
    }
    if (sweep->parsed()) {
      return cmd_sweep(obs_path, truth_path, scales, estimators, config_path, out_dir);
    }
    if (bench->parsed()) {
      return cmd_bench(obs_path, truth_path, estimators, repeats, config_path, out_dir);
    }
  } catch (const CLI::ValidationError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 1;
}
