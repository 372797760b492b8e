// End-to-end acceptance suite. Each check prints one [PASS]/[FAIL] line with
// its runtime and a short measurement summary; the process exits nonzero if
// any check fails. Scenario settings are pinned so reruns are reproducible.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "bce/bce_solver.hpp"
#include "bce/factor_graph.hpp"
#include "bce/gnss/scenario.hpp"
#include "bce/gnss/tracking_noise.hpp"
#include "bce/harness/comparison.hpp"
#include "bce/harness/csv.hpp"
#include "bce/harness/estimators.hpp"
#include "bce/harness/graph_builder.hpp"
#include "bce/harness/metrics.hpp"
#include "bce/nlls_solver.hpp"
#include "bce/rng.hpp"
#include "bce/robust_kernels.hpp"
#include "bce/vb_gmm.hpp"

#include "../oracles/em_gmm.hpp"

namespace {

using namespace bce;
using namespace bce::harness;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string format(const char* fmt, ...) {
  char buf[512];
  va_list args;
  va_start(args, fmt);
  std::vsnprintf(buf, sizeof(buf), fmt, args);
  va_end(args);
  return buf;
}

// ---------------------------------------------------------------------------
// Pinned scenario and estimation settings shared by the end-to-end checks.

// Clean scenario where the per-epoch noise dominates any static leakage, so
// all estimators should land on comparable medians.
gnss::ScenarioConfig parity_scenario(std::uint64_t seed) {
  gnss::ScenarioConfig cfg;
  cfg.duration_s = 60.0;
  cfg.interval_s = 1.0;
  cfg.sigma_rho_m = 1.5;
  cfg.sigma_phi_m = 0.3;
  cfg.rng_seed = seed;
  return cfg;
}

EstimationSetup parity_setup() {
  EstimationSetup setup;
  setup.apriori_sigma_phi_m = 0.5;
  return setup;
}

// Biased-range scenario: every fifth observation on average carries a +10 m
// pseudorange bias.
gnss::ScenarioConfig contaminated_scenario(std::uint64_t seed) {
  gnss::ScenarioConfig cfg;
  cfg.duration_s = 120.0;
  cfg.interval_s = 1.0;
  cfg.sigma_rho_m = 1.5;
  cfg.sigma_phi_m = 0.05;
  cfg.contamination.probability = 0.2;
  cfg.contamination.range_bias_mean_m = 10.0;
  cfg.contamination.range_bias_sigma_m = 1.0;
  cfg.rng_seed = seed;
  return cfg;
}

EstimationSetup contaminated_setup() {
  EstimationSetup setup;
  setup.apriori_sigma_phi_m = 0.0833;
  return setup;
}

// Clean scenario whose generating noise sits below the a-priori model by the
// same ratio in both channels; used for the covariance recovery check.
gnss::ScenarioConfig recovery_scenario(std::uint64_t seed) {
  gnss::ScenarioConfig cfg;
  cfg.duration_s = 60.0;
  cfg.interval_s = 1.0;
  cfg.sigma_rho_m = 1.5;
  cfg.sigma_phi_m = 0.015;
  cfg.rng_seed = seed;
  return cfg;
}

// Results shared across checks: the adaptive estimator's outer-iteration
// counts from every tracked run, and the comparison used for the determinism
// and timing checks.
struct Shared {
  int bce_runs = 0;
  int max_outer = 0;
  bool comparison_ready = false;
  ComparisonResult comparison;
};

Shared g_shared;

struct SeedRuns {
  std::map<EstimatorKind, double> median;
  std::map<EstimatorKind, EstimatorRun> run;
};

SeedRuns run_estimators(const gnss::ScenarioConfig& scenario_cfg, const EstimationSetup& setup,
                        const std::vector<EstimatorKind>& kinds) {
  const gnss::Scenario scenario = gnss::generate_scenario(scenario_cfg);
  const ObservationSet obs = to_observation_set(scenario);
  const TruthSet truth = to_truth_set(scenario);
  const SolverConfig solver;
  const FactorGraph graph = build_graph(obs, setup);

  SeedRuns out;
  for (EstimatorKind kind : kinds) {
    EstimatorConfig cfg;
    cfg.kind = kind;
    EstimatorRun run = run_estimator(graph, cfg, solver, obs.epochs.size(), obs.total_rows());
    if (run.failed) {
      throw std::runtime_error(format("%s failed on seed %llu: %s", estimator_name(kind),
                                      static_cast<unsigned long long>(scenario_cfg.rng_seed),
                                      run.error_message.c_str()));
    }
    if (kind == EstimatorKind::bce) {
      ++g_shared.bce_runs;
      g_shared.max_outer = std::max(g_shared.max_outer, run.bce.outer_iterations);
    }
    out.median[kind] = rsos_horizontal_stats(run.positions, truth.positions_ecef).median;
    out.run[kind] = std::move(run);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Checks. Each returns pass/fail and fills a one-line measurement summary.

bool check_kernel_influence_identity(std::string& detail) {
  const KernelSpec kernels[] = {make_kernel(KernelType::huber), make_kernel(KernelType::cauchy),
                                make_kernel(KernelType::dcs)};
  const auto start = Clock::now();
  std::size_t samples = 0;
  std::size_t identity_misses = 0;
  double worst = 0.0;
  for (const KernelSpec& spec : kernels) {
    for (int i = 0; i < 10000; ++i) {
      // Offset grid over [-12.5, 12.5]; no sample lands on a kernel branch
      // point, so the central difference never straddles a kink.
      const double x = -12.5 + 2.5e-3 * i + 3e-4;
      const KernelEval e = kernel_eval(spec, x);
      if (e.psi != x * e.weight) ++identity_misses;
      const double h = 1e-6 * std::max(1.0, std::abs(x));
      const double cd = (kernel_eval(spec, x + h).rho - kernel_eval(spec, x - h).rho) / (2.0 * h);
      const double err = std::abs(cd - e.psi) / (1.0 + std::max(std::abs(cd), std::abs(e.psi)));
      worst = std::max(worst, err);
      ++samples;
    }
  }
  const double secs = seconds_since(start);
  detail = format("psi=x*w misses %zu of %zu; worst d(rho)/dx gap %.2e; %.3f s (limit 1 s)",
                  identity_misses, samples, worst, secs);
  return identity_misses == 0 && worst < 1e-6 && secs < 1.0;
}

bool check_quadratic_region_equivalence(std::string& detail) {
  const KernelSpec l2 = make_kernel(KernelType::l2);
  std::size_t samples = 0;
  std::size_t misses = 0;
  for (double k : {kernel_defaults::dcs_k, 2.5}) {
    const KernelSpec dcs = make_kernel(KernelType::dcs, k);
    const double limit = std::sqrt(k) * (1.0 - 1e-12);
    for (int i = 0; i < 10000; ++i) {
      const double x = limit * (-1.0 + 2.0 * i / 9999.0);
      const KernelEval a = kernel_eval(dcs, x);
      const KernelEval b = kernel_eval(l2, x);
      if (a.rho != b.rho || a.psi != b.psi || a.weight != b.weight) ++misses;
      ++samples;
    }
  }
  detail = format("%zu of %zu samples differ inside the quadratic region", misses, samples);
  return misses == 0;
}

bool check_free_energy_properties(std::string& detail) {
  double worst_drop = 0.0;
  double worst_perm = 0.0;
  int converged = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    Rng rng(seed);
    std::vector<Vec> xs;
    if (seed % 2 == 1) {
      const int n = 60 + 10 * static_cast<int>(seed % 5);
      const double sep = 2.0 + 0.5 * static_cast<double>(seed % 7);
      const double w = 0.2 + 0.03 * static_cast<double>(seed % 4);
      const double sigma = 0.5 + 0.1 * static_cast<double>(seed % 3);
      for (int i = 0; i < n; ++i) {
        Vec v(1);
        v << (rng.bernoulli(w) ? sep : -sep) + rng.normal(0.0, sigma);
        xs.push_back(v);
      }
    } else {
      for (int i = 0; i < 80; ++i) {
        Vec v(2);
        const bool hi = rng.bernoulli(0.35);
        v << (hi ? 4.0 : 0.0) + rng.normal(0.0, 0.7), (hi ? 3.0 : 0.0) + rng.normal(0.0, 0.7);
        xs.push_back(v);
      }
    }
    VbConfig cfg;
    const VbPosterior post = vb_fit(xs, cfg);
    converged += post.converged ? 1 : 0;
    const auto& fe = post.free_energy_history;
    for (std::size_t i = 1; i < fe.size(); ++i) {
      const double slack = 1e-8 * std::max(1.0, std::abs(fe[i - 1]));
      worst_drop = std::max(worst_drop, fe[i - 1] - fe[i] - slack);
    }
    std::vector<Vec> reversed(xs.rbegin(), xs.rend());
    const VbPosterior rev = vb_fit(reversed, cfg);
    const double diff = std::abs(fe.back() - rev.free_energy_history.back()) /
                        std::max(1.0, std::abs(fe.back()));
    worst_perm = std::max(worst_perm, diff);
  }
  detail = format("20 datasets, %d converged; worst monotonicity drop beyond slack %.2e; "
                  "worst reorder gap %.2e",
                  converged, worst_drop, worst_perm);
  return worst_drop <= 0.0 && worst_perm <= 1e-9;
}

bool check_two_cluster_recovery(std::string& detail) {
  const auto start = Clock::now();
  Rng rng(7);
  std::vector<double> raw;
  for (int i = 0; i < 100; ++i) raw.push_back(rng.normal(0.0, 0.1));
  for (int i = 0; i < 100; ++i) raw.push_back(rng.normal(10.0, 0.1));
  std::vector<Vec> xs;
  for (double x : raw) {
    Vec v(1);
    v << x;
    xs.push_back(v);
  }

  VbConfig cfg;
  const VbPosterior post = vb_fit(xs, cfg);
  const Gmm gmm = extract_point_gmm(post);
  if (gmm.size() != 2) {
    detail = format("expected 2 surviving components, got %zu", gmm.size());
    return false;
  }
  const int lo = gmm.components[0].mean[0] < gmm.components[1].mean[0] ? 0 : 1;
  const double mean_lo = gmm.components[lo].mean[0];
  const double mean_hi = gmm.components[1 - lo].mean[0];

  const oracle::EmResult em = oracle::em_fit_1d(raw, 2);
  const int em_lo = em.means[0] < em.means[1] ? 0 : 1;
  std::size_t agree = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const bool vb_low = hard_assign(post, i) == lo;
    const bool em_low = em.map_assignment[i] == em_lo;
    agree += (vb_low == em_low) ? 1 : 0;
  }
  const double secs = seconds_since(start);
  detail = format("means %.4f / %.4f; map agreement %zu/%zu; %.2f s (limit 5 s)", mean_lo,
                  mean_hi, agree, xs.size(), secs);
  return std::abs(mean_lo - 0.0) <= 0.1 && std::abs(mean_hi - 10.0) <= 0.1 &&
         agree * 100 >= xs.size() * 99 && secs < 5.0;
}

Factor linear_factor(const Mat& a, const Vec& y, GaussianNoise noise, const StateBlockKey& key) {
  Factor f;
  f.keys = {key};
  f.residual_fn = [a, y](const std::vector<Vec>& v) -> Vec { return y - a * v[0]; };
  f.jacobian_fn = [a](const std::vector<Vec>&) { return std::vector<Mat>{-a}; };
  f.noise = std::move(noise);
  f.tag = FactorTag::state_prior;
  return f;
}

bool check_wls_and_jacobians(std::string& detail) {
  // Closed-form weighted least squares on a 3-parameter linear problem.
  const StateBlockKey key{BlockKind::position3d, "x", 0};
  Mat a1(2, 3), a2(2, 3), a3(1, 3);
  a1 << 1, 2, 0, 0, 1, 1;
  a2 << 3, 0, 1, 1, 1, 1;
  a3 << 2, -1, 0.5;
  Vec y1(2), y2(2), y3(1), mu2(2);
  y1 << 1, -2;
  y2 << 0.5, 4;
  y3 << 1.2;
  mu2 << 0.3, -0.6;
  Mat c1 = Eigen::Vector2d(0.5, 2.0).asDiagonal();
  Mat c2(2, 2);
  c2 << 1.0, 0.3, 0.3, 0.8;
  Mat c3 = Mat::Identity(1, 1) * 0.09;
  const std::vector<double> weights = {1.0, 0.5, 2.0};

  FactorGraph g;
  g.add_state_block(key, Vec::Zero(3));
  g.add_factor(linear_factor(a1, y1, GaussianNoise(Vec::Zero(2), c1), key));
  g.add_factor(linear_factor(a2, y2, GaussianNoise(mu2, c2), key));
  g.add_factor(linear_factor(a3, y3, GaussianNoise(Vec::Zero(1), c3), key));

  SolverConfig tight;
  tight.abs_error_tol = 1e-14;
  tight.rel_error_tol = 1e-15;
  tight.lambda_init = 1e-8;
  lm_solve(g, tight, &weights);

  Mat normal = Mat::Zero(3, 3);
  Vec rhs = Vec::Zero(3);
  normal += weights[0] * a1.transpose() * c1.inverse() * a1;
  rhs += weights[0] * a1.transpose() * c1.inverse() * y1;
  normal += weights[1] * a2.transpose() * c2.inverse() * a2;
  rhs += weights[1] * a2.transpose() * c2.inverse() * (y2 - mu2);
  normal += weights[2] * a3.transpose() * c3.inverse() * a3;
  rhs += weights[2] * a3.transpose() * c3.inverse() * y3;
  const Vec closed_form = normal.ldlt().solve(rhs);
  const double wls_gap = (g.block_value(key) - closed_form).cwiseAbs().maxCoeff();

  // Analytic vs central-difference jacobians on every factor of a freshly
  // built positioning graph (measurements and priors alike).
  gnss::ScenarioConfig scfg;
  scfg.duration_s = 2.0;
  scfg.interval_s = 1.0;
  scfg.rng_seed = 3;
  const gnss::Scenario scenario = gnss::generate_scenario(scfg);
  const FactorGraph graph = build_graph(to_observation_set(scenario), EstimationSetup{});
  SolverConfig analytic;
  SolverConfig fd;
  fd.jacobian_mode = JacobianMode::central_difference;
  // Residuals pass through 1e7-scale ranges, so the difference step must sit
  // well above the resulting 1e-9 absolute rounding noise.
  fd.fd_step = 1e-3;
  double worst = 0.0;
  for (std::size_t i = 0; i < graph.num_factors(); ++i) {
    const Factor& f = graph.factor(i);
    const auto ja = factor_jacobians(graph, f, analytic);
    const auto jf = factor_jacobians(graph, f, fd);
    for (std::size_t b = 0; b < ja.size(); ++b) {
      const double scale = std::max(1.0, ja[b].cwiseAbs().maxCoeff());
      worst = std::max(worst, (ja[b] - jf[b]).cwiseAbs().maxCoeff() / scale);
    }
  }
  detail = format("solution gap %.2e (limit 1e-8) over %zu factors; worst jacobian gap %.2e "
                  "(limit 1e-4)",
                  wls_gap, graph.num_factors(), worst);
  return wls_gap < 1e-8 && worst < 1e-4;
}

bool check_clean_parity(std::string& detail) {
  const auto start = Clock::now();
  const std::vector<EstimatorKind> kinds = {EstimatorKind::l2, EstimatorKind::dcs,
                                            EstimatorKind::maxmix, EstimatorKind::bce};
  double worst_ratio = 0.0;
  std::string ratios;
  for (std::uint64_t seed : {7, 8, 9, 10, 11}) {
    const SeedRuns runs = run_estimators(parity_scenario(seed), parity_setup(), kinds);
    double lo = 1e300, hi = 0.0;
    for (const auto& [kind, median] : runs.median) {
      lo = std::min(lo, median);
      hi = std::max(hi, median);
    }
    const double ratio = hi / lo;
    worst_ratio = std::max(worst_ratio, ratio);
    ratios += format("%s%.3f", ratios.empty() ? "" : " ", ratio);
  }
  const double secs = seconds_since(start);
  detail = format("max/min median per seed: %s (limit 1.10); %.1f s (limit 120 s)",
                  ratios.c_str(), secs);
  return worst_ratio <= 1.10 && secs < 120.0;
}

bool check_contamination_advantage(std::string& detail) {
  const auto start = Clock::now();
  const std::vector<EstimatorKind> kinds = {EstimatorKind::l2, EstimatorKind::dcs,
                                            EstimatorKind::maxmix, EstimatorKind::bce};
  int beats_l2 = 0, beats_dcs = 0, beats_maxmix = 0, seeds = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const SeedRuns runs = run_estimators(contaminated_scenario(seed), contaminated_setup(), kinds);
    const double bce = runs.median.at(EstimatorKind::bce);
    beats_l2 += bce <= 0.9 * runs.median.at(EstimatorKind::l2) ? 1 : 0;
    beats_dcs += bce <= runs.median.at(EstimatorKind::dcs) ? 1 : 0;
    beats_maxmix += bce <= runs.median.at(EstimatorKind::maxmix) ? 1 : 0;
    ++seeds;
  }
  const double secs = seconds_since(start);
  detail = format("bce<=0.9*l2 in %d/%d (need 9); bce<=dcs %d/%d (need 7); bce<=maxmix %d/%d "
                  "(need 7); %.1f s (limit 600 s)",
                  beats_l2, seeds, beats_dcs, seeds, beats_maxmix, seeds, secs);
  return beats_l2 >= 9 && beats_dcs >= 7 && beats_maxmix >= 7 && secs < 600.0;
}

bool check_covariance_recovery(std::string& detail) {
  const gnss::ScenarioConfig scfg = recovery_scenario(7);
  const SeedRuns runs = run_estimators(scfg, EstimationSetup{}, {EstimatorKind::bce});
  const Gmm& gmm = runs.run.at(EstimatorKind::bce).bce.final_gmm;

  std::size_t dominant = 0;
  for (std::size_t i = 1; i < gmm.size(); ++i) {
    if (gmm.components[i].weight > gmm.components[dominant].weight) dominant = i;
  }
  const GaussianComponent& c = gmm.components[dominant];
  // Generating noise: the larger of the configured floor and the tracking
  // loop value, squared.
  const gnss::TrackingConfig tracking = scfg.tracking;
  const double true_var_rho =
      std::pow(std::max(scfg.sigma_rho_m, gnss::dll_sigma_m(tracking, 45.0)), 2);
  const double true_var_phi =
      std::pow(std::max(scfg.sigma_phi_m, gnss::pll_sigma_m(tracking, 45.0)), 2);
  const double r0 = c.covariance(0, 0) / true_var_rho;
  const double r1 = c.covariance(1, 1) / true_var_phi;
  detail = format("dominant weight %.3f (need >=0.8); variance ratios %.2f / %.2f "
                  "(need within [0.5, 2])",
                  c.weight, r0, r1);
  return c.weight >= 0.8 && r0 >= 0.5 && r0 <= 2.0 && r1 >= 0.5 && r1 <= 2.0;
}

bool check_scale_sweep_stability(std::string& detail) {
  const std::vector<double> scales = {0.01, 0.1, 1.0, 10.0, 100.0};
  std::vector<EstimatorConfig> estimators(2);
  estimators[0].kind = EstimatorKind::l2;
  estimators[1].kind = EstimatorKind::bce;
  // The sweep perturbs the a-priori covariance fed to the estimators; the
  // adaptive estimator's mixture prior is a fixed algorithm setting, pinned
  // here at the nominal (s = 1) model so it does not track the perturbation.
  const EstimationSetup setup = contaminated_setup();
  const double nu0 = 4.0;
  estimators[1].bce.vb.nu0 = nu0;
  estimators[1].bce.vb.S0 = nu0 *
      Eigen::Vector2d(setup.apriori_sigma_rho_m * setup.apriori_sigma_rho_m,
                      setup.apriori_sigma_phi_m * setup.apriori_sigma_phi_m)
          .asDiagonal();

  std::string spreads;
  bool ok = true;
  for (std::uint64_t seed : {1, 2, 3}) {
    const gnss::Scenario scenario = gnss::generate_scenario(contaminated_scenario(seed));
    const ObservationSet obs = to_observation_set(scenario);
    const TruthSet truth = to_truth_set(scenario);
    const auto cells = sensitivity_sweep(obs, truth, estimators, setup, SolverConfig{}, scales);
    std::map<std::string, std::pair<double, double>> range;  // name -> (min, max)
    for (const SweepCell& cell : cells) {
      if (cell.failed) {
        detail = format("%s failed at scale %g, seed %llu", cell.estimator.c_str(), cell.scale,
                        static_cast<unsigned long long>(seed));
        return false;
      }
      auto [it, fresh] = range.try_emplace(cell.estimator, cell.median_m, cell.median_m);
      if (!fresh) {
        it->second.first = std::min(it->second.first, cell.median_m);
        it->second.second = std::max(it->second.second, cell.median_m);
      }
    }
    const double l2_spread = range.at("l2").second - range.at("l2").first;
    const double bce_spread = range.at("bce").second - range.at("bce").first;
    spreads += format("%sseed %llu: %.2e vs %.2e", spreads.empty() ? "" : "; ",
                      static_cast<unsigned long long>(seed), bce_spread, l2_spread);
    ok = ok && bce_spread < l2_spread;
  }
  detail = format("median spread over scales, adaptive vs fixed: %s", spreads.c_str());
  return ok;
}

bool check_iteration_bound_and_determinism(std::string& detail) {
  const gnss::Scenario scenario = gnss::generate_scenario(contaminated_scenario(1));
  const ObservationSet obs = to_observation_set(scenario);
  const TruthSet truth = to_truth_set(scenario);
  std::vector<EstimatorConfig> estimators(4);
  estimators[0].kind = EstimatorKind::l2;
  estimators[1].kind = EstimatorKind::dcs;
  estimators[2].kind = EstimatorKind::maxmix;
  estimators[3].kind = EstimatorKind::bce;

  const ComparisonResult first =
      run_comparison(obs, truth, estimators, contaminated_setup(), SolverConfig{});
  const ComparisonResult second =
      run_comparison(obs, truth, estimators, contaminated_setup(), SolverConfig{});
  const std::string doc1 = comparison_results_json(first).dump();
  const std::string doc2 = comparison_results_json(second).dump();
  g_shared.comparison = first;
  g_shared.comparison_ready = true;

  bool entries_ok = true;
  for (const ComparisonEntry& e : first.entries) entries_ok = entries_ok && !e.failed;

  const bool outer_ok = g_shared.max_outer <= 100 && g_shared.bce_runs > 0;
  detail = format("result jsons %s (%zu bytes); outer iterations max %d over %d adaptive runs "
                  "(limit 100)",
                  doc1 == doc2 ? "identical" : "DIFFER", doc1.size(), g_shared.max_outer,
                  g_shared.bce_runs);
  return doc1 == doc2 && entries_ok && outer_ok;
}

bool check_runtime_ordering(std::string& detail) {
  if (!g_shared.comparison_ready) {
    detail = "comparison run unavailable (previous check failed before producing it)";
    return false;
  }
  std::map<std::string, double> per_obs;
  for (const ComparisonEntry& e : g_shared.comparison.entries) {
    per_obs[e.estimator] = e.per_observation_seconds;
  }
  const double l2 = per_obs.at("l2");
  const double maxmix = per_obs.at("maxmix");
  const double bce = per_obs.at("bce");
  detail = format("per-observation seconds: l2 %.2e, maxmix %.2e, bce %.2e", l2, maxmix, bce);
  return l2 <= maxmix && l2 < bce;
}

bool check_code_loop_boundaries(std::string& detail) {
  const auto [lower, upper] = gnss::dll_regime_boundaries(gnss::TrackingConfig{});
  detail = format("correlator spacing regime edges %.4f / %.4f (targets 0.106 / 0.333, "
                  "tolerance 0.005)",
                  lower, upper);
  return std::abs(lower - 0.106) <= 0.005 && std::abs(upper - 0.333) <= 0.005;
}

}  // namespace

int main() {
  struct Check {
    const char* name;
    bool (*fn)(std::string&);
  };
  const std::vector<Check> checks = {
      {"01 kernel influence identity", check_kernel_influence_identity},
      {"02 dcs quadratic region equals l2", check_quadratic_region_equivalence},
      {"03 vb free energy monotone and order invariant", check_free_energy_properties},
      {"04 vb two-cluster recovery matches em", check_two_cluster_recovery},
      {"05 weighted least squares and jacobian agreement", check_wls_and_jacobians},
      {"06 clean scenario estimator parity", check_clean_parity},
      {"07 contaminated scenario advantage", check_contamination_advantage},
      {"08 recovered covariance matches generating noise", check_covariance_recovery},
      {"09 a-priori scale sweep stability", check_scale_sweep_stability},
      {"10 outer iteration bound and determinism", check_iteration_bound_and_determinism},
      {"11 per-observation runtime ordering", check_runtime_ordering},
      {"12 code tracking regime boundaries", check_code_loop_boundaries},
  };

  int failures = 0;
  for (const Check& check : checks) {
    const auto start = Clock::now();
    bool ok = false;
    std::string detail;
    try {
      ok = check.fn(detail);
    } catch (const std::exception& e) {
      ok = false;
      detail = format("exception: %s", e.what());
    }
    std::printf("[%s] %s (%.1f s): %s\n", ok ? "PASS" : "FAIL", check.name,
                seconds_since(start), detail.c_str());
    std::fflush(stdout);
    failures += ok ? 0 : 1;
  }
  std::printf("%d/%zu checks passed\n", static_cast<int>(checks.size()) - failures,
              checks.size());
  return failures == 0 ? 0 : 1;
}
