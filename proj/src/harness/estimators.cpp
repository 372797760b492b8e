#include "bce/harness/estimators.hpp"

#include <chrono>
#include <cmath>

namespace bce::harness {
namespace {

KernelType kernel_for(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::huber: return KernelType::huber;
    case EstimatorKind::cauchy: return KernelType::cauchy;
    case EstimatorKind::dcs: return KernelType::dcs;
    default: return KernelType::l2;
  }
}

// Alternates component selection and re-solving until the selection is
// stable. Every grouped factor gets a static two-component zero-mean mixture
// built from its a-priori covariance.
SolveReport maxmix_solve(FactorGraph& graph, const EstimatorConfig& cfg,
                         const SolverConfig& solver, bool* stable_out) {
  std::vector<std::size_t> indices;
  std::vector<Gmm> mixtures;
  for (const GroupId& gid : graph.group_order()) {
    for (std::size_t f : graph.group_members(gid)) {
      const Mat cov = graph.factor(f).noise.covariance();
      const int d = static_cast<int>(cov.rows());
      Gmm gmm;
      gmm.components.push_back(
          {1.0 - cfg.maxmix_outlier_weight, Vec::Zero(d), cov});
      gmm.components.push_back(
          {cfg.maxmix_outlier_weight, Vec::Zero(d), cfg.maxmix_covariance_scale * cov});
      validate_gmm(gmm);
      indices.push_back(f);
      mixtures.push_back(std::move(gmm));
    }
  }

  SolveReport report = lm_solve(graph, solver);
  std::vector<int> selection(indices.size(), 0);
  bool stable = false;
  for (int round = 0; round < cfg.maxmix_max_rounds && !stable; ++round) {
    stable = true;
    for (std::size_t i = 0; i < indices.size(); ++i) {
      const std::size_t f = indices[i];
      const Factor& factor = graph.factor(f);
      const Vec raw = factor.residual_fn(graph.factor_block_values(factor));
      const int c = max_mixture_select(mixtures[i], raw).first;
      if (c != selection[i]) {
        selection[i] = c;
        graph.set_factor_noise(f, GaussianNoise(mixtures[i].components[c].mean,
                                                mixtures[i].components[c].covariance));
        stable = false;
      }
    }
    if (!stable) report = lm_solve(graph, solver);
  }
  *stable_out = stable;
  return report;
}

}  // namespace

const char* estimator_name(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::l2: return "l2";
    case EstimatorKind::huber: return "huber";
    case EstimatorKind::cauchy: return "cauchy";
    case EstimatorKind::dcs: return "dcs";
    case EstimatorKind::maxmix: return "maxmix";
    case EstimatorKind::bce: return "bce";
  }
  return "?";
}

std::optional<EstimatorKind> parse_estimator(const std::string& name) {
  for (EstimatorKind k : {EstimatorKind::l2, EstimatorKind::huber, EstimatorKind::cauchy,
                          EstimatorKind::dcs, EstimatorKind::maxmix, EstimatorKind::bce}) {
    if (name == estimator_name(k)) return k;
  }
  return std::nullopt;
}

EstimatorRun run_estimator(FactorGraph graph, const EstimatorConfig& config,
                           const SolverConfig& solver, std::size_t num_epochs,
                           std::size_t num_observations) {
  EstimatorRun run;
  run.kind = config.kind;

  const auto start = std::chrono::steady_clock::now();
  try {
    switch (config.kind) {
      case EstimatorKind::l2: {
        run.solve = lm_solve(graph, solver);
        run.converged = run.solve.converged;
        break;
      }
      case EstimatorKind::huber:
      case EstimatorKind::cauchy:
      case EstimatorKind::dcs: {
        IrlsConfig irls;
        irls.kernel = config.kernel_width ? make_kernel(kernel_for(config.kind),
                                                        *config.kernel_width)
                                          : make_kernel(kernel_for(config.kind));
        irls.solver = solver;
        run.irls = irls_solve(graph, irls);
        run.solve = run.irls.last_solve;
        run.converged = run.irls.converged;
        break;
      }
      case EstimatorKind::maxmix: {
        bool stable = false;
        run.solve = maxmix_solve(graph, config, solver, &stable);
        run.converged = run.solve.converged && stable;
        break;
      }
      case EstimatorKind::bce: {
        BceConfig bcfg = config.bce;
        if (bcfg.vb.S0.size() == 0) {
          Mat apriori;
          {
            const GroupId& gid = graph.group_order().at(0);
            Eigen::Index dim = 0;
            for (std::size_t f : graph.group_members(gid)) dim += graph.factor(f).noise.dim();
            apriori = Mat::Zero(dim, dim);
            Eigen::Index at = 0;
            for (std::size_t f : graph.group_members(gid)) {
              const Mat& cov = graph.factor(f).noise.covariance();
              apriori.block(at, at, cov.rows(), cov.cols()) = cov;
              at += cov.rows();
            }
          }
          const double nu0 =
              bcfg.vb.nu0 > 0.0 ? bcfg.vb.nu0 : static_cast<double>(apriori.rows()) + 2.0;
          bcfg.vb.S0 = nu0 * apriori;
        }
        run.bce = bce_solve(graph, bcfg, solver);
        run.solve = run.bce.last_solve;
        run.converged = run.bce.converged;
        break;
      }
    }
  } catch (const std::exception& e) {
    run.failed = true;
    run.error_message = e.what();
  }
  const auto stop = std::chrono::steady_clock::now();
  run.wall_seconds = std::chrono::duration<double>(stop - start).count();
  run.per_observation_seconds =
      num_observations > 0 ? run.wall_seconds / static_cast<double>(num_observations) : 0.0;

  if (!run.failed) {
    run.positions = extract_positions(graph, num_epochs);
    for (std::size_t k = 0; k < num_epochs; ++k) {
      const StateBlockKey key{BlockKind::clock_bias, kReceiverId, static_cast<int>(k)};
      if (graph.has_block(key)) run.clocks_m.push_back(graph.block_value(key)(0));
    }
    const StateBlockKey tropo{BlockKind::tropo_wet, kReceiverId, kStaticEpoch};
    if (graph.has_block(tropo)) run.tropo_wet_m = graph.block_value(tropo)(0);
    for (const StateBlockKey& key : graph.block_order()) {
      if (key.kind == BlockKind::ambiguity) {
        run.ambiguities_m[key.id] = graph.block_value(key)(0);
      }
    }
    if (config.kind == EstimatorKind::bce && !run.bce.final_assignment.empty()) {
      const auto [residuals, groups] = collect_grouped_residuals(graph);
      for (std::size_t n = 0; n < groups.size(); ++n) {
        if (residuals[n].size() != 2) break;
        const auto it = run.bce.final_assignment.find(groups[n]);
        const double comp = it == run.bce.final_assignment.end()
                                ? -1.0
                                : static_cast<double>(it->second);
        run.residual_scatter.push_back({residuals[n](0), residuals[n](1), comp});
      }
    }
  }
  return run;
}

}  // namespace bce::harness
