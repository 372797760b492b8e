#include "bce/bce_solver.hpp"

#include <cmath>
#include <stdexcept>

namespace bce {
namespace {

// Rebuilds the record for iteration t after a solve: stacked residuals, the
// mixture fit, the grouped error under the models active for that solve.
struct IterationData {
  double grouped_error = 0.0;
  VbPosterior posterior;
  Gmm gmm;
  std::map<GroupId, int> assignment;
};

IterationData fit_iteration(FactorGraph& graph, const BceConfig& config) {
  IterationData out;
  out.grouped_error = graph.total_weighted_error(nullptr, /*grouped_only=*/true);

  auto [residuals, groups] = collect_grouped_residuals(graph);
  out.posterior = vb_fit(residuals, config.vb);
  out.gmm = extract_point_gmm(out.posterior);
  for (std::size_t n = 0; n < groups.size(); ++n) {
    out.assignment[groups[n]] = hard_assign(out.posterior, static_cast<int>(n));
  }
  return out;
}

}  // namespace

std::pair<std::vector<Vec>, std::vector<GroupId>> collect_grouped_residuals(
    const FactorGraph& graph) {
  std::vector<GroupId> groups = graph.group_order();
  std::vector<Vec> residuals;
  residuals.reserve(groups.size());

  Eigen::Index dim = -1;
  for (const GroupId& gid : groups) {
    Eigen::Index total = 0;
    const std::vector<std::size_t>& members = graph.group_members(gid);
    for (std::size_t f : members) total += graph.factor(f).noise.dim();

    Vec stacked(total);
    Eigen::Index at = 0;
    for (std::size_t f : members) {
      const Factor& factor = graph.factor(f);
      const Vec r = factor.residual_fn(graph.factor_block_values(factor));
      stacked.segment(at, r.size()) = r;
      at += r.size();
    }
    if (dim < 0) {
      dim = total;
    } else if (dim != total) {
      throw std::invalid_argument("grouped residuals have inconsistent dimension across groups");
    }
    residuals.push_back(std::move(stacked));
  }
  return {std::move(residuals), std::move(groups)};
}

void update_noise_from_gmm(FactorGraph& graph, const Gmm& gmm,
                           const std::map<GroupId, int>& assignment) {
  validate_gmm(gmm);
  for (const GroupId& gid : graph.group_order()) {
    auto it = assignment.find(gid);
    if (it == assignment.end()) {
      throw std::invalid_argument("no component assignment for group " + gid);
    }
    if (it->second < 0 || it->second >= static_cast<int>(gmm.size())) {
      throw std::invalid_argument("component assignment out of range for group " + gid);
    }
    const GaussianComponent& comp = gmm.components[static_cast<std::size_t>(it->second)];

    Eigen::Index at = 0;
    for (std::size_t f : graph.group_members(gid)) {
      const Eigen::Index d = graph.factor(f).noise.dim();
      if (at + d > comp.mean.size()) {
        throw std::invalid_argument("component dimension does not cover group " + gid);
      }
      graph.set_factor_noise(
          f, GaussianNoise(comp.mean.segment(at, d), comp.covariance.block(at, at, d, d)));
      at += d;
    }
    if (at != comp.mean.size()) {
      throw std::invalid_argument("component dimension does not match group " + gid);
    }
  }
}

BceReport bce_solve(FactorGraph& graph, const BceConfig& config, const SolverConfig& solver) {
  if (config.max_outer_iterations < 1) {
    throw std::invalid_argument("max_outer_iterations must be at least 1");
  }
  if (!(config.outer_error_rel_tol > 0.0) || !std::isfinite(config.outer_error_rel_tol)) {
    throw std::invalid_argument("outer_error_rel_tol must be positive and finite");
  }
  if (graph.group_order().empty()) {
    throw std::invalid_argument("covariance adaptation needs at least one factor group");
  }

  BceReport report;
  for (int t = 1; t <= config.max_outer_iterations; ++t) {
    try {
      if (t > 1) {
        update_noise_from_gmm(graph, report.final_gmm, report.final_assignment);
      }
      report.last_solve = lm_solve(graph, solver);

      IterationData it = fit_iteration(graph, config);
      report.outer_iterations = t;
      report.final_gmm = it.gmm;
      report.final_assignment = it.assignment;
      report.grouped_error_history.push_back(it.grouped_error);
      if (config.keep_history) {
        report.history.push_back({it.grouped_error, it.gmm, it.assignment});
      }
    } catch (const std::runtime_error&) {
      // Solver or mixture-fit failure: keep the last good values.
      report.converged = false;
      return report;
    }

    const std::size_t n = report.grouped_error_history.size();
    if (n >= 2) {
      const double prev = report.grouped_error_history[n - 2];
      const double cur = report.grouped_error_history[n - 1];
      if (std::abs(cur - prev) <=
          config.outer_error_rel_tol * std::max(std::abs(prev), 1e-12)) {
        report.converged = true;
        return report;
      }
    }
  }
  return report;
}

}  // namespace bce
