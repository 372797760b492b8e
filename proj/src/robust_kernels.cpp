#include "bce/robust_kernels.hpp"

#include <cmath>

namespace bce {

KernelSpec make_kernel(KernelType type) {
  switch (type) {
    case KernelType::l2: return {type, 1.0};
    case KernelType::huber: return {type, kernel_defaults::huber_k};
    case KernelType::cauchy: return {type, kernel_defaults::cauchy_k};
    case KernelType::dcs: return {type, kernel_defaults::dcs_k};
  }
  throw std::invalid_argument("make_kernel: unknown kernel type");
}

KernelSpec make_kernel(KernelType type, double width) {
  if (type != KernelType::l2 && (!(width > 0.0) || !std::isfinite(width))) {
    throw std::invalid_argument("make_kernel: width must be positive and finite");
  }
  return {type, width};
}

KernelEval kernel_eval(const KernelSpec& spec, double x) {
  if (!std::isfinite(x)) {
    throw std::invalid_argument("kernel_eval: non-finite argument");
  }
  if (spec.type != KernelType::l2 && (!(spec.width > 0.0) || !std::isfinite(spec.width))) {
    throw std::invalid_argument("kernel_eval: width must be positive and finite");
  }
  const double k = spec.width;
  KernelEval out;
  switch (spec.type) {
    case KernelType::l2:
      out.weight = 1.0;
      out.rho = 0.5 * x * x;
      break;
    case KernelType::huber: {
      double ax = std::abs(x);
      if (ax <= k) {
        out.weight = 1.0;
        out.rho = 0.5 * x * x;
      } else {
        out.weight = k / ax;
        out.rho = k * (ax - 0.5 * k);
      }
      break;
    }
    case KernelType::cauchy: {
      double u = (x / k) * (x / k);
      out.weight = 1.0 / (1.0 + u);
      out.rho = 0.5 * k * k * std::log1p(u);
      break;
    }
    case KernelType::dcs: {
      double x2 = x * x;
      if (x2 <= k) {
        out.weight = 1.0;
        out.rho = 0.5 * x2;
      } else {
        double denom = x2 + k;
        out.weight = 4.0 * k * k / (denom * denom);
        out.rho = k * (3.0 * x2 - k) / (2.0 * denom);
      }
      break;
    }
  }
  out.psi = x * out.weight;
  return out;
}

IrlsReport irls_solve(FactorGraph& graph, const IrlsConfig& config) {
  if (config.max_outer < 1) {
    throw std::invalid_argument("irls_solve: max_outer must be >= 1");
  }
  if (!(config.outer_rel_tol > 0)) {
    throw std::invalid_argument("irls_solve: outer_rel_tol must be positive");
  }
  IrlsReport report;
  std::vector<double> weights(graph.num_factors(), 1.0);
  double prev = std::numeric_limits<double>::quiet_NaN();
  for (int outer = 0; outer < config.max_outer; ++outer) {
    // The first pass solves unweighted; residuals at an arbitrary initial
    // point would otherwise drive every measurement's weight toward zero.
    if (outer > 0) {
      auto residuals = graph.evaluate_residuals();
      for (std::size_t i = 0; i < residuals.size(); ++i) {
        if (graph.factor(i).group) {
          weights[i] = kernel_eval(config.kernel, residuals[i].whitened.norm()).weight;
        } else {
          weights[i] = 1.0;
        }
      }
    }
    report.last_solve = lm_solve(graph, config.solver, &weights);
    ++report.outer_iterations;
    double err = report.last_solve.final_error;
    report.error_history.push_back(err);
    if (outer > 0 && std::abs(err - prev) <= config.outer_rel_tol * std::max(std::abs(prev), 1e-300)) {
      report.converged = true;
      break;
    }
    prev = err;
  }
  report.final_weights = std::move(weights);
  return report;
}

}  // namespace bce
