#pragma once

#include "bce/factor_graph.hpp"

namespace bce {

enum class JacobianMode { analytic, central_difference };

struct SolverConfig {
  int max_iterations = 100;
  double abs_error_tol = 1e-6;   // stop when total error falls below this
  double rel_error_tol = 1e-8;   // stop when the relative decrease falls below this
  double lambda_init = 1e-4;
  double lambda_up = 10.0;       // multiplier on rejected steps
  double lambda_down = 10.0;     // divisor on accepted steps
  double lambda_max = 1e12;
  JacobianMode jacobian_mode = JacobianMode::analytic;
  double fd_step = 1e-6;         // base step for central differences
};

struct SolveReport {
  int iterations = 0;           // accepted steps
  double initial_error = 0.0;
  double final_error = 0.0;
  bool converged = false;
  std::vector<double> error_history;  // initial error followed by each accepted step
};

// Whitened, stacked linearization: rows follow factor insertion order, columns
// follow block insertion order. residual holds the whitened residuals (not
// negated), so the Gauss-Newton step solves J^T J dx = -J^T r.
struct LinearSystem {
  Mat jacobian;
  Vec residual;
};

// Per-factor jacobians of the *raw* residual, analytic when available and
// requested, central finite differences otherwise.
std::vector<Mat> factor_jacobians(const FactorGraph& graph, const Factor& f,
                                  const SolverConfig& config);

LinearSystem linearize(const FactorGraph& graph, const SolverConfig& config,
                       const std::vector<double>* weights = nullptr);

// Levenberg-Marquardt with multiplicative damping on the normal-equation
// diagonal. Updates the graph's block values in place (only accepted steps are
// committed) and returns the iteration report. `weights` holds one
// multiplier w_n >= 0 per factor; the whitened block is scaled by sqrt(w_n),
// equivalent to inflating that factor's covariance to cov/w_n.
SolveReport lm_solve(FactorGraph& graph, const SolverConfig& config,
                     const std::vector<double>* weights = nullptr);

}  // namespace bce
