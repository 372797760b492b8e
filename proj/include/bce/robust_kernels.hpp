#pragma once

#include "bce/nlls_solver.hpp"

namespace bce {

enum class KernelType { l2, huber, cauchy, dcs };

namespace kernel_defaults {
inline constexpr double huber_k = 1.345;
inline constexpr double cauchy_k = 2.3849;
inline constexpr double dcs_k = 1.0;
}  // namespace kernel_defaults

struct KernelSpec {
  KernelType type = KernelType::l2;
  double width = 1.0;  // ignored for l2
};

KernelSpec make_kernel(KernelType type);  // with the default width
KernelSpec make_kernel(KernelType type, double width);

struct KernelEval {
  double rho = 0.0;     // cost
  double psi = 0.0;     // influence, d rho / dx; computed as x * weight
  double weight = 0.0;  // IRLS weight, in (0, 1]
};

// x is the whitened residual norm (or any scalar for the symmetric kernels).
//   l2:     rho = x^2/2, psi = x, w = 1
//   huber:  |x| <= k quadratic, else rho = k(|x| - k/2), w = k/|x|
//   cauchy: rho = (k^2/2) log(1 + x^2/k^2), w = 1/(1 + x^2/k^2)
//   dcs:    x^2 <= k quadratic, else rho = k(3x^2 - k)/(2(x^2 + k)),
//           w = 4k^2/(x^2 + k)^2
// psi is always computed as x * weight so the identity psi = x*w holds
// exactly in floating point.
KernelEval kernel_eval(const KernelSpec& spec, double x);

struct IrlsConfig {
  KernelSpec kernel;
  SolverConfig solver;
  double outer_rel_tol = 1e-6;
  int max_outer = 25;
};

struct IrlsReport {
  int outer_iterations = 0;
  bool converged = false;
  std::vector<double> error_history;   // total weighted error per outer pass
  std::vector<double> final_weights;   // per factor
  SolveReport last_solve;
};

// Iteratively reweighted least squares: alternates (a) whitened residual norm
// e_n per factor, (b) kernel weight w_n at e_n for grouped factors (priors
// keep w = 1), (c) lm_solve with those weights, until the total weighted
// error change is below outer_rel_tol. The graph values are updated in place.
IrlsReport irls_solve(FactorGraph& graph, const IrlsConfig& config);

}  // namespace bce
