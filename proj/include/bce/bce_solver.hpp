#pragma once

#include <map>

#include "bce/nlls_solver.hpp"
#include "bce/vb_gmm.hpp"

namespace bce {

struct BceConfig {
  VbConfig vb;
  int max_outer_iterations = 100;
  double outer_error_rel_tol = 1e-3;
  bool keep_history = false;
};

struct BceIterationRecord {
  double grouped_error = 0.0;
  Gmm gmm;
  std::map<GroupId, int> assignment;
};

struct BceReport {
  int outer_iterations = 0;
  bool converged = false;
  Gmm final_gmm;
  std::map<GroupId, int> final_assignment;
  std::vector<double> grouped_error_history;
  std::vector<BceIterationRecord> history;  // populated when keep_history
  SolveReport last_solve;
};

// Raw (un-whitened) residuals of each factor group, stacked per group in
// member insertion order; groups returned in first-appearance order. All
// groups must stack to the same dimension.
std::pair<std::vector<Vec>, std::vector<GroupId>> collect_grouped_residuals(
    const FactorGraph& graph);

// Writes the assigned component's statistics onto each group's member
// factors: member i receives the matching segment of the mean and the
// matching diagonal block of the covariance (cross-member covariance is
// dropped; a group with a single stacked member keeps the full matrix).
// Factors without a group id are untouched.
void update_noise_from_gmm(FactorGraph& graph, const Gmm& gmm,
                           const std::map<GroupId, int>& assignment);

// Covariance-adaptation loop:
//   iteration 1:  lm_solve under the a-priori noise models, then fit a
//                 variational mixture to the grouped raw residuals;
//   iteration t:  rewrite each group's noise from its assigned component of
//                 the previous iteration's mixture, lm_solve, re-fit.
// After each fit the total error over grouped factors (under the models used
// for that iteration's solve) is recorded; the loop stops when its relative
// change falls below outer_error_rel_tol or at max_outer_iterations. The
// final rewrite is never applied after the last solve, so with
// max_outer_iterations = 1 the values are exactly those of a plain lm_solve
// followed by one model fit. A mixture-fit or solver failure aborts with the
// last good values and converged = false.
BceReport bce_solve(FactorGraph& graph, const BceConfig& config, const SolverConfig& solver);

}  // namespace bce
