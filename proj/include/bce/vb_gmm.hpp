#pragma once

#include <cstdint>

#include "bce/mixture.hpp"

namespace bce {

// Conjugate variational mixture fit. The prior on each component is
// Dirichlet(alpha0) x Normal(m0, Lambda/kappa0) x InverseWishart(S0, nu0),
// with Lambda the component covariance. Defaults left at zero/empty are
// resolved at fit time: nu0 -> d + 2, m0 -> zeros, S0 -> nu0 * I.
struct VbConfig {
  int max_components = 10;
  double alpha0 = 1.0;
  double kappa0 = 0.01;
  double nu0 = 0.0;
  Vec m0;
  Mat S0;
  double free_energy_rel_tol = 1e-8;
  int max_sweeps = 500;
  double prune_min_count = 2.0;
  std::uint64_t rng_seed = 0;
};

// Posterior after pruning: arrays are per surviving component.
// responsibilities has one row per input residual (input order preserved),
// renormalized over survivors.
struct VbPosterior {
  int dim = 0;
  Vec alpha;
  Vec kappa;
  Vec nu;
  std::vector<Vec> m;
  std::vector<Mat> S;
  Vec counts;  // N_m at convergence
  Mat responsibilities;
  std::vector<double> free_energy_history;  // one entry per completed sweep
  bool converged = false;
  int sweeps = 0;
};

// Coordinate-ascent fit. Initialization assigns each residual to the nearest
// of max_components centers chosen by k-means++ seeding (drawn from a
// lexicographically sorted copy of the data, so the result is invariant to
// input order). Deterministic given rng_seed. Components with final
// N_m < prune_min_count are dropped.
VbPosterior vb_fit(const std::vector<Vec>& residuals, const VbConfig& config);

// Exact closed-form variational free energy (evidence lower bound) of a
// posterior against the residual set and prior; no sampling involved.
double vb_free_energy(const std::vector<Vec>& residuals, const VbPosterior& posterior,
                      const VbConfig& config);

// Point-estimate mixture: w_m = alpha_m / sum(alpha), mu_m = m_m,
// cov_m = S_m / (nu_m - d - 1). Requires nu_m > d + 1 for every component.
Gmm extract_point_gmm(const VbPosterior& posterior);

// Component index for a residual seen during fitting: argmax responsibility,
// ties to the lowest index.
int hard_assign(const VbPosterior& posterior, std::size_t row);

// Component index for a new residual: most likely component of the mixture.
int hard_assign(const Gmm& gmm, const Vec& r);

}  // namespace bce
