#pragma once

#include "bce/factor_graph.hpp"
#include "bce/harness/csv.hpp"
#include "bce/nlls_solver.hpp"

namespace bce::harness {

// Noise model and prior settings for graph construction. The a-priori sigmas
// set every measurement factor's covariance and are deliberately independent
// of whatever noise the data was generated with.
struct EstimationSetup {
  double apriori_sigma_rho_m = 2.5;
  double apriori_sigma_phi_m = 0.025;
  double motion_prior_sigma_m = 20.0;
  double first_position_prior_sigma_m = 100.0;
  // Loose zero-mean prior on the residual wet zenith delay, which is nearly
  // unobservable over short windows; 0 disables it.
  double tropo_prior_sigma_m = 0.5;
  double zenith_dry_m = 2.3;
  // One 2-D factor per (satellite, epoch) instead of separate range/phase
  // factors; adapted noise then keeps the cross covariance.
  bool joint_range_phase_factors = false;
};

// State block ids used by the builder ("rx" receiver blocks, satellite ids
// for ambiguities).
inline const char* kReceiverId = "rx";

// Per epoch: position3d + clock_bias; one static tropo_wet; one ambiguity per
// satellite id. Per (satellite, epoch): a pseudorange and a carrier-phase
// factor sharing group id "<sat>:<epoch index>". Weak zero-mean motion priors
// chain consecutive positions and a loose prior anchors the first epoch at
// its initial value. Positions start from a coarse pseudorange-only per-epoch
// solve; clock, troposphere, and ambiguities start at zero. Throws when an
// epoch has fewer than 4 satellites.
FactorGraph build_graph(const ObservationSet& obs, const EstimationSetup& setup,
                        const SolverConfig& coarse_solver = {});

// Estimated receiver positions per epoch, in epoch order.
std::vector<Vec3> extract_positions(const FactorGraph& graph, std::size_t num_epochs);

// Group id convention shared by the builder and the plot emitters.
GroupId measurement_group_id(const std::string& sat_id, std::size_t epoch_index);

}  // namespace bce::harness
