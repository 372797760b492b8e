#include "bce/harness/graph_builder.hpp"

#include <cmath>
#include <stdexcept>

#include "bce/gnss/observation_model.hpp"

namespace bce::harness {
namespace {

using gnss::EpochObservation;
using gnss::SatelliteState;

StateBlockKey position_key(std::size_t epoch) {
  return {BlockKind::position3d, kReceiverId, static_cast<int>(epoch)};
}
StateBlockKey clock_key(std::size_t epoch) {
  return {BlockKind::clock_bias, kReceiverId, static_cast<int>(epoch)};
}
StateBlockKey tropo_key() {
  return {BlockKind::tropo_wet, kReceiverId, kStaticEpoch};
}
StateBlockKey ambiguity_key(const std::string& sat_id) {
  return {BlockKind::ambiguity, sat_id, kStaticEpoch};
}

// Residual of the pseudorange measurement given (position, clock, tropo_wet):
//   r = rho_obs - (|X_s - p| + (clk - clk_s) + (zd + tw) * M(el)).
// The satellite state and elevation are fixed per-observation metadata, so
// the model is differentiable in closed form:
//   dr/dp = +u^T with u = (X_s - p)/|X_s - p|,  dr/dclk = -1,
//   dr/dtw = -M(el); the carrier-phase residual adds dr/dN = -1.
Vec range_residual(const SatelliteState& sat, double rho_obs, double zenith_dry,
                   const std::vector<Vec>& x) {
  const Vec3 p = x[0];
  const double model =
      gnss::model_pseudorange(sat, p, x[1](0), x[2](0), zenith_dry);
  Vec r(1);
  r(0) = rho_obs - model;
  return r;
}

std::vector<Mat> range_jacobians(const SatelliteState& sat, const std::vector<Vec>& x) {
  const Vec3 p = x[0];
  const Vec3 u = (sat.position - p).normalized();
  Mat dp(1, 3), dclk(1, 1), dtw(1, 1);
  dp << u.x(), u.y(), u.z();
  dclk << -1.0;
  dtw << -gnss::elevation_mapping(sat.elevation_rad);
  return {dp, dclk, dtw};
}

void append_measurement_factors(FactorGraph& graph, const SatelliteState& sat,
                                const EpochObservation& obs, std::size_t epoch,
                                const EstimationSetup& setup) {
  const GroupId group = measurement_group_id(sat.sat_id, epoch);
  const double zd = setup.zenith_dry_m;
  const std::vector<StateBlockKey> range_keys = {position_key(epoch), clock_key(epoch),
                                                 tropo_key()};
  std::vector<StateBlockKey> phase_keys = range_keys;
  phase_keys.push_back(ambiguity_key(sat.sat_id));

  if (setup.joint_range_phase_factors) {
    Factor f;
    f.keys = phase_keys;
    f.residual_fn = [sat, obs, zd](const std::vector<Vec>& x) {
      Vec r(2);
      r(0) = range_residual(sat, obs.pseudorange_m, zd, x)(0);
      r(1) = range_residual(sat, obs.carrier_phase_m, zd, x)(0) - x[3](0);
      return r;
    };
    f.jacobian_fn = [sat](const std::vector<Vec>& x) {
      const std::vector<Mat> base = range_jacobians(sat, x);
      Mat dp = Mat::Zero(2, 3), dclk = Mat::Zero(2, 1), dtw = Mat::Zero(2, 1),
          damb = Mat::Zero(2, 1);
      dp.row(0) = base[0];
      dp.row(1) = base[0];
      dclk.col(0).setConstant(base[1](0, 0));
      dtw.col(0).setConstant(base[2](0, 0));
      damb(1, 0) = -1.0;
      return std::vector<Mat>{dp, dclk, dtw, damb};
    };
    Vec mean = Vec::Zero(2);
    Mat cov = Mat::Zero(2, 2);
    cov(0, 0) = setup.apriori_sigma_rho_m * setup.apriori_sigma_rho_m;
    cov(1, 1) = setup.apriori_sigma_phi_m * setup.apriori_sigma_phi_m;
    f.noise = GaussianNoise(mean, cov);
    f.tag = FactorTag::pseudorange;
    f.group = group;
    graph.add_factor(std::move(f));
    return;
  }

  Factor range;
  range.keys = range_keys;
  range.residual_fn = [sat, obs, zd](const std::vector<Vec>& x) {
    return range_residual(sat, obs.pseudorange_m, zd, x);
  };
  range.jacobian_fn = [sat](const std::vector<Vec>& x) { return range_jacobians(sat, x); };
  range.noise = GaussianNoise::isotropic(1, setup.apriori_sigma_rho_m);
  range.tag = FactorTag::pseudorange;
  range.group = group;
  graph.add_factor(std::move(range));

  Factor phase;
  phase.keys = phase_keys;
  phase.residual_fn = [sat, obs, zd](const std::vector<Vec>& x) {
    Vec r = range_residual(sat, obs.carrier_phase_m, zd, x);
    r(0) -= x[3](0);
    return r;
  };
  phase.jacobian_fn = [sat](const std::vector<Vec>& x) {
    std::vector<Mat> j = range_jacobians(sat, x);
    Mat damb(1, 1);
    damb << -1.0;
    j.push_back(damb);
    return j;
  };
  phase.noise = GaussianNoise::isotropic(1, setup.apriori_sigma_phi_m);
  phase.tag = FactorTag::carrier_phase;
  phase.group = group;
  graph.add_factor(std::move(phase));
}

// Coarse position fix from pseudoranges alone: a per-epoch 4-parameter
// (position + clock) least-squares solve started from zero, ignoring the
// troposphere states. Good to a few meters, plenty for linearization.
Vec3 coarse_position(const std::vector<SatelliteState>& sats,
                     const std::vector<EpochObservation>& obs, const EstimationSetup& setup,
                     const SolverConfig& solver) {
  FactorGraph g;
  g.add_state_block({BlockKind::position3d, kReceiverId, 0}, Vec::Zero(3));
  g.add_state_block({BlockKind::clock_bias, kReceiverId, 0}, Vec::Zero(1));
  g.add_state_block(tropo_key(), Vec::Zero(1));
  for (std::size_t i = 0; i < sats.size(); ++i) {
    const SatelliteState sat = sats[i];
    const double rho = obs[i].pseudorange_m;
    const double zd = setup.zenith_dry_m;
    Factor f;
    f.keys = {{BlockKind::position3d, kReceiverId, 0},
              {BlockKind::clock_bias, kReceiverId, 0},
              tropo_key()};
    f.residual_fn = [sat, rho, zd](const std::vector<Vec>& x) {
      return range_residual(sat, rho, zd, x);
    };
    f.jacobian_fn = [sat](const std::vector<Vec>& x) { return range_jacobians(sat, x); };
    f.noise = GaussianNoise::isotropic(1, setup.apriori_sigma_rho_m);
    f.tag = FactorTag::pseudorange;
    g.add_factor(std::move(f));
  }
  // Pin the unobserved troposphere state.
  Factor pin;
  pin.keys = {tropo_key()};
  pin.residual_fn = [](const std::vector<Vec>& x) { return x[0]; };
  pin.jacobian_fn = [](const std::vector<Vec>&) {
    return std::vector<Mat>{Mat::Identity(1, 1)};
  };
  pin.noise = GaussianNoise::isotropic(1, 1e-3);
  pin.tag = FactorTag::state_prior;
  g.add_factor(std::move(pin));

  SolverConfig cfg = solver;
  cfg.max_iterations = std::max(cfg.max_iterations, 50);
  lm_solve(g, cfg);
  return g.block_value({BlockKind::position3d, kReceiverId, 0});
}

}  // namespace

GroupId measurement_group_id(const std::string& sat_id, std::size_t epoch_index) {
  return sat_id + ":" + std::to_string(epoch_index);
}

FactorGraph build_graph(const ObservationSet& obs, const EstimationSetup& setup,
                        const SolverConfig& coarse_solver) {
  if (obs.epochs.empty()) throw std::invalid_argument("build_graph: no epochs");
  if (!(setup.apriori_sigma_rho_m > 0.0) || !(setup.apriori_sigma_phi_m > 0.0) ||
      !(setup.motion_prior_sigma_m > 0.0) || !(setup.first_position_prior_sigma_m > 0.0)) {
    throw std::invalid_argument("build_graph: sigmas must be positive");
  }
  for (std::size_t k = 0; k < obs.epochs.size(); ++k) {
    if (obs.satellites[k].size() < 4) {
      throw std::invalid_argument("build_graph: fewer than 4 satellites at epoch index " +
                                  std::to_string(k));
    }
  }

  FactorGraph graph;
  std::vector<Vec3> init_positions(obs.epochs.size());
  for (std::size_t k = 0; k < obs.epochs.size(); ++k) {
    init_positions[k] = coarse_position(obs.satellites[k], obs.observations[k], setup,
                                        coarse_solver);
  }

  for (std::size_t k = 0; k < obs.epochs.size(); ++k) {
    graph.add_state_block(position_key(k), init_positions[k]);
    graph.add_state_block(clock_key(k), Vec::Zero(1));
  }
  graph.add_state_block(tropo_key(), Vec::Zero(1));
  for (std::size_t k = 0; k < obs.epochs.size(); ++k) {
    for (const SatelliteState& sat : obs.satellites[k]) {
      if (!graph.has_block(ambiguity_key(sat.sat_id))) {
        graph.add_state_block(ambiguity_key(sat.sat_id), Vec::Zero(1));
      }
    }
  }

  for (std::size_t k = 0; k < obs.epochs.size(); ++k) {
    for (std::size_t i = 0; i < obs.satellites[k].size(); ++i) {
      append_measurement_factors(graph, obs.satellites[k][i], obs.observations[k][i], k, setup);
    }
  }

  for (std::size_t k = 0; k + 1 < obs.epochs.size(); ++k) {
    Factor f;
    f.keys = {position_key(k), position_key(k + 1)};
    f.residual_fn = [](const std::vector<Vec>& x) { return Vec(x[1] - x[0]); };
    f.jacobian_fn = [](const std::vector<Vec>&) {
      return std::vector<Mat>{-Mat::Identity(3, 3), Mat::Identity(3, 3)};
    };
    f.noise = GaussianNoise::isotropic(3, setup.motion_prior_sigma_m);
    f.tag = FactorTag::motion_prior;
    graph.add_factor(std::move(f));
  }

  Factor first;
  first.keys = {position_key(0)};
  const Vec anchor = init_positions[0];
  first.residual_fn = [anchor](const std::vector<Vec>& x) { return Vec(x[0] - anchor); };
  first.jacobian_fn = [](const std::vector<Vec>&) {
    return std::vector<Mat>{Mat::Identity(3, 3)};
  };
  first.noise = GaussianNoise::isotropic(3, setup.first_position_prior_sigma_m);
  first.tag = FactorTag::state_prior;
  graph.add_factor(std::move(first));

  if (setup.tropo_prior_sigma_m > 0.0) {
    Factor tropo;
    tropo.keys = {tropo_key()};
    tropo.residual_fn = [](const std::vector<Vec>& x) { return x[0]; };
    tropo.jacobian_fn = [](const std::vector<Vec>&) {
      return std::vector<Mat>{Mat::Identity(1, 1)};
    };
    tropo.noise = GaussianNoise::isotropic(1, setup.tropo_prior_sigma_m);
    tropo.tag = FactorTag::state_prior;
    graph.add_factor(std::move(tropo));
  }

  return graph;
}

std::vector<Vec3> extract_positions(const FactorGraph& graph, std::size_t num_epochs) {
  std::vector<Vec3> out(num_epochs);
  for (std::size_t k = 0; k < num_epochs; ++k) {
    out[k] = graph.block_value(position_key(k));
  }
  return out;
}

}  // namespace bce::harness
