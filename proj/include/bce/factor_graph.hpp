#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bce/types.hpp"

namespace bce {

enum class BlockKind { position3d, clock_bias, tropo_wet, ambiguity };

inline int block_dim(BlockKind kind) {
  return kind == BlockKind::position3d ? 3 : 1;
}

inline const char* block_kind_name(BlockKind kind) {
  switch (kind) {
    case BlockKind::position3d: return "position3d";
    case BlockKind::clock_bias: return "clock_bias";
    case BlockKind::tropo_wet: return "tropo_wet";
    case BlockKind::ambiguity: return "ambiguity";
  }
  return "?";
}

// Epoch index for blocks that are not tied to a single epoch.
inline constexpr int kStaticEpoch = -1;

struct StateBlockKey {
  BlockKind kind;
  std::string id;
  int epoch = kStaticEpoch;

  friend auto operator<=>(const StateBlockKey&, const StateBlockKey&) = default;
};

inline std::string to_string(const StateBlockKey& key) {
  std::string s = block_kind_name(key.kind);
  s += '/';
  s += key.id;
  if (key.epoch != kStaticEpoch) {
    s += '@';
    s += std::to_string(key.epoch);
  }
  return s;
}

// Gaussian noise model carrying a mean and a covariance. Whitening maps a raw
// residual r to L^{-1}(r - mean) where covariance = L L^T (lower Cholesky).
// The covariance is symmetrized and eigenvalue-floored on construction.
class GaussianNoise {
 public:
  GaussianNoise() = default;

  GaussianNoise(Vec mean, Mat covariance);

  // Zero-mean isotropic model with standard deviation `sigma`.
  static GaussianNoise isotropic(int dim, double sigma);

  int dim() const { return static_cast<int>(mean_.size()); }
  const Vec& mean() const { return mean_; }
  const Mat& covariance() const { return cov_; }
  const Mat& cholesky_lower() const { return chol_; }

  Vec whiten(const Vec& raw) const;       // L^{-1}(raw - mean)
  Vec unwhiten(const Vec& whitened) const;  // L*whitened + mean

 private:
  Vec mean_;
  Mat cov_;
  Mat chol_;
};

enum class FactorTag { pseudorange, carrier_phase, motion_prior, state_prior };

inline const char* factor_tag_name(FactorTag tag) {
  switch (tag) {
    case FactorTag::pseudorange: return "pseudorange";
    case FactorTag::carrier_phase: return "carrier_phase";
    case FactorTag::motion_prior: return "motion_prior";
    case FactorTag::state_prior: return "state_prior";
  }
  return "?";
}

using GroupId = std::string;

// A measurement (or prior) connecting one or more state blocks.
//   residual_fn  maps the involved block values (in key order) to r = y - h(X).
//   jacobian_fn  optional; returns dr/dx per involved block, in key order.
// Factors sharing a group id have their residuals stacked and re-modeled
// together by the covariance-adaptation loop; priors keep group = nullopt and
// are never re-weighted or re-modeled.
struct Factor {
  std::vector<StateBlockKey> keys;
  std::function<Vec(const std::vector<Vec>&)> residual_fn;
  std::function<std::vector<Mat>(const std::vector<Vec>&)> jacobian_fn;
  GaussianNoise noise;
  FactorTag tag = FactorTag::state_prior;
  std::optional<GroupId> group;
};

struct ResidualRecord {
  std::size_t factor_index = 0;
  Vec raw;
  Vec whitened;
};

class FactorGraph {
 public:
  void add_state_block(const StateBlockKey& key, const Vec& initial_value);
  // Validates keys, runs residual_fn once to check dimensions and finiteness.
  std::size_t add_factor(Factor factor);

  bool has_block(const StateBlockKey& key) const { return index_.count(key) > 0; }
  const Vec& block_value(const StateBlockKey& key) const;
  void set_block_value(const StateBlockKey& key, const Vec& value);

  std::size_t num_blocks() const { return blocks_.size(); }
  std::size_t num_factors() const { return factors_.size(); }
  int state_dimension() const { return state_dim_; }

  // Blocks in insertion order; also defines the column layout of the
  // linearized system.
  const std::vector<StateBlockKey>& block_order() const { return block_order_; }
  int block_offset(const StateBlockKey& key) const;

  const Factor& factor(std::size_t i) const { return factors_.at(i); }
  void set_factor_noise(std::size_t i, GaussianNoise noise);

  std::vector<Vec> factor_block_values(const Factor& f) const;
  std::vector<ResidualRecord> evaluate_residuals() const;

  // E = 1/2 * sum_n w_n ||whitened_n||^2; weights default to 1. `grouped_only`
  // restricts the sum to factors that carry a group id.
  double total_weighted_error(const std::vector<double>* weights = nullptr,
                              bool grouped_only = false) const;

  // Group ids in order of first appearance, and their member factor indices
  // in insertion order.
  const std::vector<GroupId>& group_order() const { return group_order_; }
  const std::vector<std::size_t>& group_members(const GroupId& g) const;

  // FNV-1a hash over the block layout, values, factor structure, and noise
  // models. Identical graphs (same build path) hash identically.
  std::uint64_t structure_hash() const;

 private:
  std::map<StateBlockKey, std::size_t> index_;
  std::vector<StateBlockKey> block_order_;
  std::vector<Vec> blocks_;
  std::vector<int> offsets_;
  int state_dim_ = 0;

  std::vector<Factor> factors_;
  std::map<GroupId, std::vector<std::size_t>> groups_;
  std::vector<GroupId> group_order_;
};

}  // namespace bce
