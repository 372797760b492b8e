#include "bce/factor_graph.hpp"

#include <cmath>

namespace bce {

namespace {

void check_finite(const Vec& v, const char* what) {
  if (!v.allFinite()) {
    throw std::invalid_argument(std::string(what) + ": non-finite entries");
  }
}

}  // namespace

GaussianNoise::GaussianNoise(Vec mean, Mat covariance) : mean_(std::move(mean)) {
  check_finite(mean_, "GaussianNoise mean");
  const auto n = mean_.size();
  if (covariance.rows() != n || covariance.cols() != n) {
    throw std::invalid_argument("GaussianNoise: covariance shape does not match mean");
  }
  if (!covariance.allFinite()) {
    throw std::invalid_argument("GaussianNoise: non-finite covariance");
  }
  double scale = std::max(1.0, covariance.cwiseAbs().maxCoeff());
  if ((covariance - covariance.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale) {
    throw std::invalid_argument("GaussianNoise: covariance is not symmetric");
  }
  cov_ = floor_covariance(covariance);
  Eigen::LLT<Mat> llt(cov_);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error("GaussianNoise: Cholesky failed after flooring");
  }
  chol_ = llt.matrixL();
}

GaussianNoise GaussianNoise::isotropic(int dim, double sigma) {
  if (dim <= 0 || !(sigma > 0.0) || !std::isfinite(sigma)) {
    throw std::invalid_argument("GaussianNoise::isotropic: need dim > 0, sigma > 0");
  }
  return GaussianNoise(Vec::Zero(dim), Mat::Identity(dim, dim) * sigma * sigma);
}

Vec GaussianNoise::whiten(const Vec& raw) const {
  if (raw.size() != mean_.size()) {
    throw std::invalid_argument("GaussianNoise::whiten: dimension mismatch");
  }
  return chol_.triangularView<Eigen::Lower>().solve(raw - mean_);
}

Vec GaussianNoise::unwhiten(const Vec& whitened) const {
  if (whitened.size() != mean_.size()) {
    throw std::invalid_argument("GaussianNoise::unwhiten: dimension mismatch");
  }
  return chol_.triangularView<Eigen::Lower>() * whitened + mean_;
}

void FactorGraph::add_state_block(const StateBlockKey& key, const Vec& initial_value) {
  if (index_.count(key)) {
    throw std::invalid_argument("add_state_block: duplicate key " + to_string(key));
  }
  if (initial_value.size() != block_dim(key.kind)) {
    throw std::invalid_argument("add_state_block: wrong dimension for " + to_string(key));
  }
  check_finite(initial_value, "add_state_block");
  index_[key] = blocks_.size();
  block_order_.push_back(key);
  blocks_.push_back(initial_value);
  offsets_.push_back(state_dim_);
  state_dim_ += static_cast<int>(initial_value.size());
}

std::size_t FactorGraph::add_factor(Factor factor) {
  if (factor.keys.empty()) {
    throw std::invalid_argument("add_factor: factor has no keys");
  }
  if (!factor.residual_fn) {
    throw std::invalid_argument("add_factor: missing residual function");
  }
  for (const auto& key : factor.keys) {
    if (!index_.count(key)) {
      throw std::out_of_range("add_factor: unknown block " + to_string(key));
    }
  }
  Vec r = factor.residual_fn(factor_block_values(factor));
  if (!r.allFinite()) {
    throw std::invalid_argument("add_factor: residual non-finite at current values");
  }
  if (factor.noise.dim() != r.size()) {
    throw std::invalid_argument("add_factor: noise dim " + std::to_string(factor.noise.dim()) +
                                " != residual dim " + std::to_string(r.size()));
  }
  if (factor.jacobian_fn) {
    auto jac = factor.jacobian_fn(factor_block_values(factor));
    if (jac.size() != factor.keys.size()) {
      throw std::invalid_argument("add_factor: jacobian count != key count");
    }
    for (std::size_t i = 0; i < jac.size(); ++i) {
      if (jac[i].rows() != r.size() || jac[i].cols() != block_dim(factor.keys[i].kind)) {
        throw std::invalid_argument("add_factor: jacobian shape mismatch for key " +
                                    to_string(factor.keys[i]));
      }
    }
  }
  std::size_t idx = factors_.size();
  if (factor.group) {
    auto [it, fresh] = groups_.try_emplace(*factor.group);
    if (fresh) {
      group_order_.push_back(*factor.group);
    }
    it->second.push_back(idx);
  }
  factors_.push_back(std::move(factor));
  return idx;
}

const Vec& FactorGraph::block_value(const StateBlockKey& key) const {
  auto it = index_.find(key);
  if (it == index_.end()) {
    throw std::out_of_range("block_value: unknown block " + to_string(key));
  }
  return blocks_[it->second];
}

void FactorGraph::set_block_value(const StateBlockKey& key, const Vec& value) {
  auto it = index_.find(key);
  if (it == index_.end()) {
    throw std::out_of_range("set_block_value: unknown block " + to_string(key));
  }
  if (value.size() != blocks_[it->second].size()) {
    throw std::invalid_argument("set_block_value: wrong dimension for " + to_string(key));
  }
  check_finite(value, "set_block_value");
  blocks_[it->second] = value;
}

int FactorGraph::block_offset(const StateBlockKey& key) const {
  auto it = index_.find(key);
  if (it == index_.end()) {
    throw std::out_of_range("block_offset: unknown block " + to_string(key));
  }
  return offsets_[it->second];
}

void FactorGraph::set_factor_noise(std::size_t i, GaussianNoise noise) {
  Factor& f = factors_.at(i);
  if (noise.dim() != f.noise.dim()) {
    throw std::invalid_argument("set_factor_noise: dimension mismatch");
  }
  f.noise = std::move(noise);
}

std::vector<Vec> FactorGraph::factor_block_values(const Factor& f) const {
  std::vector<Vec> vals;
  vals.reserve(f.keys.size());
  for (const auto& key : f.keys) {
    vals.push_back(blocks_[index_.at(key)]);
  }
  return vals;
}

std::vector<ResidualRecord> FactorGraph::evaluate_residuals() const {
  std::vector<ResidualRecord> out;
  out.reserve(factors_.size());
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    const Factor& f = factors_[i];
    ResidualRecord rec;
    rec.factor_index = i;
    rec.raw = f.residual_fn(factor_block_values(f));
    if (!rec.raw.allFinite()) {
      throw std::runtime_error("evaluate_residuals: non-finite residual at factor " +
                               std::to_string(i));
    }
    rec.whitened = f.noise.whiten(rec.raw);
    out.push_back(std::move(rec));
  }
  return out;
}

double FactorGraph::total_weighted_error(const std::vector<double>* weights,
                                         bool grouped_only) const {
  if (weights && weights->size() != factors_.size()) {
    throw std::invalid_argument("total_weighted_error: weight count != factor count");
  }
  double err = 0.0;
  for (std::size_t i = 0; i < factors_.size(); ++i) {
    const Factor& f = factors_[i];
    if (grouped_only && !f.group) {
      continue;
    }
    Vec e = f.noise.whiten(f.residual_fn(factor_block_values(f)));
    double w = weights ? (*weights)[i] : 1.0;
    err += 0.5 * w * e.squaredNorm();
  }
  return err;
}

const std::vector<std::size_t>& FactorGraph::group_members(const GroupId& g) const {
  auto it = groups_.find(g);
  if (it == groups_.end()) {
    throw std::out_of_range("group_members: unknown group " + g);
  }
  return it->second;
}

namespace {

struct Fnv {
  std::uint64_t h = 1469598103934665603ULL;
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= b[i];
      h *= 1099511628211ULL;
    }
  }
  void num(double v) { bytes(&v, sizeof v); }
  void num(int v) { bytes(&v, sizeof v); }
  void str(const std::string& s) { bytes(s.data(), s.size()); }
  void mat(const Mat& m) {
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      for (Eigen::Index r = 0; r < m.rows(); ++r) num(m(r, c));
  }
  void vec(const Vec& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) num(v(i));
  }
};

}  // namespace

std::uint64_t FactorGraph::structure_hash() const {
  Fnv fnv;
  for (std::size_t i = 0; i < block_order_.size(); ++i) {
    const auto& key = block_order_[i];
    fnv.num(static_cast<int>(key.kind));
    fnv.str(key.id);
    fnv.num(key.epoch);
    fnv.vec(blocks_[i]);
  }
  for (const auto& f : factors_) {
    fnv.num(static_cast<int>(f.tag));
    fnv.str(f.group ? *f.group : std::string("-"));
    for (const auto& key : f.keys) {
      fnv.num(static_cast<int>(key.kind));
      fnv.str(key.id);
      fnv.num(key.epoch);
    }
    fnv.vec(f.noise.mean());
    fnv.mat(f.noise.covariance());
  }
  return fnv.h;
}

}  // namespace bce
