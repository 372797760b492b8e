#include "bce/nlls_solver.hpp"

#include <cmath>

namespace bce {

namespace {

void validate(const SolverConfig& c) {
  if (c.max_iterations < 1) throw std::invalid_argument("solver: max_iterations must be >= 1");
  if (!(c.abs_error_tol > 0) || !(c.rel_error_tol > 0))
    throw std::invalid_argument("solver: tolerances must be positive");
  if (!(c.lambda_init > 0) || !(c.lambda_up > 1) || !(c.lambda_down > 1) ||
      !(c.lambda_max > c.lambda_init))
    throw std::invalid_argument("solver: invalid damping schedule");
  if (!(c.fd_step > 0)) throw std::invalid_argument("solver: fd_step must be positive");
}

void validate_weights(const FactorGraph& graph, const std::vector<double>* weights) {
  if (!weights) return;
  if (weights->size() != graph.num_factors())
    throw std::invalid_argument("solver: weight count != factor count");
  for (double w : *weights) {
    if (!(w >= 0.0) || !std::isfinite(w))
      throw std::invalid_argument("solver: weights must be finite and >= 0");
  }
}

std::vector<Mat> numeric_jacobians(const FactorGraph& graph, const Factor& f, double base_step) {
  std::vector<Vec> vals = graph.factor_block_values(f);
  Vec r0 = f.residual_fn(vals);
  std::vector<Mat> jac(f.keys.size());
  for (std::size_t k = 0; k < f.keys.size(); ++k) {
    Mat J(r0.size(), vals[k].size());
    for (Eigen::Index i = 0; i < vals[k].size(); ++i) {
      double x = vals[k](i);
      double h = base_step * std::max(1.0, std::abs(x));
      vals[k](i) = x + h;
      Vec rp = f.residual_fn(vals);
      vals[k](i) = x - h;
      Vec rm = f.residual_fn(vals);
      vals[k](i) = x;
      J.col(i) = (rp - rm) / (2.0 * h);
    }
    jac[k] = std::move(J);
  }
  return jac;
}

}  // namespace

std::vector<Mat> factor_jacobians(const FactorGraph& graph, const Factor& f,
                                  const SolverConfig& config) {
  if (config.jacobian_mode == JacobianMode::analytic && f.jacobian_fn) {
    return f.jacobian_fn(graph.factor_block_values(f));
  }
  return numeric_jacobians(graph, f, config.fd_step);
}

LinearSystem linearize(const FactorGraph& graph, const SolverConfig& config,
                       const std::vector<double>* weights) {
  validate_weights(graph, weights);
  Eigen::Index rows = 0;
  for (std::size_t i = 0; i < graph.num_factors(); ++i) {
    rows += graph.factor(i).noise.dim();
  }
  LinearSystem sys;
  sys.jacobian = Mat::Zero(rows, graph.state_dimension());
  sys.residual = Vec::Zero(rows);
  Eigen::Index row = 0;
  for (std::size_t i = 0; i < graph.num_factors(); ++i) {
    const Factor& f = graph.factor(i);
    const auto& L = f.noise.cholesky_lower();
    double sw = weights ? std::sqrt((*weights)[i]) : 1.0;
    Vec r = f.residual_fn(graph.factor_block_values(f));
    sys.residual.segment(row, r.size()) = sw * f.noise.whiten(r);
    auto jac = factor_jacobians(graph, f, config);
    for (std::size_t k = 0; k < f.keys.size(); ++k) {
      Mat wj = L.triangularView<Eigen::Lower>().solve(jac[k]);
      sys.jacobian.block(row, graph.block_offset(f.keys[k]), wj.rows(), wj.cols()) = sw * wj;
    }
    row += r.size();
  }
  return sys;
}

namespace {

// Accumulates H = J^T J and g = J^T r from per-factor blocks without forming
// the stacked jacobian; identical to linearize() in exact arithmetic.
void build_normal_equations(const FactorGraph& graph, const SolverConfig& config,
                            const std::vector<double>* weights, Mat& H, Vec& g) {
  const int n = graph.state_dimension();
  H.setZero(n, n);
  g.setZero(n);
  for (std::size_t i = 0; i < graph.num_factors(); ++i) {
    const Factor& f = graph.factor(i);
    double w = weights ? (*weights)[i] : 1.0;
    if (w == 0.0) continue;
    const auto& L = f.noise.cholesky_lower();
    Vec e = f.noise.whiten(f.residual_fn(graph.factor_block_values(f)));
    auto jac = factor_jacobians(graph, f, config);
    std::vector<Mat> wj(jac.size());
    for (std::size_t k = 0; k < jac.size(); ++k) {
      wj[k] = L.triangularView<Eigen::Lower>().solve(jac[k]);
    }
    for (std::size_t a = 0; a < f.keys.size(); ++a) {
      int oa = graph.block_offset(f.keys[a]);
      g.segment(oa, wj[a].cols()) += w * wj[a].transpose() * e;
      for (std::size_t b = 0; b < f.keys.size(); ++b) {
        int ob = graph.block_offset(f.keys[b]);
        H.block(oa, ob, wj[a].cols(), wj[b].cols()) += w * wj[a].transpose() * wj[b];
      }
    }
  }
}

std::vector<Vec> snapshot(const FactorGraph& graph) {
  std::vector<Vec> vals;
  vals.reserve(graph.num_blocks());
  for (const auto& key : graph.block_order()) {
    vals.push_back(graph.block_value(key));
  }
  return vals;
}

void restore(FactorGraph& graph, const std::vector<Vec>& vals) {
  for (std::size_t i = 0; i < vals.size(); ++i) {
    graph.set_block_value(graph.block_order()[i], vals[i]);
  }
}

void apply_step(FactorGraph& graph, const Vec& dx) {
  for (const auto& key : graph.block_order()) {
    int off = graph.block_offset(key);
    Vec v = graph.block_value(key);
    graph.set_block_value(key, v + dx.segment(off, v.size()));
  }
}

}  // namespace

SolveReport lm_solve(FactorGraph& graph, const SolverConfig& config,
                     const std::vector<double>* weights) {
  validate(config);
  validate_weights(graph, weights);
  if (graph.num_factors() == 0) {
    throw std::invalid_argument("lm_solve: graph has no factors");
  }

  SolveReport report;
  double err = graph.total_weighted_error(weights);
  if (!std::isfinite(err)) {
    throw std::runtime_error("lm_solve: non-finite error at initial values");
  }
  report.initial_error = err;
  report.error_history.push_back(err);

  const int n = graph.state_dimension();
  Mat H(n, n);
  Vec g(n);
  double lambda = config.lambda_init;

  while (report.iterations < config.max_iterations) {
    if (err < config.abs_error_tol) {
      report.converged = true;
      break;
    }
    build_normal_equations(graph, config, weights, H, g);
    Vec damp = H.diagonal().cwiseMax(1e-12);
    bool stepped = false;
    while (true) {
      Mat Hd = H;
      Hd.diagonal() += lambda * damp;
      Eigen::LLT<Mat> llt(Hd);
      bool ok = llt.info() == Eigen::Success;
      Vec dx;
      if (ok) {
        dx = llt.solve(-g);
        ok = dx.allFinite();
      }
      if (!ok) {
        lambda *= config.lambda_up;
        if (lambda > config.lambda_max) {
          throw std::runtime_error("lm_solve: normal equations unsolvable at maximum damping");
        }
        continue;
      }
      auto saved = snapshot(graph);
      apply_step(graph, dx);
      double cand = graph.total_weighted_error(weights);
      if (std::isfinite(cand) && cand < err) {
        double decrease = err - cand;
        err = cand;
        ++report.iterations;
        report.error_history.push_back(err);
        lambda = std::max(lambda / config.lambda_down, 1e-15);
        stepped = true;
        if (err < config.abs_error_tol || decrease <= config.rel_error_tol * std::max(err, 1e-300)) {
          report.converged = true;
        }
        break;
      }
      restore(graph, saved);
      // No decrease achievable along this damping schedule: we are at a
      // numerical stationary point.
      if (std::isfinite(cand) && std::abs(err - cand) <= config.rel_error_tol * std::max(err, 1e-300)) {
        report.converged = true;
        break;
      }
      lambda *= config.lambda_up;
      if (lambda > config.lambda_max) {
        report.converged = true;
        break;
      }
    }
    if (!stepped || report.converged) {
      break;
    }
  }
  report.final_error = err;
  return report;
}

}  // namespace bce
