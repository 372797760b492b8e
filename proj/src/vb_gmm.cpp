#include "bce/vb_gmm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "bce/rng.hpp"

namespace bce {

namespace {

double digamma(double x) {
  // Asymptotic expansion after shifting x above 6; adequate for the
  // tolerances used here (|err| < 1e-12 for x > 0).
  if (!(x > 0.0)) {
    throw std::invalid_argument("digamma: argument must be positive");
  }
  double result = 0.0;
  while (x < 6.0) {
    result -= 1.0 / x;
    x += 1.0;
  }
  double inv = 1.0 / x;
  double inv2 = inv * inv;
  result += std::log(x) - 0.5 * inv -
            inv2 * (1.0 / 12.0 - inv2 * (1.0 / 120.0 - inv2 * (1.0 / 252.0 - inv2 / 240.0)));
  return result;
}

double log_multivariate_gamma(double a, int d) {
  double r = 0.25 * d * (d - 1) * std::log(M_PI);
  for (int i = 1; i <= d; ++i) {
    r += std::lgamma(a + 0.5 * (1.0 - i));
  }
  return r;
}

struct Prior {
  double alpha0, kappa0, nu0;
  Vec m0;
  Mat S0;
  double logdet_S0;
};

struct State {
  // All arrays sized to the full component count used during fitting.
  Vec alpha, kappa, nu;
  std::vector<Vec> m;
  std::vector<Mat> S;
  Vec counts;
};

double logdet_spd(const Mat& a) {
  Eigen::LLT<Mat> llt(a);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error("vb: scale matrix lost positive definiteness");
  }
  return 2.0 * Mat(llt.matrixL()).diagonal().array().log().sum();
}

// E[log det Lambda^-1] for Lambda ~ InverseWishart(S, nu).
double elogdet_precision(double nu, double logdet_S, int d) {
  double r = d * std::log(2.0) - logdet_S;
  for (int i = 1; i <= d; ++i) {
    r += digamma(0.5 * (nu + 1.0 - i));
  }
  return r;
}

Prior resolve_prior(const VbConfig& cfg, int d) {
  Prior p;
  p.alpha0 = cfg.alpha0;
  p.kappa0 = cfg.kappa0;
  p.nu0 = cfg.nu0 > 0.0 ? cfg.nu0 : d + 2.0;
  if (!(p.alpha0 > 0.0) || !(p.kappa0 > 0.0)) {
    throw std::invalid_argument("vb: alpha0 and kappa0 must be positive");
  }
  if (!(p.nu0 > d - 1.0)) {
    throw std::invalid_argument("vb: nu0 must exceed dim - 1");
  }
  p.m0 = cfg.m0.size() == 0 ? Vec::Zero(d) : cfg.m0;
  if (p.m0.size() != d) {
    throw std::invalid_argument("vb: m0 dimension mismatch");
  }
  p.S0 = cfg.S0.size() == 0 ? Mat(p.nu0 * Mat::Identity(d, d)) : cfg.S0;
  if (p.S0.rows() != d || p.S0.cols() != d) {
    throw std::invalid_argument("vb: S0 dimension mismatch");
  }
  p.logdet_S0 = logdet_spd(p.S0);
  return p;
}

Mat kmeanspp_responsibilities(const Mat& data, int M, std::uint64_t seed) {
  const auto N = data.rows();
  const auto d = data.cols();
  // Seed selection runs over a lexicographically sorted view so the chosen
  // centers depend only on the multiset of residuals, not their order.
  std::vector<Eigen::Index> order(N);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    for (Eigen::Index c = 0; c < d; ++c) {
      if (data(a, c) != data(b, c)) return data(a, c) < data(b, c);
    }
    return false;
  });

  Rng rng(seed);
  Mat centers(M, d);
  Vec dist2 = Vec::Constant(N, std::numeric_limits<double>::infinity());
  for (int m = 0; m < M; ++m) {
    Eigen::Index pick;
    if (m == 0) {
      pick = static_cast<Eigen::Index>(rng.index(static_cast<std::size_t>(N)));
    } else {
      double total = dist2.sum();
      if (!(total > 0.0)) {
        pick = static_cast<Eigen::Index>(rng.index(static_cast<std::size_t>(N)));
      } else {
        double u = rng.uniform() * total;
        double acc = 0.0;
        pick = N - 1;
        for (Eigen::Index i = 0; i < N; ++i) {
          acc += dist2(i);
          if (u < acc) {
            pick = i;
            break;
          }
        }
      }
    }
    centers.row(m) = data.row(order[pick]);
    for (Eigen::Index i = 0; i < N; ++i) {
      double dd = (data.row(order[i]) - centers.row(m)).squaredNorm();
      dist2(i) = std::min(dist2(i), dd);
    }
  }

  Mat resp = Mat::Zero(N, M);
  for (Eigen::Index i = 0; i < N; ++i) {
    int best = 0;
    double best_d = (data.row(i) - centers.row(0)).squaredNorm();
    for (int m = 1; m < M; ++m) {
      double dd = (data.row(i) - centers.row(m)).squaredNorm();
      if (dd < best_d) {
        best_d = dd;
        best = m;
      }
    }
    resp(i, best) = 1.0;
  }
  return resp;
}

void m_step(const Mat& data, const Mat& resp, const Prior& prior, State& st) {
  const auto N = data.rows();
  const int d = static_cast<int>(data.cols());
  const int M = static_cast<int>(resp.cols());
  st.counts = resp.colwise().sum();
  st.alpha = Vec::Constant(M, prior.alpha0) + st.counts;
  st.kappa = Vec::Constant(M, prior.kappa0) + st.counts;
  st.nu = Vec::Constant(M, prior.nu0) + st.counts;
  st.m.assign(M, Vec::Zero(d));
  st.S.assign(M, Mat::Zero(d, d));
  for (int m = 0; m < M; ++m) {
    double Nm = st.counts(m);
    Vec xbar = Vec::Zero(d);
    if (Nm > 0.0) {
      for (Eigen::Index i = 0; i < N; ++i) {
        xbar += resp(i, m) * data.row(i).transpose();
      }
      xbar /= Nm;
    }
    st.m[m] = (prior.kappa0 * prior.m0 + Nm * xbar) / st.kappa(m);
    Mat scatter = Mat::Zero(d, d);
    for (Eigen::Index i = 0; i < N; ++i) {
      Vec diff = data.row(i).transpose() - xbar;
      scatter.noalias() += resp(i, m) * diff * diff.transpose();
    }
    Vec dm = xbar - prior.m0;
    st.S[m] = prior.S0 + scatter + (prior.kappa0 * Nm / st.kappa(m)) * dm * dm.transpose();
  }
}

Mat e_step(const Mat& data, const State& st) {
  const auto N = data.rows();
  const int d = static_cast<int>(data.cols());
  const int M = static_cast<int>(st.alpha.size());
  const double alpha_sum = st.alpha.sum();
  Mat logrho(N, M);
  for (int m = 0; m < M; ++m) {
    double elogw = digamma(st.alpha(m)) - digamma(alpha_sum);
    double logdet_S = logdet_spd(st.S[m]);
    double eld = elogdet_precision(st.nu(m), logdet_S, d);
    Eigen::LLT<Mat> llt(st.S[m]);
    for (Eigen::Index i = 0; i < N; ++i) {
      Vec diff = data.row(i).transpose() - st.m[m];
      double maha = diff.dot(llt.solve(diff));
      logrho(i, m) = elogw + 0.5 * eld - 0.5 * d * std::log(2.0 * M_PI) -
                     0.5 * (d / st.kappa(m) + st.nu(m) * maha);
    }
  }
  Mat resp(N, M);
  for (Eigen::Index i = 0; i < N; ++i) {
    double mx = logrho.row(i).maxCoeff();
    Eigen::ArrayXd ex = (logrho.row(i).array() - mx).exp();
    resp.row(i) = (ex / ex.sum()).matrix();
  }
  return resp;
}

double free_energy_impl(const Mat& data, const Mat& resp, const State& st, const Prior& prior) {
  const auto N = data.rows();
  const int d = static_cast<int>(data.cols());
  const int M = static_cast<int>(st.alpha.size());
  const double alpha_sum = st.alpha.sum();
  const double log2pi = std::log(2.0 * M_PI);
  double F = 0.0;
  for (int m = 0; m < M; ++m) {
    double elogw = digamma(st.alpha(m)) - digamma(alpha_sum);
    double logdet_Sm = logdet_spd(st.S[m]);
    double eld = elogdet_precision(st.nu(m), logdet_Sm, d);
    Eigen::LLT<Mat> llt(st.S[m]);

    // E[log p(R | Z, theta)] and E[log p(Z | w)]
    for (Eigen::Index i = 0; i < N; ++i) {
      double r = resp(i, m);
      if (r == 0.0) continue;
      Vec diff = data.row(i).transpose() - st.m[m];
      double maha = diff.dot(llt.solve(diff));
      F += r * (-0.5 * d * log2pi + 0.5 * eld - 0.5 * (d / st.kappa(m) + st.nu(m) * maha));
      F += r * elogw;
    }
    // E[log p(mu_m | Lambda_m)] under the prior Normal(m0, Lambda/kappa0)
    Vec dm = st.m[m] - prior.m0;
    double emaha0 = d / st.kappa(m) + st.nu(m) * dm.dot(llt.solve(dm));
    F += -0.5 * d * log2pi + 0.5 * d * std::log(prior.kappa0) + 0.5 * eld -
         0.5 * prior.kappa0 * emaha0;
    // E[log p(Lambda_m)] under InverseWishart(S0, nu0)
    F += 0.5 * prior.nu0 * prior.logdet_S0 - 0.5 * prior.nu0 * d * std::log(2.0) -
         log_multivariate_gamma(0.5 * prior.nu0, d) + 0.5 * (prior.nu0 + d + 1.0) * eld -
         0.5 * st.nu(m) * (llt.solve(prior.S0)).trace();
    // -E[log q(mu_m | Lambda_m)]
    F -= -0.5 * d * log2pi + 0.5 * d * std::log(st.kappa(m)) + 0.5 * eld - 0.5 * d;
    // -E[log q(Lambda_m)]
    F -= 0.5 * st.nu(m) * logdet_Sm - 0.5 * st.nu(m) * d * std::log(2.0) -
         log_multivariate_gamma(0.5 * st.nu(m), d) + 0.5 * (st.nu(m) + d + 1.0) * eld -
         0.5 * st.nu(m) * d;
  }
  // E[log p(w)] under Dirichlet(alpha0)
  double elogw_sum = 0.0;
  for (int m = 0; m < M; ++m) {
    elogw_sum += digamma(st.alpha(m)) - digamma(alpha_sum);
  }
  F += std::lgamma(M * prior.alpha0) - M * std::lgamma(prior.alpha0) +
       (prior.alpha0 - 1.0) * elogw_sum;
  // -E[log q(Z)]
  for (Eigen::Index i = 0; i < N; ++i) {
    for (int m = 0; m < M; ++m) {
      double r = resp(i, m);
      if (r > 0.0) F -= r * std::log(r);
    }
  }
  // -E[log q(w)]
  double logC = std::lgamma(alpha_sum);
  for (int m = 0; m < M; ++m) {
    logC -= std::lgamma(st.alpha(m));
    F -= (st.alpha(m) - 1.0) * (digamma(st.alpha(m)) - digamma(alpha_sum));
  }
  F -= logC;
  return F;
}

Mat pack(const std::vector<Vec>& residuals) {
  if (residuals.size() < 2) {
    throw std::invalid_argument("vb_fit: need at least 2 residuals");
  }
  const int d = static_cast<int>(residuals[0].size());
  if (d < 1) {
    throw std::invalid_argument("vb_fit: empty residual vectors");
  }
  Mat data(residuals.size(), d);
  for (std::size_t i = 0; i < residuals.size(); ++i) {
    if (residuals[i].size() != d) {
      throw std::invalid_argument("vb_fit: residual " + std::to_string(i) +
                                  " has inconsistent dimension");
    }
    if (!residuals[i].allFinite()) {
      throw std::invalid_argument("vb_fit: residual " + std::to_string(i) + " is non-finite");
    }
    data.row(i) = residuals[i].transpose();
  }
  return data;
}

State state_from_posterior(const VbPosterior& p) {
  State st;
  st.alpha = p.alpha;
  st.kappa = p.kappa;
  st.nu = p.nu;
  st.m = p.m;
  st.S = p.S;
  st.counts = p.counts;
  return st;
}

}  // namespace

VbPosterior vb_fit(const std::vector<Vec>& residuals, const VbConfig& config) {
  if (config.max_components < 1) {
    throw std::invalid_argument("vb_fit: max_components must be >= 1");
  }
  if (config.max_sweeps < 1) {
    throw std::invalid_argument("vb_fit: max_sweeps must be >= 1");
  }
  if (!(config.free_energy_rel_tol > 0.0)) {
    throw std::invalid_argument("vb_fit: free_energy_rel_tol must be positive");
  }
  Mat data = pack(residuals);
  const int d = static_cast<int>(data.cols());
  const int M = config.max_components;
  Prior prior = resolve_prior(config, d);

  Mat resp = kmeanspp_responsibilities(data, M, config.rng_seed);
  State st;
  m_step(data, resp, prior, st);

  std::vector<double> history;
  history.push_back(free_energy_impl(data, resp, st, prior));
  bool converged = false;
  int sweeps = 0;
  for (int it = 0; it < config.max_sweeps; ++it) {
    resp = e_step(data, st);
    m_step(data, resp, prior, st);
    double F = free_energy_impl(data, resp, st, prior);
    history.push_back(F);
    ++sweeps;
    double prev = history[history.size() - 2];
    if (std::abs(F - prev) <= config.free_energy_rel_tol * std::max(std::abs(prev), 1e-300)) {
      converged = true;
      break;
    }
  }

  // Prune components with too little support; keep the best one if the rule
  // would empty the model.
  std::vector<int> keep;
  for (int m = 0; m < M; ++m) {
    if (st.counts(m) >= config.prune_min_count) {
      keep.push_back(m);
    }
  }
  if (keep.empty()) {
    int best = 0;
    for (int m = 1; m < M; ++m) {
      if (st.counts(m) > st.counts(best)) best = m;
    }
    keep.push_back(best);
  }

  VbPosterior post;
  post.dim = d;
  const int K = static_cast<int>(keep.size());
  post.alpha.resize(K);
  post.kappa.resize(K);
  post.nu.resize(K);
  post.counts.resize(K);
  post.m.resize(K);
  post.S.resize(K);
  for (int k = 0; k < K; ++k) {
    post.alpha(k) = st.alpha(keep[k]);
    post.kappa(k) = st.kappa(keep[k]);
    post.nu(k) = st.nu(keep[k]);
    post.counts(k) = st.counts(keep[k]);
    post.m[k] = st.m[keep[k]];
    post.S[k] = st.S[keep[k]];
  }
  post.responsibilities.resize(data.rows(), K);
  for (Eigen::Index i = 0; i < data.rows(); ++i) {
    double sum = 0.0;
    for (int k = 0; k < K; ++k) {
      post.responsibilities(i, k) = resp(i, keep[k]);
      sum += resp(i, keep[k]);
    }
    if (sum > 0.0) {
      post.responsibilities.row(i) /= sum;
    } else {
      post.responsibilities.row(i).setConstant(1.0 / K);
    }
  }
  post.free_energy_history = std::move(history);
  post.converged = converged;
  post.sweeps = sweeps;
  return post;
}

double vb_free_energy(const std::vector<Vec>& residuals, const VbPosterior& posterior,
                      const VbConfig& config) {
  Mat data = pack(residuals);
  if (posterior.dim != data.cols()) {
    throw std::invalid_argument("vb_free_energy: posterior/residual dimension mismatch");
  }
  if (posterior.responsibilities.rows() != data.rows()) {
    throw std::invalid_argument("vb_free_energy: responsibility rows != residual count");
  }
  Prior prior = resolve_prior(config, posterior.dim);
  return free_energy_impl(data, posterior.responsibilities, state_from_posterior(posterior), prior);
}

Gmm extract_point_gmm(const VbPosterior& posterior) {
  const int K = static_cast<int>(posterior.alpha.size());
  if (K == 0) {
    throw std::invalid_argument("extract_point_gmm: empty posterior");
  }
  const int d = posterior.dim;
  double alpha_sum = posterior.alpha.sum();
  Gmm gmm;
  for (int k = 0; k < K; ++k) {
    if (!(posterior.nu(k) > d + 1.0)) {
      throw std::invalid_argument("extract_point_gmm: nu must exceed dim + 1 (component " +
                                  std::to_string(k) + ")");
    }
    GaussianComponent c;
    c.weight = posterior.alpha(k) / alpha_sum;
    c.mean = posterior.m[k];
    c.covariance = floor_covariance(posterior.S[k] / (posterior.nu(k) - d - 1.0));
    gmm.components.push_back(std::move(c));
  }
  validate_gmm(gmm);
  return gmm;
}

int hard_assign(const VbPosterior& posterior, std::size_t row) {
  if (row >= static_cast<std::size_t>(posterior.responsibilities.rows())) {
    throw std::out_of_range("hard_assign: row out of range");
  }
  int best = 0;
  for (int k = 1; k < posterior.responsibilities.cols(); ++k) {
    if (posterior.responsibilities(row, k) > posterior.responsibilities(row, best)) {
      best = k;
    }
  }
  return best;
}

int hard_assign(const Gmm& gmm, const Vec& r) { return max_mixture_select(gmm, r).first; }

}  // namespace bce
