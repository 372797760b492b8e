#include "bce/mixture.hpp"

#include <cmath>
#include <stdexcept>

namespace bce {

void validate_gmm(const Gmm& gmm) {
  if (gmm.components.empty()) {
    throw std::invalid_argument("gmm: no components");
  }
  const int d = gmm.dim();
  double wsum = 0.0;
  for (const auto& c : gmm.components) {
    if (!(c.weight > 0.0) || c.weight > 1.0 || !std::isfinite(c.weight)) {
      throw std::invalid_argument("gmm: component weight must be in (0, 1]");
    }
    wsum += c.weight;
    if (c.mean.size() != d || c.covariance.rows() != d || c.covariance.cols() != d) {
      throw std::invalid_argument("gmm: inconsistent component dimensions");
    }
    if (!c.mean.allFinite() || !c.covariance.allFinite()) {
      throw std::invalid_argument("gmm: non-finite component parameters");
    }
    double scale = std::max(1.0, c.covariance.cwiseAbs().maxCoeff());
    if ((c.covariance - c.covariance.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale) {
      throw std::invalid_argument("gmm: covariance is not symmetric");
    }
  }
  if (std::abs(wsum - 1.0) > 1e-9) {
    throw std::invalid_argument("gmm: weights sum to " + std::to_string(wsum) + ", expected 1");
  }
}

double component_log_density(const GaussianComponent& c, const Vec& r) {
  if (r.size() != c.mean.size()) {
    throw std::invalid_argument("component_log_density: dimension mismatch");
  }
  if (!r.allFinite()) {
    throw std::invalid_argument("component_log_density: non-finite point");
  }
  Eigen::LLT<Mat> llt(c.covariance);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error("component_log_density: covariance not positive definite");
  }
  Mat L = llt.matrixL();
  Vec e = L.triangularView<Eigen::Lower>().solve(r - c.mean);
  double logdet_half = L.diagonal().array().log().sum();
  const double d = static_cast<double>(r.size());
  return -0.5 * d * std::log(2.0 * M_PI) - logdet_half - 0.5 * e.squaredNorm();
}

double component_log_likelihood(const GaussianComponent& c, const Vec& r) {
  if (!(c.weight > 0.0)) {
    throw std::invalid_argument("component_log_likelihood: weight must be positive");
  }
  return std::log(c.weight) + component_log_density(c, r);
}

std::pair<int, double> max_mixture_select(const Gmm& gmm, const Vec& r) {
  if (gmm.components.empty()) {
    throw std::invalid_argument("max_mixture_select: empty mixture");
  }
  int best = 0;
  double best_ll = component_log_likelihood(gmm.components[0], r);
  for (std::size_t m = 1; m < gmm.components.size(); ++m) {
    double ll = component_log_likelihood(gmm.components[m], r);
    if (ll > best_ll) {
      best_ll = ll;
      best = static_cast<int>(m);
    }
  }
  return {best, best_ll};
}

nlohmann::json gmm_to_json(const Gmm& gmm) {
  validate_gmm(gmm);
  nlohmann::json j;
  j["dim"] = gmm.dim();
  j["components"] = nlohmann::json::array();
  for (const auto& c : gmm.components) {
    nlohmann::json jc;
    jc["weight"] = c.weight;
    jc["mean"] = std::vector<double>(c.mean.data(), c.mean.data() + c.mean.size());
    std::vector<double> cov;
    cov.reserve(static_cast<std::size_t>(c.covariance.size()));
    for (Eigen::Index r = 0; r < c.covariance.rows(); ++r) {
      for (Eigen::Index col = 0; col < c.covariance.cols(); ++col) {
        cov.push_back(c.covariance(r, col));
      }
    }
    jc["covariance"] = cov;
    j["components"].push_back(std::move(jc));
  }
  return j;
}

Gmm gmm_from_json(const nlohmann::json& j) {
  if (!j.contains("dim") || !j.contains("components")) {
    throw std::invalid_argument("gmm json: missing 'dim' or 'components'");
  }
  const int d = j.at("dim").get<int>();
  if (d <= 0) {
    throw std::invalid_argument("gmm json: dim must be positive");
  }
  Gmm gmm;
  for (const auto& jc : j.at("components")) {
    GaussianComponent c;
    c.weight = jc.at("weight").get<double>();
    auto mean = jc.at("mean").get<std::vector<double>>();
    auto cov = jc.at("covariance").get<std::vector<double>>();
    if (mean.size() != static_cast<std::size_t>(d) ||
        cov.size() != static_cast<std::size_t>(d) * d) {
      throw std::invalid_argument("gmm json: component size mismatch with dim");
    }
    c.mean = Eigen::Map<const Vec>(mean.data(), d);
    c.covariance = Mat(d, d);
    for (int r = 0; r < d; ++r) {
      for (int col = 0; col < d; ++col) {
        c.covariance(r, col) = cov[static_cast<std::size_t>(r) * d + col];
      }
    }
    gmm.components.push_back(std::move(c));
  }
  validate_gmm(gmm);
  return gmm;
}

}  // namespace bce
