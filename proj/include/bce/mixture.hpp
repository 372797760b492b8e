#pragma once

#include <utility>

#include "bce/types.hpp"

#include <json.hpp>

namespace bce {

struct GaussianComponent {
  double weight = 1.0;
  Vec mean;
  Mat covariance;
};

struct Gmm {
  std::vector<GaussianComponent> components;

  int dim() const { return components.empty() ? 0 : static_cast<int>(components[0].mean.size()); }
  std::size_t size() const { return components.size(); }
};

// Checks weights in (0, 1] summing to 1 within 1e-9, consistent dimensions,
// and symmetric finite covariances. Throws std::invalid_argument on failure.
void validate_gmm(const Gmm& gmm);

// log( N(r | mean, covariance) ), via the component's lower Cholesky.
double component_log_density(const GaussianComponent& c, const Vec& r);

// log( weight * N(r | mean, covariance) ).
double component_log_likelihood(const GaussianComponent& c, const Vec& r);

// Index and log-likelihood of the component maximizing
// log(w_m N(r | mu_m, cov_m)); ties resolve to the lowest index.
std::pair<int, double> max_mixture_select(const Gmm& gmm, const Vec& r);

// JSON layout: {"dim": d, "components": [{"weight": w, "mean": [...],
// "covariance": [row-major d*d]}]}. Validates on both paths.
nlohmann::json gmm_to_json(const Gmm& gmm);
Gmm gmm_from_json(const nlohmann::json& j);

}  // namespace bce
