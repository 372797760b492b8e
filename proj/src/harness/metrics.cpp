#include "bce/harness/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "bce/gnss/geodesy.hpp"

namespace bce::harness {

StatsSummary summarize(std::vector<double> errors) {
  if (errors.empty()) throw std::invalid_argument("summarize: no errors");
  StatsSummary s;
  s.per_epoch_errors = errors;

  std::vector<double> sorted = errors;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  s.median = n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  s.max = sorted.back();

  if (n > 1) {
    double mean = 0.0;
    for (double e : errors) mean += e;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double e : errors) ss += (e - mean) * (e - mean);
    s.variance = ss / static_cast<double>(n - 1);
  }
  return s;
}

std::vector<double> rsos_horizontal_errors(const std::vector<Vec3>& estimated_ecef,
                                           const std::vector<Vec3>& truth_ecef) {
  if (estimated_ecef.size() != truth_ecef.size()) {
    throw std::invalid_argument("rsos_horizontal_errors: epoch count mismatch");
  }
  if (truth_ecef.empty()) throw std::invalid_argument("rsos_horizontal_errors: no epochs");

  Vec3 centroid = Vec3::Zero();
  for (const Vec3& p : truth_ecef) centroid += p;
  centroid /= static_cast<double>(truth_ecef.size());
  const Vec3 lla = gnss::ecef_to_geodetic(centroid);
  const Eigen::Matrix3d enu = gnss::enu_rotation(lla.x(), lla.y());

  std::vector<double> errors;
  errors.reserve(truth_ecef.size());
  for (std::size_t k = 0; k < truth_ecef.size(); ++k) {
    const Vec3 d = enu * (estimated_ecef[k] - truth_ecef[k]);
    errors.push_back(std::hypot(d.x(), d.y()));
  }
  return errors;
}

StatsSummary rsos_horizontal_stats(const std::vector<Vec3>& estimated_ecef,
                                   const std::vector<Vec3>& truth_ecef) {
  return summarize(rsos_horizontal_errors(estimated_ecef, truth_ecef));
}

}  // namespace bce::harness
