#pragma once

#include <vector>

#include "bce/types.hpp"

namespace bce::harness {

struct StatsSummary {
  double median = 0.0;
  double variance = 0.0;  // sample variance (N-1)
  double max = 0.0;
  std::vector<double> per_epoch_errors;
};

StatsSummary summarize(std::vector<double> errors);

// Per-epoch horizontal error: sqrt(e_east^2 + e_north^2) of (estimate - truth)
// in the local ENU frame anchored at the truth trajectory centroid. Vertical
// error is deliberately excluded from the metric.
std::vector<double> rsos_horizontal_errors(const std::vector<Vec3>& estimated_ecef,
                                           const std::vector<Vec3>& truth_ecef);

StatsSummary rsos_horizontal_stats(const std::vector<Vec3>& estimated_ecef,
                                   const std::vector<Vec3>& truth_ecef);

}  // namespace bce::harness
