#pragma once

#include <Eigen/Dense>

namespace bce {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Vec3 = Eigen::Vector3d;

// Smallest eigenvalue any covariance is allowed to have after flooring.
inline constexpr double kCovarianceFloor = 1e-8;

// Returns 0.5*(a + a^T) with eigenvalues clamped from below at `floor`.
// Used everywhere a covariance enters the system from user input or from a
// fitted model, so downstream Cholesky factorizations cannot fail.
inline Mat floor_covariance(const Mat& a, double floor = kCovarianceFloor) {
  Mat sym = 0.5 * (a + a.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> eig(sym);
  if (eig.info() != Eigen::Success) {
    throw std::runtime_error("floor_covariance: eigendecomposition failed");
  }
  if ((eig.eigenvalues().array() >= floor).all()) {
    return sym;
  }
  Vec clamped = eig.eigenvalues().cwiseMax(floor);
  return eig.eigenvectors() * clamped.asDiagonal() * eig.eigenvectors().transpose();
}

}  // namespace bce
