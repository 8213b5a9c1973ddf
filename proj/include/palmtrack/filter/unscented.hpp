#pragma once

#include <Eigen/Dense>
#include <vector>

#include "palmtrack/geometry/camera.hpp"

namespace palmtrack {

struct UtResult {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;    // covariance of the transformed variable (no noise added)
  Eigen::MatrixXd cross;  // input-output cross covariance
};

/// Unscented transform with 2n+1 sigma points and the standard weight
/// convention (spread alpha, beta = 2, kappa = 0).
template <class F>
UtResult unscented_transform(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov, F&& f,
                             double alpha = 1e-3) {
  const int n = static_cast<int>(mean.size());
  const double beta = 2.0;
  const double kappa = 0.0;
  const double lambda = alpha * alpha * (n + kappa) - n;
  const double scale = n + lambda;

  // Matrix square root via eigendecomposition; tolerates exactly singular
  // covariances (collapsed sigma points).
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (cov + cov.transpose()));
  const Eigen::MatrixXd sqrt_cov =
      eig.eigenvectors() *
      eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
      eig.eigenvectors().transpose();

  std::vector<Eigen::VectorXd> sigma;
  sigma.reserve(static_cast<std::size_t>(2 * n + 1));
  sigma.push_back(mean);
  const double spread = std::sqrt(scale);
  for (int i = 0; i < n; ++i) {
    sigma.push_back(mean + spread * sqrt_cov.col(i));
    sigma.push_back(mean - spread * sqrt_cov.col(i));
  }

  std::vector<double> wm(sigma.size(), 1.0 / (2.0 * scale));
  std::vector<double> wc(sigma.size(), 1.0 / (2.0 * scale));
  wm[0] = lambda / scale;
  wc[0] = lambda / scale + (1.0 - alpha * alpha + beta);

  std::vector<Eigen::VectorXd> mapped;
  mapped.reserve(sigma.size());
  for (const auto& s : sigma) mapped.push_back(f(s));

  UtResult out;
  out.mean = Eigen::VectorXd::Zero(mapped.front().size());
  for (std::size_t i = 0; i < mapped.size(); ++i) out.mean += wm[i] * mapped[i];

  out.cov = Eigen::MatrixXd::Zero(out.mean.size(), out.mean.size());
  out.cross = Eigen::MatrixXd::Zero(n, out.mean.size());
  for (std::size_t i = 0; i < mapped.size(); ++i) {
    const Eigen::VectorXd dz = mapped[i] - out.mean;
    out.cov += wc[i] * dz * dz.transpose();
    out.cross += wc[i] * (sigma[i] - mean) * dz.transpose();
  }
  return out;
}

/// Mean projected boxes of Gaussian state estimates through the pinhole box
/// map, via the unscented transform.
std::vector<BBox2D> project_estimates_ut(
    const std::vector<std::pair<Eigen::VectorXd, Eigen::MatrixXd>>& states,
    const CameraModel& cam, double alpha = 1e-3);

}  // namespace palmtrack
