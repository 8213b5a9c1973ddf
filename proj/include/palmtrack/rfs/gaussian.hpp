#pragma once

#include <Eigen/Dense>
#include <vector>

#include "palmtrack/common/hash.hpp"
#include "palmtrack/common/rng.hpp"

namespace palmtrack {

struct GaussianComponent {
  double weight = 1.0;
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

/// Gaussian mixture used as the spatial density of a single object.
/// Weights are normalized on construction. Covariances are symmetrized and
/// eigenvalue-floored at 1e-9 so evaluation and sampling stay finite.
class GaussianMixture {
 public:
  GaussianMixture() = default;
  explicit GaussianMixture(std::vector<GaussianComponent> comps);

  static GaussianMixture single(Eigen::VectorXd mean, Eigen::MatrixXd cov);

  double pdf(const Eigen::VectorXd& x) const;
  Eigen::VectorXd sample(Rng& rng) const;

  Eigen::VectorXd mean() const;
  /// Moment-matched covariance of the whole mixture.
  Eigen::MatrixXd moment_cov() const;

  const std::vector<GaussianComponent>& components() const { return comps_; }
  int dim() const { return comps_.empty() ? 0 : static_cast<int>(comps_.front().mean.size()); }

  void hash_into(ContentHasher& h) const;

 private:
  struct Prepared {
    Eigen::MatrixXd chol;  // lower factor of cov
    double log_norm = 0.0;  // log((2*pi)^(d/2) |cov|^(1/2))
  };

  std::vector<GaussianComponent> comps_;
  std::vector<Prepared> prep_;
};

}  // namespace palmtrack
