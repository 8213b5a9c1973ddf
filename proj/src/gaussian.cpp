#include "palmtrack/rfs/gaussian.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace palmtrack {

namespace {
constexpr double kEigenvalueFloor = 1e-9;
}

GaussianMixture::GaussianMixture(std::vector<GaussianComponent> comps) : comps_(std::move(comps)) {
  if (comps_.empty()) throw std::invalid_argument("GaussianMixture: no components");
  double total = 0.0;
  for (const auto& c : comps_) {
    if (c.weight < 0.0) throw std::invalid_argument("GaussianMixture: negative weight");
    if (c.cov.rows() != c.cov.cols() || c.cov.rows() != c.mean.size())
      throw std::invalid_argument("GaussianMixture: dimension mismatch");
    total += c.weight;
  }
  if (total <= 0.0) throw std::invalid_argument("GaussianMixture: zero total weight");

  prep_.reserve(comps_.size());
  for (auto& c : comps_) {
    c.weight /= total;
    Eigen::MatrixXd sym = 0.5 * (c.cov + c.cov.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
    Eigen::VectorXd vals = eig.eigenvalues().cwiseMax(kEigenvalueFloor);
    c.cov = eig.eigenvectors() * vals.asDiagonal() * eig.eigenvectors().transpose();

    Prepared p;
    Eigen::LLT<Eigen::MatrixXd> llt(c.cov);
    p.chol = llt.matrixL();
    double log_det = 0.0;
    for (Eigen::Index i = 0; i < p.chol.rows(); ++i) log_det += std::log(p.chol(i, i));
    const double d = static_cast<double>(c.mean.size());
    p.log_norm = 0.5 * d * std::log(2.0 * std::numbers::pi) + log_det;
    prep_.push_back(std::move(p));
  }
}

GaussianMixture GaussianMixture::single(Eigen::VectorXd mean, Eigen::MatrixXd cov) {
  return GaussianMixture({GaussianComponent{1.0, std::move(mean), std::move(cov)}});
}

double GaussianMixture::pdf(const Eigen::VectorXd& x) const {
  double out = 0.0;
  for (std::size_t i = 0; i < comps_.size(); ++i) {
    const auto& c = comps_[i];
    const auto& p = prep_[i];
    Eigen::VectorXd diff = x - c.mean;
    Eigen::VectorXd sol = p.chol.triangularView<Eigen::Lower>().solve(diff);
    out += c.weight * std::exp(-0.5 * sol.squaredNorm() - p.log_norm);
  }
  return out;
}

Eigen::VectorXd GaussianMixture::sample(Rng& rng) const {
  const double u = rng.uniform();
  double acc = 0.0;
  std::size_t pick = comps_.size() - 1;
  for (std::size_t i = 0; i < comps_.size(); ++i) {
    acc += comps_[i].weight;
    if (u < acc) {
      pick = i;
      break;
    }
  }
  const auto& c = comps_[pick];
  Eigen::VectorXd z(c.mean.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = rng.gaussian();
  return c.mean + prep_[pick].chol * z;
}

Eigen::VectorXd GaussianMixture::mean() const {
  Eigen::VectorXd m = Eigen::VectorXd::Zero(comps_.front().mean.size());
  for (const auto& c : comps_) m += c.weight * c.mean;
  return m;
}

Eigen::MatrixXd GaussianMixture::moment_cov() const {
  const Eigen::VectorXd m = mean();
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(m.size(), m.size());
  for (const auto& c : comps_) {
    Eigen::VectorXd d = c.mean - m;
    cov += c.weight * (c.cov + d * d.transpose());
  }
  return cov;
}

void GaussianMixture::hash_into(ContentHasher& h) const {
  h.i64(static_cast<std::int64_t>(comps_.size()));
  for (const auto& c : comps_) {
    h.f64(c.weight);
    h.vec(c.mean);
    h.mat(c.cov);
  }
}

}  // namespace palmtrack
