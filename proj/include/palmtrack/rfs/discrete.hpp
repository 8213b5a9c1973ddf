#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <functional>
#include <stdexcept>
#include <vector>

#include "palmtrack/common/hash.hpp"
#include "palmtrack/common/rng.hpp"

namespace palmtrack {

/// Finite grid standing in for a continuous space in oracle computations.
/// max_cardinality is capped at 8; beyond that the subset enumeration is
/// pointless for desk-scale checks.
struct DiscreteSpace {
  std::vector<Eigen::VectorXd> points;
  double cell_volume = 1.0;
  int max_cardinality = 3;

  DiscreteSpace() = default;
  DiscreteSpace(std::vector<Eigen::VectorXd> pts, double vol, int max_card)
      : points(std::move(pts)), cell_volume(vol), max_cardinality(max_card) {
    if (cell_volume <= 0.0) throw std::invalid_argument("DiscreteSpace: cell_volume must be > 0");
    if (max_cardinality < 0 || max_cardinality > 8)
      throw std::invalid_argument("DiscreteSpace: max_cardinality must be in [0, 8]");
  }

  /// 1D regular grid over [lo, hi] with n cells, points at cell centers.
  static DiscreteSpace regular_1d(double lo, double hi, int n, int max_card) {
    std::vector<Eigen::VectorXd> pts;
    const double vol = (hi - lo) / n;
    for (int i = 0; i < n; ++i) {
      Eigen::VectorXd p(1);
      p[0] = lo + (i + 0.5) * vol;
      pts.push_back(p);
    }
    return DiscreteSpace(std::move(pts), vol, max_card);
  }

  int cells() const { return static_cast<int>(points.size()); }
};

/// Probability density supported on the cells of a DiscreteSpace, addressed by
/// cell index. Mass (value times cell_volume) is normalized to 1.
class GridDensity {
 public:
  GridDensity() = default;
  GridDensity(std::vector<double> values, double cell_volume)
      : values_(std::move(values)), cell_volume_(cell_volume) {
    double mass = 0.0;
    for (double v : values_) {
      if (v < 0.0) throw std::invalid_argument("GridDensity: negative value");
      mass += v * cell_volume_;
    }
    if (mass <= 0.0) throw std::invalid_argument("GridDensity: zero mass");
    for (double& v : values_) v /= mass;
  }

  double pdf(int cell) const { return values_[static_cast<std::size_t>(cell)]; }
  int cells() const { return static_cast<int>(values_.size()); }
  double cell_volume() const { return cell_volume_; }
  const std::vector<double>& values() const { return values_; }

  int sample(Rng& rng) const {
    const double u = rng.uniform();
    double acc = 0.0;
    for (int i = 0; i < cells(); ++i) {
      acc += values_[static_cast<std::size_t>(i)] * cell_volume_;
      if (u < acc) return i;
    }
    return cells() - 1;
  }

  void hash_into(ContentHasher& h) const {
    h.i64(cells());
    h.f64(cell_volume_);
    for (double v : values_) h.f64(v);
  }

 private:
  std::vector<double> values_;
  double cell_volume_ = 1.0;
};

/// Discretized set integral over subsets of distinct grid cells up to
/// max_cardinality, each subset weighted by cell_volume^|subset|. The n!
/// orderings of a subset cancel the 1/n! of the set integral, and duplicate
/// tuples carry vanishing weight in the continuum limit, so this quadrature is
/// exact for finite point processes supported on the grid. Truncation error is
/// bounded by the integrand's mass beyond max_cardinality.
inline double set_integral(const DiscreteSpace& space,
                           const std::function<double(const std::vector<int>&)>& f) {
  const int n = space.cells();
  std::vector<int> subset;
  double total = 0.0;
  const std::function<void(int, double)> recurse = [&](int start, double weight) {
    total += weight * f(subset);
    if (static_cast<int>(subset.size()) >= space.max_cardinality) return;
    for (int i = start; i < n; ++i) {
      subset.push_back(i);
      recurse(i + 1, weight * space.cell_volume);
      subset.pop_back();
    }
  };
  recurse(0, 1.0);
  return total;
}

/// Literal ordered-tuple discretization of the set integral: for each n up to
/// max_cardinality, sums f over all cell^n tuples weighted by
/// cell_volume^n / n!. The argument passed to f is the sorted tuple and may
/// contain a cell more than once (a multiset); density evaluators that take
/// products over their argument handle this naturally. Unlike the subset
/// quadrature this reproduces, e.g., the Poisson and multi-Bernoulli
/// normalizations exactly on coarse grids.
inline double set_integral_tuples(const DiscreteSpace& space,
                                  const std::function<double(const std::vector<int>&)>& f) {
  const int n = space.cells();
  double tuples = 1.0;
  for (int i = 0; i < space.max_cardinality; ++i) tuples *= n;
  if (tuples > 5e7) throw std::invalid_argument("set_integral_tuples: tuple count too large");

  double total = 0.0;
  std::vector<int> tuple;
  std::vector<int> sorted;
  const std::function<void(double)> recurse = [&](double weight) {
    if (!tuple.empty()) {
      sorted = tuple;
      std::sort(sorted.begin(), sorted.end());
      total += weight * f(sorted);
    }
    if (static_cast<int>(tuple.size()) >= space.max_cardinality) return;
    const double next_factorial = static_cast<double>(tuple.size() + 1);
    for (int i = 0; i < n; ++i) {
      tuple.push_back(i);
      recurse(weight * space.cell_volume / next_factorial);
      tuple.pop_back();
    }
  };
  {
    const std::vector<int> empty;
    total += f(empty);
  }
  recurse(1.0);
  return total;
}

}  // namespace palmtrack
