#pragma once

#include <Eigen/Dense>
#include <functional>
#include <stdexcept>
#include <vector>

#include "palmtrack/epd/epd.hpp"
#include "palmtrack/rfs/discrete.hpp"

namespace palmtrack {

using DiscreteBernoulli = Bernoulli<GridDensity>;
using DiscreteHypothesis = MbHypothesis<GridDensity>;
using DiscreteMbm = MbmDensity<GridDensity>;

/// A marked grid point: measurement marks use 0 for clutter.
struct MarkedCell {
  int cell = 0;
  int mark = 0;
};

/// Detection probability on the discrete state space that may depend on the
/// other objects present.
using DiscretePod = std::function<double(int cell, int mark, const std::vector<MarkedCell>& others)>;

/// Desk-scale sensor model over discrete state and measurement spaces. The
/// single-object likelihood rows are normalized on the measurement grid so
/// discrete identities hold exactly.
struct DiscreteSensorModel {
  DiscreteSpace state_space;
  DiscreteSpace meas_space;
  Eigen::MatrixXd likelihood;  // state cells x measurement cells
  double clutter_rate = 0.0;
  GridDensity clutter;
  DiscretePod pod;

  void normalize_likelihood();
};

struct SpaceTooLargeError : std::runtime_error {
  SpaceTooLargeError() : std::runtime_error("discrete spaces too large for exhaustive enumeration") {}
};

/// Exact (fully enumerated) expected detection probability of a mark under one
/// grid-supported hypothesis.
double epd_hypothesis_exact(const DiscreteSensorModel& model, const DiscreteHypothesis& hyp,
                            int mark);

double epd_per_mark_exact(const DiscreteSensorModel& model, const DiscreteMbm& prior, int mark);

/// Per-mark expected detection probabilities for the whole prior, computed by
/// exact enumeration.
PodAssignment pro_exact(const DiscreteSensorModel& model, const DiscreteMbm& prior);

/// KL divergence between the joint density with object-dependent detection and
/// the joint density with per-mark constant detection, both over the prior,
/// by exhaustive enumeration of marked state and measurement sets.
double kld_oracle(const DiscreteSensorModel& model, const DiscreteMbm& prior,
                  const PodAssignment& pod_map);

}  // namespace palmtrack
