#pragma once

#include <Eigen/Dense>
#include <vector>

#include "palmtrack/assignment/hungarian.hpp"

namespace palmtrack {

/// The K lowest-cost one-to-one row assignments of a rectangular cost matrix
/// (rows <= cols, +infinity entries forbidden), in nondecreasing cost order;
/// fewer if fewer feasible assignments exist. Equal costs are ordered by the
/// lexicographically smallest assignment vector.
std::vector<Assignment> murty_kbest(const Eigen::MatrixXd& cost, int k);

}  // namespace palmtrack
