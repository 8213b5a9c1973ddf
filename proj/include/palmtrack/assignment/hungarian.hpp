#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

namespace palmtrack {

struct Assignment {
  std::vector<int> row_to_col;
  double cost = 0.0;
};

/// Minimum-cost one-to-one assignment of every row to a distinct column
/// (rows <= cols). Entries of +infinity are forbidden; returns nothing when no
/// feasible assignment exists.
std::optional<Assignment> solve_assignment(const Eigen::MatrixXd& cost);

}  // namespace palmtrack
