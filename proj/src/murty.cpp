#include "palmtrack/filter/murty.hpp"

#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>

namespace palmtrack {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double assignment_cost(const Eigen::MatrixXd& cost, const std::vector<int>& row_to_col) {
  double total = 0.0;
  for (std::size_t i = 0; i < row_to_col.size(); ++i)
    total += cost(static_cast<Eigen::Index>(i), row_to_col[i]);
  return total;
}

/// Lexicographically smallest optimal assignment of the (already constrained)
/// matrix: fix columns row by row, keeping the total optimal.
std::optional<Assignment> solve_lex_smallest(Eigen::MatrixXd matrix) {
  const auto base = solve_assignment(matrix);
  if (!base.has_value()) return std::nullopt;
  const double best_cost = base->cost;
  const double tol = 1e-9 * std::max(1.0, std::abs(best_cost));

  const int rows = static_cast<int>(matrix.rows());
  const int cols = static_cast<int>(matrix.cols());
  std::vector<int> chosen(static_cast<std::size_t>(rows), -1);

  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      if (!std::isfinite(matrix(i, j))) continue;
      // Force (i, j) and check the optimum is preserved.
      Eigen::MatrixXd trial = matrix;
      for (int jj = 0; jj < cols; ++jj)
        if (jj != j) trial(i, jj) = kInf;
      const auto sub = solve_assignment(trial);
      if (sub.has_value() && sub->cost <= best_cost + tol) {
        chosen[static_cast<std::size_t>(i)] = j;
        matrix = trial;
        for (int ii = 0; ii < rows; ++ii)
          if (ii != i) matrix(ii, j) = kInf;
        break;
      }
    }
    if (chosen[static_cast<std::size_t>(i)] < 0) return std::nullopt;  // cannot happen if base solved
  }

  Assignment out;
  out.row_to_col = chosen;
  out.cost = best_cost;
  return out;
}

struct Node {
  Eigen::MatrixXd matrix;  // original with forced/forbidden folded in as +inf
  std::vector<char> forced_row;
  Assignment best;
};

struct NodeOrder {
  bool operator()(const Node& a, const Node& b) const {
    if (a.best.cost != b.best.cost) return a.best.cost > b.best.cost;
    return a.best.row_to_col > b.best.row_to_col;
  }
};

}  // namespace

std::vector<Assignment> murty_kbest(const Eigen::MatrixXd& cost, int k) {
  if (k < 1) throw std::invalid_argument("murty_kbest: k must be >= 1");
  const int rows = static_cast<int>(cost.rows());
  const int cols = static_cast<int>(cost.cols());

  std::vector<Assignment> out;
  if (rows == 0) {
    out.push_back({{}, 0.0});
    return out;
  }

  std::priority_queue<Node, std::vector<Node>, NodeOrder> queue;
  {
    const auto best = solve_lex_smallest(cost);
    if (!best.has_value()) return out;
    queue.push({cost, std::vector<char>(static_cast<std::size_t>(rows), 0), *best});
  }

  while (!queue.empty() && static_cast<int>(out.size()) < k) {
    const Node node = queue.top();
    queue.pop();
    out.push_back(node.best);

    // Partition the remaining assignments of this node by the standard Murty
    // split over its non-forced rows.
    Eigen::MatrixXd prefix = node.matrix;
    std::vector<char> forced = node.forced_row;
    for (int i = 0; i < rows; ++i) {
      if (forced[static_cast<std::size_t>(i)]) continue;
      const int j = node.best.row_to_col[static_cast<std::size_t>(i)];

      Node child;
      child.matrix = prefix;
      child.matrix(i, j) = kInf;
      child.forced_row = forced;
      const auto solved = solve_lex_smallest(child.matrix);
      if (solved.has_value()) {
        // Recompute the cost by direct summation so equal-cost ordering uses
        // identical arithmetic across nodes.
        child.best = *solved;
        child.best.cost = assignment_cost(child.matrix, child.best.row_to_col);
        queue.push(std::move(child));
      }

      // Fix (i, j) in the running prefix for later siblings.
      for (int jj = 0; jj < cols; ++jj)
        if (jj != j) prefix(i, jj) = kInf;
      for (int ii = 0; ii < rows; ++ii)
        if (ii != i) prefix(ii, j) = kInf;
      forced[static_cast<std::size_t>(i)] = 1;
    }
  }
  return out;
}

}  // namespace palmtrack
