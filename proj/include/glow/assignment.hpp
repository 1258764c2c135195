#pragma once

#include <vector>

#include <Eigen/Core>

namespace glow {

struct AssignmentResult {
  std::vector<int> row_to_col;  // -1 when the row is unassigned
  std::vector<int> col_to_row;  // -1 when the column is unassigned
  double total_cost = 0.0;      // summed over assigned rows in row order
};

/// Minimum-cost rectangular assignment (Kuhn-Munkres with potentials,
/// O(n^2 m)). Every row is assigned when rows <= cols, every column otherwise.
AssignmentResult solve_assignment(const Eigen::MatrixXd& cost);

}  // namespace glow
