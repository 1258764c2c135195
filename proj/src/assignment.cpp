#include "glow/assignment.hpp"

#include <limits>

namespace glow {

namespace {

// Rows <= cols. Potentials u (rows) and v (cols), 1-based with a sentinel
// column 0; match[j] is the row holding column j.
std::vector<int> hungarian_rows_le_cols(const Eigen::MatrixXd& a) {
  const int n = static_cast<int>(a.rows());
  const int m = static_cast<int>(a.cols());
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0), minv(m + 1);
  std::vector<int> match(m + 1, 0), way(m + 1, 0);
  std::vector<char> used(m + 1);

  for (int i = 1; i <= n; ++i) {
    match[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const int i0 = match[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= m; ++j) {
        if (used[j]) continue;
        const double cur = a(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= m; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const int j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<int> row_to_col(n, -1);
  for (int j = 1; j <= m; ++j) {
    if (match[j] != 0) row_to_col[match[j] - 1] = j - 1;
  }
  return row_to_col;
}

}  // namespace

AssignmentResult solve_assignment(const Eigen::MatrixXd& cost) {
  const auto rows = static_cast<int>(cost.rows());
  const auto cols = static_cast<int>(cost.cols());
  AssignmentResult result;
  result.row_to_col.assign(rows, -1);
  result.col_to_row.assign(cols, -1);
  if (rows == 0 || cols == 0) return result;

  if (rows <= cols) {
    result.row_to_col = hungarian_rows_le_cols(cost);
    for (int r = 0; r < rows; ++r) result.col_to_row[result.row_to_col[r]] = r;
  } else {
    result.col_to_row = hungarian_rows_le_cols(cost.transpose());
    for (int c = 0; c < cols; ++c) result.row_to_col[result.col_to_row[c]] = c;
  }
  for (int r = 0; r < rows; ++r) {
    if (result.row_to_col[r] >= 0) result.total_cost += cost(r, result.row_to_col[r]);
  }
  return result;
}

}  // namespace glow
