#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "smot/tracking.hpp"

namespace smot {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Square min-cost assignment with potentials, O(n^3). Returns the column
// matched to each row.
std::vector<int> solve_square(const Eigen::MatrixXd& a) {
  const int n = static_cast<int>(a.rows());
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1, 0);

  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), kInf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      int j1 = -1;
      double delta = kInf;
      for (int j = 1; j <= n; ++j) {
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
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<int> col_of_row(n, -1);
  for (int j = 1; j <= n; ++j)
    if (p[j] != 0) col_of_row[p[j] - 1] = j - 1;
  return col_of_row;
}

// Optimal total over real pairs for the sub-problem spanned by the given
// row/col subsets. Dummy pads cost zero, so they never distort the optimum.
double optimal_cost(const Eigen::MatrixXd& cost, const std::vector<int>& rows,
                    const std::vector<int>& cols) {
  const int m = static_cast<int>(rows.size());
  const int k = static_cast<int>(cols.size());
  if (m == 0 || k == 0) return 0.0;
  const int s = std::max(m, k);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(s, s);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < k; ++j) a(i, j) = cost(rows[i], cols[j]);
  const std::vector<int> col_of_row = solve_square(a);
  double total = 0.0;
  for (int i = 0; i < m; ++i)
    if (col_of_row[i] >= 0 && col_of_row[i] < k) total += a(i, col_of_row[i]);
  return total;
}

}  // namespace

std::vector<std::pair<int, int>> hungarian(const Eigen::MatrixXd& cost) {
  const int m = static_cast<int>(cost.rows());
  const int k = static_cast<int>(cost.cols());
  if (m == 0 || k == 0) return {};
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < k; ++j)
      if (!std::isfinite(cost(i, j)))
        throw std::invalid_argument("hungarian: costs must be finite");

  std::vector<int> rows(m), cols(k);
  for (int i = 0; i < m; ++i) rows[i] = i;
  for (int j = 0; j < k; ++j) cols[j] = j;

  const double target = optimal_cost(cost, rows, cols);
  const double tol = 1e-9 * std::max(1.0, std::abs(target));
  const int need = std::min(m, k);

  // Fix pairs front-to-back: matching the smallest remaining row (with the
  // smallest workable column) is always lexicographically preferable, so a
  // greedy scan with optimality re-checks yields the smallest optimal list.
  std::vector<std::pair<int, int>> result;
  result.reserve(need);
  double fixed = 0.0;
  while (static_cast<int>(result.size()) < need) {
    const int r = rows.front();
    std::vector<int> rows_rest(rows.begin() + 1, rows.end());
    bool matched = false;
    for (std::size_t cj = 0; cj < cols.size(); ++cj) {
      const int c = cols[cj];
      std::vector<int> cols_rest = cols;
      cols_rest.erase(cols_rest.begin() + static_cast<long>(cj));
      const double sub = optimal_cost(cost, rows_rest, cols_rest);
      if (std::abs(fixed + cost(r, c) + sub - target) <= tol) {
        result.emplace_back(r, c);
        fixed += cost(r, c);
        rows.erase(rows.begin());
        cols.erase(cols.begin() + static_cast<long>(cj));
        matched = true;
        break;
      }
    }
    // Only possible with surplus rows: every optimal assignment skips r.
    if (!matched) rows.erase(rows.begin());
  }
  return result;
}

}  // namespace smot
