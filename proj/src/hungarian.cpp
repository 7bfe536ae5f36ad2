#include "pathtracker/hungarian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pathtracker/errors.hpp"

namespace pathtracker {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Solution {
  std::vector<int> col_of_row;  // indices into the solved submatrix
  std::vector<double> row_pot;
  std::vector<double> col_pot;
  double total = 0.0;
};

// Shortest augmenting path solver on a square matrix given as an index view:
// entry (i, j) is a[rows[i]][cols[j]].
Solution solve_square(const std::vector<std::vector<double>>& a, const std::vector<int>& rows,
                      const std::vector<int>& cols) {
  const int n = static_cast<int>(rows.size());
  Solution s;
  s.col_of_row.assign(static_cast<std::size_t>(n), -1);
  if (n == 0) return s;

  // 1-based arrays; column 0 is the virtual root of each augmentation.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<int> row_of_col(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  const auto at = [&](int i, int j) {
    return a[static_cast<std::size_t>(rows[i - 1])][static_cast<std::size_t>(cols[j - 1])];
  };

  for (int i = 1; i <= n; ++i) {
    row_of_col[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), kInf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const int i0 = row_of_col[j0];
      double delta = kInf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = at(i0, j) - u[i0] - v[j];
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
          u[row_of_col[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (row_of_col[j0] != 0);
    do {
      const int j1 = way[j0];
      row_of_col[j0] = row_of_col[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  for (int j = 1; j <= n; ++j) s.col_of_row[static_cast<std::size_t>(row_of_col[j] - 1)] = j - 1;
  s.row_pot.assign(u.begin() + 1, u.end());
  s.col_pot.assign(v.begin() + 1, v.end());
  for (int i = 0; i < n; ++i) s.total += at(i + 1, s.col_of_row[static_cast<std::size_t>(i)] + 1);
  return s;
}

}  // namespace

Assignment hungarian_assign(const CostMatrix& cost) {
  const int n_rows = cost.rows();
  const int n_cols = cost.cols();
  double scale = 1.0;
  for (int r = 0; r < n_rows; ++r)
    for (int c = 0; c < n_cols; ++c) {
      const double x = cost(r, c);
      if (!std::isfinite(x))
        throw DataError(DataErrorKind::malformed, "hungarian_assign: non-finite cost at (" +
                                                      std::to_string(r) + ", " + std::to_string(c) + ")");
      scale = std::max(scale, std::abs(x));
    }

  Assignment result;
  result.col_of_row.assign(static_cast<std::size_t>(n_rows), -1);
  const int n = std::max(n_rows, n_cols);
  if (n == 0) return result;

  // Square padding with a constant leaves the argmin unchanged.
  std::vector<std::vector<double>> a(static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(n), 0.0));
  for (int r = 0; r < n_rows; ++r)
    for (int c = 0; c < n_cols; ++c) a[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] = cost(r, c);

  std::vector<int> all(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) all[static_cast<std::size_t>(i)] = i;
  const Solution full = solve_square(a, all, all);
  const double tol = 1e-9 * scale * n;

  // Lexicographic refinement: fix rows in order, each to the smallest column
  // that still admits an optimal completion. Only zero reduced-cost edges can
  // belong to an optimal assignment, which keeps the re-solves rare.
  std::vector<int> assign = full.col_of_row;
  std::vector<int> free_cols = all;
  double fixed_cost = 0.0;
  for (int r = 0; r < n; ++r) {
    std::vector<int> rest_rows;
    for (int i = r + 1; i < n; ++i) rest_rows.push_back(i);
    const int current = assign[static_cast<std::size_t>(r)];
    for (int j : free_cols) {
      if (j >= current) break;
      const double reduced = a[static_cast<std::size_t>(r)][static_cast<std::size_t>(j)] -
                             full.row_pot[static_cast<std::size_t>(r)] - full.col_pot[static_cast<std::size_t>(j)];
      if (reduced > tol) continue;
      std::vector<int> rest_cols;
      for (int c : free_cols)
        if (c != j) rest_cols.push_back(c);
      const Solution sub = solve_square(a, rest_rows, rest_cols);
      const double total = fixed_cost + a[static_cast<std::size_t>(r)][static_cast<std::size_t>(j)] + sub.total;
      if (total <= full.total + tol) {
        assign[static_cast<std::size_t>(r)] = j;
        for (std::size_t k = 0; k < rest_rows.size(); ++k)
          assign[static_cast<std::size_t>(rest_rows[k])] = rest_cols[static_cast<std::size_t>(sub.col_of_row[k])];
        break;
      }
    }
    const int chosen = assign[static_cast<std::size_t>(r)];
    fixed_cost += a[static_cast<std::size_t>(r)][static_cast<std::size_t>(chosen)];
    free_cols.erase(std::find(free_cols.begin(), free_cols.end(), chosen));
  }

  for (int r = 0; r < n_rows; ++r) {
    const int c = assign[static_cast<std::size_t>(r)];
    if (c < n_cols) {
      result.col_of_row[static_cast<std::size_t>(r)] = c;
      result.total_cost += cost(r, c);
    }
  }
  return result;
}

}  // namespace pathtracker
