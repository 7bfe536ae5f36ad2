#pragma once

#include <cstddef>
#include <vector>

namespace pathtracker {

/// Dense row-major cost matrix.
class CostMatrix {
 public:
  CostMatrix() = default;
  CostMatrix(int rows, int cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols), fill) {}

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  double& operator()(int r, int c) { return data_[index(r, c)]; }
  double operator()(int r, int c) const { return data_[index(r, c)]; }

 private:
  std::size_t index(int r, int c) const {
    return static_cast<std::size_t>(r) * static_cast<std::size_t>(cols_) + static_cast<std::size_t>(c);
  }

  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

struct Assignment {
  /// Column assigned to each row, -1 when the row is left unassigned (rows > cols).
  std::vector<int> col_of_row;
  /// Sum of the costs of the assigned pairs.
  double total_cost = 0.0;
};

/// Minimum-cost assignment of rows to columns. Rectangular inputs are padded to
/// square with a constant, so every row (or every column) is matched. Among all
/// optimal assignments the one whose column sequence, read by row, is
/// lexicographically smallest is returned; padding columns sort after real ones.
/// Throws DataError on non-finite entries.
Assignment hungarian_assign(const CostMatrix& cost);

}  // namespace pathtracker
