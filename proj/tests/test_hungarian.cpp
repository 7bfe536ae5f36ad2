#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "oracle.hpp"
#include "pathtracker/errors.hpp"
#include "pathtracker/hungarian.hpp"
#include "pathtracker/random.hpp"

using namespace pathtracker;

namespace {

CostMatrix from_rows(std::vector<std::vector<double>> rows) {
  CostMatrix c(static_cast<int>(rows.size()), static_cast<int>(rows[0].size()));
  for (int r = 0; r < c.rows(); ++r)
    for (int k = 0; k < c.cols(); ++k) c(r, k) = rows[static_cast<std::size_t>(r)][static_cast<std::size_t>(k)];
  return c;
}

double assigned_sum(const CostMatrix& c, const Assignment& a) {
  double s = 0.0;
  for (int r = 0; r < c.rows(); ++r) {
    const int k = a.col_of_row[static_cast<std::size_t>(r)];
    if (k >= 0) s += c(r, k);
  }
  return s;
}

}  // namespace

TEST(Hungarian, DiagonalIsIdentity) {
  const Assignment a = hungarian_assign(from_rows({{1, 9, 9}, {9, 1, 9}, {9, 9, 1}}));
  EXPECT_EQ(a.col_of_row, (std::vector<int>{0, 1, 2}));
  EXPECT_EQ(a.total_cost, 3.0);
}

TEST(Hungarian, AntiDiagonalPreferred) {
  const Assignment a = hungarian_assign(from_rows({{1, 2}, {2, 1}}));
  EXPECT_EQ(a.col_of_row, (std::vector<int>{0, 1}));
  const Assignment b = hungarian_assign(from_rows({{2, 1}, {1, 2}}));
  EXPECT_EQ(b.col_of_row, (std::vector<int>{1, 0}));
  EXPECT_EQ(b.total_cost, 2.0);
}

TEST(Hungarian, TiesBrokenLexicographically) {
  const Assignment a = hungarian_assign(CostMatrix(3, 3, 5.0));
  EXPECT_EQ(a.col_of_row, (std::vector<int>{0, 1, 2}));
}

TEST(Hungarian, RectangularShapes) {
  const Assignment wide = hungarian_assign(from_rows({{5, 1, 7}, {2, 8, 3}}));
  EXPECT_EQ(wide.col_of_row, (std::vector<int>{1, 0}));
  EXPECT_EQ(wide.total_cost, 3.0);
  const Assignment tall = hungarian_assign(from_rows({{5, 1}, {2, 8}, {0, 0}}));
  EXPECT_EQ(tall.total_cost, 1.0);
  int unassigned = 0;
  for (int k : tall.col_of_row) unassigned += k < 0;
  EXPECT_EQ(unassigned, 1);
}

TEST(Hungarian, EmptyMatrix) {
  const Assignment a = hungarian_assign(CostMatrix(0, 0));
  EXPECT_TRUE(a.col_of_row.empty());
  EXPECT_EQ(a.total_cost, 0.0);
}

TEST(Hungarian, NonFiniteRejected) {
  CostMatrix c(2, 2, 1.0);
  c(1, 0) = std::numeric_limits<double>::quiet_NaN();
  try {
    hungarian_assign(c);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_EQ(e.kind(), DataErrorKind::malformed);
  }
}

TEST(Hungarian, MatchesExhaustiveSearchOnRandomMatrices) {
  Rng rng(2718);
  for (int trial = 0; trial < 1000; ++trial) {
    const int rows = 1 + static_cast<int>(rng.below(7));
    const int cols = 1 + static_cast<int>(rng.below(7));
    CostMatrix c(rows, cols);
    // Dyadic entries keep sums exact; a small range forces many ties.
    const bool coarse = trial % 2 == 0;
    for (int r = 0; r < rows; ++r)
      for (int k = 0; k < cols; ++k)
        c(r, k) = coarse ? static_cast<double>(rng.below(4)) : static_cast<double>(rng.below(1 << 12)) / 64.0;
    const Assignment a = hungarian_assign(c);
    const double best = oracle::brute_force_min(c);
    ASSERT_EQ(a.total_cost, best) << "trial " << trial;
    ASSERT_EQ(assigned_sum(c, a), best) << "trial " << trial;
    if (rows == cols) ASSERT_EQ(a.col_of_row, oracle::brute_force_lex(c)) << "trial " << trial;
  }
}
