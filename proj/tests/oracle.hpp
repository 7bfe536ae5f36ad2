// Reference computations used by the tests. Nothing here calls into the
// library code under test beyond plain data types.
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "pathtracker/hungarian.hpp"
#include "pathtracker/scene.hpp"

namespace oracle {

using pathtracker::Vec2;

inline double center_coord(double p) { return std::floor(p) + 1.0; }

inline double cheb(double ax, double ay, double bx, double by) {
  return std::max(std::fabs(ax - bx), std::fabs(ay - by));
}

/// Recomputes the label invariants from final dot positions and marker
/// centers. Returns an empty string when the sample is consistent.
inline std::string recheck_labels(const pathtracker::VideoSample& s) {
  const int last = s.frames() - 1;
  const double fx = s.finish.cx, fy = s.finish.cy;
  auto end_dist = [&](const pathtracker::Trajectory& t) {
    const Vec2 p = t.positions[static_cast<std::size_t>(last)];
    return cheb(center_coord(p.x), center_coord(p.y), fx, fy);
  };
  const Vec2 p0 = s.target.positions.front();
  if (cheb(center_coord(p0.x), center_coord(p0.y), s.start.cx, s.start.cy) > 1.5)
    return "target does not start in the start marker";
  const double target_end = end_dist(s.target);
  if (s.label == pathtracker::Label::positive) {
    if (target_end > 1.5) return "positive target ends outside finish";
  } else {
    if (target_end < 6.0) return "negative target ends within 6 px";
    if (s.finisher_index < 1 || s.finisher_index > static_cast<int>(s.distractors.size()))
      return "negative without designated distractor";
    if (end_dist(s.distractors[static_cast<std::size_t>(s.finisher_index) - 1]) > 1.5)
      return "designated distractor ends outside finish";
  }
  for (std::size_t i = 0; i < s.distractors.size(); ++i) {
    if (static_cast<int>(i) + 1 == s.finisher_index) continue;
    if (end_dist(s.distractors[i]) <= 3.0) return "non-finisher within 3 px of finish";
  }
  return {};
}

/// Minimum total cost over every injective row-to-column map (rows <= cols)
/// or column-to-row map (rows > cols).
inline double brute_force_min(const pathtracker::CostMatrix& c) {
  const int n = std::min(c.rows(), c.cols());
  const int m = std::max(c.rows(), c.cols());
  const bool transpose = c.rows() > c.cols();
  std::vector<int> perm(static_cast<std::size_t>(m));
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += transpose ? c(perm[static_cast<std::size_t>(i)], i) : c(i, perm[static_cast<std::size_t>(i)]);
    best = std::min(best, sum);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

/// Lexicographically smallest optimal column sequence for a square matrix.
inline std::vector<int> brute_force_lex(const pathtracker::CostMatrix& c) {
  const int n = c.rows();
  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> arg;
  do {
    double sum = 0.0;
    for (int i = 0; i < n; ++i) sum += c(i, perm[static_cast<std::size_t>(i)]);
    if (sum < best) {
      best = sum;
      arg = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return arg;
}

/// Turn between two displacement vectors in degrees, in [0, 180].
inline double turn_between(Vec2 a, Vec2 b) {
  const double dot = a.x * b.x + a.y * b.y;
  const double cross = a.x * b.y - a.y * b.x;
  return std::fabs(std::atan2(cross, dot)) * 180.0 / std::acos(-1.0);
}

}  // namespace oracle
