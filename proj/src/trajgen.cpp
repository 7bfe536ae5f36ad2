#include "pathtracker/trajgen.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "pathtracker/errors.hpp"

namespace pathtracker {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kDegToRad = kPi / 180.0;
constexpr double kLengthTolerance = 1e-9;
constexpr double kTurnToleranceDeg = 1e-9;

bool outside(double c) { return c < 0.0 || c > kMaxCoordinate; }

std::string describe(double value, double bound) {
  std::ostringstream os;
  os.precision(17);
  os << value << " (bound " << bound << ")";
  return os.str();
}

}  // namespace

std::string_view to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::length: return "length";
    case ViolationKind::step_length: return "step_length";
    case ViolationKind::bend: return "bend";
    case ViolationKind::bounds: return "bounds";
    case ViolationKind::subsampling: return "subsampling";
  }
  return "unknown";
}

double turn_degrees(double from_rad, double to_rad) {
  double d = std::remainder(to_rad - from_rad, 2.0 * kPi);
  if (d <= -kPi) d += 2.0 * kPi;
  return d / kDegToRad;
}

Trajectory sample_base_walk(Rng& rng, int n_steps, const GenConfig& cfg) {
  (void)cfg;  // canvas size is fixed and already validated
  Trajectory t;
  t.base_positions.reserve(static_cast<std::size_t>(n_steps) + 1);
  t.headings.reserve(static_cast<std::size_t>(n_steps));
  t.reflected.reserve(static_cast<std::size_t>(n_steps));

  Vec2 p{rng.uniform(0.0, kMaxCoordinate), rng.uniform(0.0, kMaxCoordinate)};
  t.base_positions.push_back(p);
  if (n_steps <= 0) return t;

  double heading = rng.uniform(0.0, 2.0 * kPi);
  const double max_turn = kMaxTurnDegrees * kDegToRad;
  for (int i = 0; i < n_steps; ++i) {
    // The first step keeps the initial heading; later steps bend.
    if (i > 0) heading += rng.uniform(-max_turn, max_turn);
    bool reflected = false;
    if (outside(p.x + kBaseStepLength * std::cos(heading))) {
      heading = kPi - heading;
      reflected = true;
    }
    if (outside(p.y + kBaseStepLength * std::sin(heading))) {
      heading = -heading;
      reflected = true;
    }
    heading = std::remainder(heading, 2.0 * kPi);
    p = Vec2{p.x + kBaseStepLength * std::cos(heading), p.y + kBaseStepLength * std::sin(heading)};
    t.base_positions.push_back(p);
    t.headings.push_back(heading);
    t.reflected.push_back(reflected ? 1 : 0);
  }
  return t;
}

Trajectory subsample_speed(Trajectory base, int k, int frames) {
  if (k < 1 || frames < 1)
    throw ConfigError("subsample_speed: speed and frames must be positive");
  const auto expected = static_cast<std::size_t>(k) * static_cast<std::size_t>(frames - 1) + 1;
  if (base.base_positions.size() != expected) {
    throw ConfigError("subsample_speed: base walk has " + std::to_string(base.base_positions.size()) +
                      " points, expected " + std::to_string(expected));
  }
  base.speed = k;
  base.positions.clear();
  base.positions.reserve(static_cast<std::size_t>(frames));
  for (int i = 0; i < frames; ++i)
    base.positions.push_back(base.base_positions[static_cast<std::size_t>(i) * k]);
  return base;
}

Trajectory generate_trajectory(Rng& rng, const GenConfig& cfg) {
  return subsample_speed(sample_base_walk(rng, cfg.base_steps(), cfg), cfg.speed, cfg.frames);
}

std::vector<Violation> validate_trajectory(const Trajectory& t, const GenConfig& cfg) {
  std::vector<Violation> out;
  const int k = cfg.speed;
  const auto n_base = static_cast<std::size_t>(cfg.base_steps()) + 1;

  if (t.positions.size() != static_cast<std::size_t>(cfg.frames))
    out.push_back({ViolationKind::length, 0,
                   "positions has " + std::to_string(t.positions.size()) + " entries"});
  if (t.base_positions.size() != n_base)
    out.push_back({ViolationKind::length, 0,
                   "base_positions has " + std::to_string(t.base_positions.size()) + " entries"});
  if (t.reflected.size() + 1 != t.base_positions.size())
    out.push_back({ViolationKind::length, 0, "reflection flags do not match base steps"});
  if (!out.empty()) return out;

  const auto& base = t.base_positions;
  std::vector<double> step_heading(base.size() - 1);
  for (std::size_t i = 0; i + 1 < base.size(); ++i) {
    const double dx = base[i + 1].x - base[i].x;
    const double dy = base[i + 1].y - base[i].y;
    const double len = std::hypot(dx, dy);
    step_heading[i] = std::atan2(dy, dx);
    const bool ok = t.reflected[i] ? len <= t.base_step_len + kLengthTolerance
                                   : std::abs(len - t.base_step_len) <= kLengthTolerance;
    if (!ok)
      out.push_back({ViolationKind::step_length, static_cast<int>(i) + 1,
                     "base step " + describe(len, t.base_step_len)});
    if (i > 0 && !t.reflected[i]) {
      const double turn = std::abs(turn_degrees(step_heading[i - 1], step_heading[i]));
      if (turn > kMaxTurnDegrees + kTurnToleranceDeg)
        out.push_back({ViolationKind::bend, static_cast<int>(i), "turn " + describe(turn, kMaxTurnDegrees)});
    }
  }
  for (std::size_t i = 0; i < base.size(); ++i) {
    if (outside(base[i].x) || outside(base[i].y))
      out.push_back({ViolationKind::bounds, static_cast<int>(i), "base point outside canvas"});
  }

  const double max_disp = kBaseStepLength * k + kLengthTolerance;
  for (std::size_t f = 0; f < t.positions.size(); ++f) {
    const Vec2& p = t.positions[f];
    if (outside(p.x) || outside(p.y))
      out.push_back({ViolationKind::bounds, static_cast<int>(f), "frame position outside canvas"});
    if (f > 0) {
      const double d = std::hypot(p.x - t.positions[f - 1].x, p.y - t.positions[f - 1].y);
      if (d > max_disp)
        out.push_back({ViolationKind::step_length, static_cast<int>(f),
                       "frame displacement " + describe(d, kBaseStepLength * k)});
    }
    if (!(p == base[f * static_cast<std::size_t>(k)]))
      out.push_back({ViolationKind::subsampling, static_cast<int>(f), "position differs from base point"});
  }
  return out;
}

}  // namespace pathtracker
