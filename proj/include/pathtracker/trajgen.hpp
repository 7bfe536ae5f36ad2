#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pathtracker/config.hpp"
#include "pathtracker/random.hpp"

namespace pathtracker {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Vec2&, const Vec2&) = default;
};

inline constexpr double kBaseStepLength = 2.0;
inline constexpr double kMaxTurnDegrees = 20.0;
/// Largest coordinate a dot anchor may take; the 2x2 square then covers pixels 30..31.
inline constexpr double kMaxCoordinate = 30.0;

/// One dot's path. `base_positions` is the unsubsampled 2 px walk; `positions`
/// holds one entry per video frame and is every `speed`-th base point.
struct Trajectory {
  std::vector<Vec2> positions;
  std::vector<Vec2> base_positions;
  /// Heading of each base step, radians. Size = base_positions.size() - 1.
  std::vector<double> headings;
  /// Nonzero where the base step was reflected off the canvas edge.
  std::vector<std::uint8_t> reflected;
  int speed = 1;
  double base_step_len = kBaseStepLength;
};

/// Random walk of `n_steps` fixed-length steps with bounded heading change.
/// Steps that would leave [0, kMaxCoordinate] have the offending heading
/// component mirrored and are flagged in `reflected`.
Trajectory sample_base_walk(Rng& rng, int n_steps, const GenConfig& cfg);

/// Fills `positions` with every k-th base point. Throws ConfigError unless
/// the base walk has exactly k*(frames-1)+1 points.
Trajectory subsample_speed(Trajectory base, int k, int frames);

/// sample_base_walk + subsample_speed for the config's frames and speed.
Trajectory generate_trajectory(Rng& rng, const GenConfig& cfg);

enum class ViolationKind { length, step_length, bend, bounds, subsampling };

struct Violation {
  ViolationKind kind;
  /// Base-step index for step_length/bend on the base walk, frame index otherwise.
  int index;
  std::string detail;
};

std::string_view to_string(ViolationKind kind);

/// Recomputes step lengths and turn angles from the stored coordinates and
/// lists every broken constraint. Empty result means the trajectory is valid.
std::vector<Violation> validate_trajectory(const Trajectory& t, const GenConfig& cfg);

/// Signed turn from heading a to heading b, wrapped to (-180, 180] degrees.
double turn_degrees(double from_rad, double to_rad);

}  // namespace pathtracker
