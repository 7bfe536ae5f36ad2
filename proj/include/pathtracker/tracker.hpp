#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pathtracker/hungarian.hpp"
#include "pathtracker/scene.hpp"

namespace pathtracker {

struct Detection {
  /// Pixel-mean of the component in continuous coordinates (pixel i spans [i, i+1)).
  Vec2 centroid;
  int pixel_count = 0;
  int frame_index = 0;
  /// Inclusive pixel bounding box.
  int min_x = 0, min_y = 0, max_x = 0, max_y = 0;
  /// Linear indices (y * width + x) of the component's pixels.
  std::vector<int> pixels;

  /// Chebyshev distance from `p` to the pixel area covered by the bounding box.
  double box_distance(Vec2 p) const;
};

struct TrackState {
  Vec2 position;
  Vec2 velocity;
  bool is_target = false;
  /// Sharing its detection with another track in the current frame.
  bool merged = false;
  std::vector<Detection> history;
};

struct TrackSet {
  std::vector<TrackState> tracks;
  int frame_cursor = 0;
  /// Frames that contained no detections at all.
  std::vector<int> failed_frames;

  const TrackState& target() const;
};

/// Exponential smoothing weight given to the newest displacement.
inline constexpr double kVelocitySmoothing = 0.7;
/// Cost assigned to track/detection pairs outside the gate.
inline constexpr double kGateSentinel = 1e4;
/// Start-marker search radius (Chebyshev px) for the target's first detection.
inline constexpr double kStartSearchRadius = 3.0;

/// Association gate: largest per-frame displacement plus rasterization slack.
inline double gate_radius(int speed) { return 2.0 * speed + 2.0; }

/// Everything the oracle is allowed to see of a sample.
struct TrackerInput {
  const Video* video = nullptr;
  Layout layout = Layout::mixed;
  Marker start;
  Marker finish;
  int dot_count = 1;
  int speed = 1;
};

/// Frames, markers and configuration only; labels and trajectories stay behind.
TrackerInput tracker_input(const VideoSample& sample);

/// 4-connected components of dot pixels, in row-major order of their first pixel.
std::vector<Detection> detect_dots(std::span<const std::uint8_t> frame, Layout layout, int frame_index = 0);

/// Tracks for frame 0. The target starts at the detection nearest the start
/// marker (by pixel extent, then centroid); blobs holding several dots (by
/// pixel count) receive extra tracks. Throws TrackingError if no detection
/// lies within kStartSearchRadius of the marker center.
TrackSet init_tracks(std::span<const Detection> detections, const Marker& start, int dot_count);

/// Constant-velocity prediction; a step that would carry the dot center off
/// the canvas is mirrored back in, as the generator's walk does.
struct MotionPrediction {
  Vec2 position;
  /// Velocity after any mirroring.
  Vec2 velocity;
};
MotionPrediction predict_motion(const TrackState& t);

/// Centers of 2x2 squares, one per prediction, that exactly tile the blob's
/// pixels and lie closest (summed Euclidean distance) to the predictions.
/// Empty when no such tiling exists or the search would be too large.
std::vector<Vec2> fit_squares(const Detection& blob, std::span<const Vec2> predictions);

/// Advances every track by one frame of detections: gated Hungarian
/// association on predicted positions, shared detections for merges,
/// square fitting inside merged blobs and heading-based disambiguation on splits.
TrackSet step_tracks(TrackSet ts, std::span<const Detection> detections, int speed);

struct Prediction {
  std::uint64_t sample_index = 0;
  Label label = Label::negative;
  Vec2 target_final;
};

/// Traces the target from the start marker and reports whether it ends inside the finish marker.
Prediction classify(const TrackerInput& input, std::uint64_t sample_index = 0);
TrackSet run_tracker(const TrackerInput& input);

inline Label classify_sample(const VideoSample& sample) { return classify(tracker_input(sample)).label; }

}  // namespace pathtracker
