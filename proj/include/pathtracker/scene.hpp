#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pathtracker/config.hpp"
#include "pathtracker/trajgen.hpp"

namespace pathtracker {

inline constexpr int kDotSize = 2;
inline constexpr int kMarkerSize = 4;
inline constexpr std::uint8_t kOn = 255;

/// Containment radius for "ends inside the marker", Chebyshev px.
inline constexpr double kContainRadius = 1.5;
/// Minimum Chebyshev distance between a negative's target end and the finish marker.
inline constexpr double kNegativeSeparation = 6.0;
/// Non-finisher dots must end strictly farther than this from the finish marker.
inline constexpr double kExclusionRadius = 3.0;

inline constexpr std::size_t kFrameBytes =
    static_cast<std::size_t>(kCanvasHeight) * kCanvasWidth * kChannels;

enum class Label : std::uint8_t { negative = 0, positive = 1 };

std::string_view to_string(Label label);
Label parse_label(std::string_view name);

enum class MarkerKind : std::uint8_t { start, finish };

/// 4x4 square covering pixels [cx-2, cx+1] x [cy-2, cy+1].
struct Marker {
  int cx = 0;
  int cy = 0;
  MarkerKind kind = MarkerKind::start;

  Vec2 center() const { return {static_cast<double>(cx), static_cast<double>(cy)}; }
  friend bool operator==(const Marker&, const Marker&) = default;
};

/// Center of the rendered 2x2 square for a dot at `p`: floor(p) + 1.
Vec2 dot_center(Vec2 p);

/// Marker centered on the dot square at `p`, clamped fully inside the canvas.
Marker marker_at(Vec2 p, MarkerKind kind);

double chebyshev(Vec2 a, Vec2 b);

using Frame = std::array<std::uint8_t, kFrameBytes>;

inline std::size_t pixel_offset(int y, int x, int c) {
  return (static_cast<std::size_t>(y) * kCanvasWidth + static_cast<std::size_t>(x)) * kChannels +
         static_cast<std::size_t>(c);
}

/// Row-major T x H x W x C tensor of 8-bit intensities.
class Video {
 public:
  Video() = default;
  explicit Video(int frames) : frames_(frames), data_(static_cast<std::size_t>(frames) * kFrameBytes, 0) {}

  int frames() const { return frames_; }
  std::span<std::uint8_t> frame(int t) { return {data_.data() + static_cast<std::size_t>(t) * kFrameBytes, kFrameBytes}; }
  std::span<const std::uint8_t> frame(int t) const {
    return {data_.data() + static_cast<std::size_t>(t) * kFrameBytes, kFrameBytes};
  }
  std::uint8_t at(int t, int y, int x, int c) const {
    return data_[static_cast<std::size_t>(t) * kFrameBytes + pixel_offset(y, x, c)];
  }
  std::uint8_t& at(int t, int y, int x, int c) {
    return data_[static_cast<std::size_t>(t) * kFrameBytes + pixel_offset(y, x, c)];
  }
  std::span<const std::uint8_t> bytes() const { return data_; }
  std::span<std::uint8_t> bytes() { return data_; }

  friend bool operator==(const Video&, const Video&) = default;

 private:
  int frames_ = 0;
  std::vector<std::uint8_t> data_;
};

struct VideoSample {
  Video video;
  Label label = Label::positive;
  Trajectory target;
  std::vector<Trajectory> distractors;
  Marker start;
  Marker finish;
  /// 0 designates the target, i >= 1 designates distractors[i - 1].
  int finisher_index = 0;
  std::uint64_t sample_seed = 0;
  Layout layout = Layout::mixed;
  int speed = 1;
  /// Trajectories redrawn while enforcing the end-point margins.
  int resamples = 0;

  int frames() const { return video.frames(); }
  const Trajectory& dot(int i) const { return i == 0 ? target : distractors[static_cast<std::size_t>(i) - 1]; }
  int dot_count() const { return static_cast<int>(distractors.size()) + 1; }
  /// Positions of every dot at frame t, target first.
  std::vector<Vec2> dot_positions(int t) const;
};

/// Seed of sample `index` in `fold`; folds draw from disjoint streams.
std::uint64_t sample_seed_for(std::uint64_t master_seed, Fold fold, std::uint64_t index);

/// Label of sample `index` in a fold: even indices positive, odd negative.
Label label_for_index(std::uint64_t index);

/// Target ending in the finish marker; distractors redrawn until none ends
/// within kExclusionRadius of it. Throws GenerationError when the budget runs out.
VideoSample compose_positive(std::uint64_t sample_seed, const GenConfig& cfg);

/// A uniformly chosen distractor ends in the finish marker, the target ends at
/// least kNegativeSeparation away. Throws ConfigError when cfg.distractors == 0.
VideoSample compose_negative(std::uint64_t sample_seed, const GenConfig& cfg);

/// compose_positive or compose_negative according to label_for_index(index).
VideoSample generate_sample(const GenConfig& cfg, Fold fold, std::uint64_t index);

/// Dots are 2x2 squares at floor(position), merged by per-pixel maximum.
/// Markers are 4x4 squares. Throws ConfigError for Layout::flow.
Frame render_frame(std::span<const Vec2> dot_positions, const Marker& start, const Marker& finish,
                   Layout layout);

/// Number of frames in which the target square overlaps some distractor square.
int crossing_stats(const VideoSample& sample);

/// Problems found by recomputing the label invariants from trajectories and
/// markers, plus trajectory validation when base paths are present.
std::vector<std::string> check_sample(const VideoSample& sample, const GenConfig& cfg);

}  // namespace pathtracker
