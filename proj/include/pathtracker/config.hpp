#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace pathtracker {

inline constexpr int kCanvasHeight = 32;
inline constexpr int kCanvasWidth = 32;
inline constexpr int kChannels = 3;
/// Longest base path, in frames, any speed tier may traverse.
inline constexpr int kMaxPathFrames = 128;

/// Channel arrangement of rendered frames.
///   mixed:      white dots in all channels, start marker in 0, finish marker in 2
///   engineered: channel 0 start marker, channel 1 dots, channel 2 finish marker
///   flow:       channel 0 quantized u, channel 1 quantized v, channel 2 dots
enum class Layout : std::uint8_t { mixed = 0, engineered = 1, flow = 2 };

std::string_view to_string(Layout layout);
Layout parse_layout(std::string_view name);

enum class Fold : std::uint8_t { train = 0, test = 1 };

std::string_view to_string(Fold fold);
Fold parse_fold(std::string_view name);

/// Speed names used in reports: 1 normal, 2 fast, 4 very fast.
std::string_view speed_name(int speed);

struct GenConfig {
  int frames = 32;
  int distractors = 1;
  int speed = 1;
  Layout layout = Layout::mixed;
  int height = kCanvasHeight;
  int width = kCanvasWidth;
  int train_count = 20000;
  int test_count = 20000;
  std::uint64_t master_seed = 0;
  int max_resample_attempts = 1000;

  int dot_count() const { return distractors + 1; }
  /// Number of 2 px steps in the unsubsampled walk.
  int base_steps() const { return speed * (frames - 1); }
  int fold_count(Fold fold) const { return fold == Fold::train ? train_count : test_count; }

  friend bool operator==(const GenConfig&, const GenConfig&) = default;
};

/// True for exactly the (frames, speed) pairs the benchmark generates:
/// (32,1) (32,2) (32,4) (64,1) (64,2) (128,1).
bool is_valid_frames_speed(int frames, int speed);

/// All valid (frames, speed) pairs in ascending order.
std::vector<std::pair<int, int>> valid_frames_speed_pairs();

/// Throws ConfigError describing the first violated constraint.
void validate(const GenConfig& cfg);

}  // namespace pathtracker
