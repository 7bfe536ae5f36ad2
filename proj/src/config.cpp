#include "pathtracker/config.hpp"

#include <string>

#include "pathtracker/errors.hpp"

namespace pathtracker {

const char* to_string(DataErrorKind kind) {
  switch (kind) {
    case DataErrorKind::io: return "io error";
    case DataErrorKind::bad_magic: return "bad magic";
    case DataErrorKind::checksum: return "checksum mismatch";
    case DataErrorKind::truncated: return "truncated shard";
    case DataErrorKind::dimension_mismatch: return "dimension mismatch";
    case DataErrorKind::count_mismatch: return "count mismatch";
    case DataErrorKind::malformed: return "malformed data";
    case DataErrorKind::missing_index: return "missing index";
    case DataErrorKind::unknown_label: return "unknown label";
    case DataErrorKind::index_out_of_range: return "index out of range";
    case DataErrorKind::length_mismatch: return "length mismatch";
    case DataErrorKind::empty_input: return "empty input";
  }
  return "data error";
}

std::string_view to_string(Layout layout) {
  switch (layout) {
    case Layout::mixed: return "mixed";
    case Layout::engineered: return "engineered";
    case Layout::flow: return "flow";
  }
  return "unknown";
}

Layout parse_layout(std::string_view name) {
  if (name == "mixed") return Layout::mixed;
  if (name == "engineered") return Layout::engineered;
  if (name == "flow") return Layout::flow;
  throw ConfigError("unknown layout '" + std::string(name) + "'");
}

std::string_view to_string(Fold fold) { return fold == Fold::train ? "train" : "test"; }

Fold parse_fold(std::string_view name) {
  if (name == "train") return Fold::train;
  if (name == "test") return Fold::test;
  throw ConfigError("unknown fold '" + std::string(name) + "'");
}

std::string_view speed_name(int speed) {
  switch (speed) {
    case 1: return "normal";
    case 2: return "fast";
    case 4: return "very fast";
    default: return "invalid";
  }
}

bool is_valid_frames_speed(int frames, int speed) {
  const bool frames_ok = frames == 32 || frames == 64 || frames == 128;
  const bool speed_ok = speed == 1 || speed == 2 || speed == 4;
  return frames_ok && speed_ok && frames * speed <= kMaxPathFrames;
}

std::vector<std::pair<int, int>> valid_frames_speed_pairs() {
  std::vector<std::pair<int, int>> out;
  for (int frames : {32, 64, 128})
    for (int speed : {1, 2, 4})
      if (is_valid_frames_speed(frames, speed)) out.emplace_back(frames, speed);
  return out;
}

void validate(const GenConfig& cfg) {
  if (!is_valid_frames_speed(cfg.frames, cfg.speed)) {
    throw ConfigError("invalid (frames, speed) = (" + std::to_string(cfg.frames) + ", " +
                      std::to_string(cfg.speed) +
                      "); frames must be 32/64/128, speed 1/2/4, frames*speed <= 128");
  }
  if (cfg.height != kCanvasHeight || cfg.width != kCanvasWidth)
    throw ConfigError("canvas must be 32x32");
  if (cfg.distractors < 0) throw ConfigError("distractors must be non-negative");
  if (cfg.dot_count() > 0xffff) throw ConfigError("too many distractors");
  if (cfg.train_count < 0 || cfg.test_count < 0) throw ConfigError("fold sizes must be non-negative");
  if (cfg.max_resample_attempts < 1) throw ConfigError("max_resample_attempts must be >= 1");
  if (cfg.layout == Layout::flow)
    throw ConfigError("flow layout is produced by encode-flow, not by the generator");
}

}  // namespace pathtracker
