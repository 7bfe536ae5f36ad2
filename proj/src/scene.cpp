#include "pathtracker/scene.hpp"

#include <algorithm>
#include <cmath>

#include "pathtracker/errors.hpp"

namespace pathtracker {
namespace {

constexpr std::uint64_t kSampleStream = 0;

Rng dot_stream(std::uint64_t sample_seed, int dot_index) {
  return Rng(mix_seed({sample_seed, static_cast<std::uint64_t>(dot_index) + 1}));
}

Vec2 final_center(const Trajectory& t) { return dot_center(t.positions.back()); }

void fill_square(Frame& f, int x0, int y0, int size, int channel) {
  for (int y = std::max(y0, 0); y < std::min(y0 + size, kCanvasHeight); ++y)
    for (int x = std::max(x0, 0); x < std::min(x0 + size, kCanvasWidth); ++x)
      f[pixel_offset(y, x, channel)] = kOn;
}

void fill_marker(Frame& f, const Marker& m, int channel) {
  fill_square(f, m.cx - kMarkerSize / 2, m.cy - kMarkerSize / 2, kMarkerSize, channel);
}

void render_into(VideoSample& s) {
  s.video = Video(static_cast<int>(s.target.positions.size()));
  for (int t = 0; t < s.video.frames(); ++t) {
    const auto positions = s.dot_positions(t);
    const Frame f = render_frame(positions, s.start, s.finish, s.layout);
    std::copy(f.begin(), f.end(), s.video.frame(t).begin());
  }
}

// Redraws `traj` from `rng` until `accept(traj)` holds.
template <typename Accept>
void draw_until(Trajectory& traj, Rng& rng, const GenConfig& cfg, int& resamples, Accept accept,
                const char* what) {
  for (int attempt = 0;; ++attempt) {
    if (accept(traj)) return;
    if (attempt + 1 >= cfg.max_resample_attempts) {
      throw GenerationError(std::string("resampling budget exhausted (") + what + ") for frames=" +
                            std::to_string(cfg.frames) + " distractors=" + std::to_string(cfg.distractors) +
                            " speed=" + std::to_string(cfg.speed) + " after " +
                            std::to_string(cfg.max_resample_attempts) + " attempts");
    }
    traj = generate_trajectory(rng, cfg);
    ++resamples;
  }
}

}  // namespace

std::string_view to_string(Label label) { return label == Label::positive ? "positive" : "negative"; }

Label parse_label(std::string_view name) {
  if (name == "positive") return Label::positive;
  if (name == "negative") return Label::negative;
  throw DataError(DataErrorKind::unknown_label, "'" + std::string(name) + "'");
}

Vec2 dot_center(Vec2 p) { return {std::floor(p.x) + 1.0, std::floor(p.y) + 1.0}; }

Marker marker_at(Vec2 p, MarkerKind kind) {
  const Vec2 c = dot_center(p);
  const int half = kMarkerSize / 2;
  Marker m;
  m.cx = std::clamp(static_cast<int>(c.x), half, kCanvasWidth - half);
  m.cy = std::clamp(static_cast<int>(c.y), half, kCanvasHeight - half);
  m.kind = kind;
  return m;
}

double chebyshev(Vec2 a, Vec2 b) { return std::max(std::abs(a.x - b.x), std::abs(a.y - b.y)); }

std::vector<Vec2> VideoSample::dot_positions(int t) const {
  std::vector<Vec2> out;
  out.reserve(distractors.size() + 1);
  out.push_back(target.positions[static_cast<std::size_t>(t)]);
  for (const auto& d : distractors) out.push_back(d.positions[static_cast<std::size_t>(t)]);
  return out;
}

std::uint64_t sample_seed_for(std::uint64_t master_seed, Fold fold, std::uint64_t index) {
  return mix_seed({master_seed, static_cast<std::uint64_t>(fold) + 1, index});
}

Label label_for_index(std::uint64_t index) { return index % 2 == 0 ? Label::positive : Label::negative; }

VideoSample compose_positive(std::uint64_t sample_seed, const GenConfig& cfg) {
  validate(cfg);
  VideoSample s;
  s.label = Label::positive;
  s.sample_seed = sample_seed;
  s.layout = cfg.layout;
  s.speed = cfg.speed;
  s.finisher_index = 0;

  Rng target_rng = dot_stream(sample_seed, 0);
  s.target = generate_trajectory(target_rng, cfg);
  s.start = marker_at(s.target.positions.front(), MarkerKind::start);
  s.finish = marker_at(s.target.positions.back(), MarkerKind::finish);
  const Vec2 finish = s.finish.center();

  s.distractors.reserve(static_cast<std::size_t>(cfg.distractors));
  for (int d = 1; d <= cfg.distractors; ++d) {
    Rng rng = dot_stream(sample_seed, d);
    Trajectory traj = generate_trajectory(rng, cfg);
    draw_until(traj, rng, cfg, s.resamples,
               [&](const Trajectory& t) { return chebyshev(final_center(t), finish) > kExclusionRadius; }, "distractor exclusion");
    s.distractors.push_back(std::move(traj));
  }
  render_into(s);
  return s;
}

VideoSample compose_negative(std::uint64_t sample_seed, const GenConfig& cfg) {
  validate(cfg);
  if (cfg.distractors < 1) throw ConfigError("negative impossible without distractors");
  VideoSample s;
  s.label = Label::negative;
  s.sample_seed = sample_seed;
  s.layout = cfg.layout;
  s.speed = cfg.speed;

  Rng sample_rng(mix_seed({sample_seed, kSampleStream}));
  s.finisher_index = 1 + static_cast<int>(sample_rng.below(static_cast<std::uint64_t>(cfg.distractors)));

  Rng target_rng = dot_stream(sample_seed, 0);
  s.target = generate_trajectory(target_rng, cfg);
  s.start = marker_at(s.target.positions.front(), MarkerKind::start);
  const Vec2 target_end = final_center(s.target);

  // The finisher is redrawn until the target ends well clear of its end point.
  Rng finisher_rng = dot_stream(sample_seed, s.finisher_index);
  Trajectory finisher = generate_trajectory(finisher_rng, cfg);
  draw_until(finisher, finisher_rng, cfg, s.resamples,
             [&](const Trajectory& t) {
               const Marker m = marker_at(t.positions.back(), MarkerKind::finish);
               return chebyshev(target_end, m.center()) >= kNegativeSeparation;
             },
             "target separation");
  s.finish = marker_at(finisher.positions.back(), MarkerKind::finish);
  const Vec2 finish = s.finish.center();

  s.distractors.resize(static_cast<std::size_t>(cfg.distractors));
  for (int d = 1; d <= cfg.distractors; ++d) {
    if (d == s.finisher_index) {
      s.distractors[static_cast<std::size_t>(d) - 1] = std::move(finisher);
      continue;
    }
    Rng rng = dot_stream(sample_seed, d);
    Trajectory traj = generate_trajectory(rng, cfg);
    draw_until(traj, rng, cfg, s.resamples,
               [&](const Trajectory& t) { return chebyshev(final_center(t), finish) > kExclusionRadius; }, "distractor exclusion");
    s.distractors[static_cast<std::size_t>(d) - 1] = std::move(traj);
  }
  render_into(s);
  return s;
}

VideoSample generate_sample(const GenConfig& cfg, Fold fold, std::uint64_t index) {
  const std::uint64_t seed = sample_seed_for(cfg.master_seed, fold, index);
  return label_for_index(index) == Label::positive ? compose_positive(seed, cfg) : compose_negative(seed, cfg);
}

Frame render_frame(std::span<const Vec2> dot_positions, const Marker& start, const Marker& finish,
                   Layout layout) {
  if (layout == Layout::flow) throw ConfigError("render_frame: flow layout is not renderable");
  Frame f{};
  fill_marker(f, start, 0);
  fill_marker(f, finish, 2);
  for (const Vec2& p : dot_positions) {
    const int x0 = static_cast<int>(std::floor(p.x));
    const int y0 = static_cast<int>(std::floor(p.y));
    if (layout == Layout::engineered) {
      fill_square(f, x0, y0, kDotSize, 1);
    } else {
      for (int c = 0; c < kChannels; ++c) fill_square(f, x0, y0, kDotSize, c);
    }
  }
  return f;
}

int crossing_stats(const VideoSample& sample) {
  int crossings = 0;
  for (std::size_t t = 0; t < sample.target.positions.size(); ++t) {
    const Vec2 a = dot_center(sample.target.positions[t]);
    for (const auto& d : sample.distractors) {
      const Vec2 b = dot_center(d.positions[t]);
      // Two 2x2 squares share a pixel iff their anchors differ by at most 1 on both axes.
      if (chebyshev(a, b) <= kDotSize - 1) {
        ++crossings;
        break;
      }
    }
  }
  return crossings;
}

std::vector<std::string> check_sample(const VideoSample& s, const GenConfig& cfg) {
  std::vector<std::string> problems;
  if (static_cast<int>(s.distractors.size()) != cfg.distractors)
    problems.push_back("distractor count " + std::to_string(s.distractors.size()));
  if (s.finisher_index < 0 || s.finisher_index > static_cast<int>(s.distractors.size())) {
    problems.push_back("finisher index out of range");
    return problems;
  }
  if ((s.label == Label::positive) != (s.finisher_index == 0))
    problems.push_back("label disagrees with finisher index");

  const Vec2 finish = s.finish.center();
  const auto inside_canvas = [](const Marker& m) {
    return m.cx - kMarkerSize / 2 >= 0 && m.cy - kMarkerSize / 2 >= 0 && m.cx + kMarkerSize / 2 <= kCanvasWidth &&
           m.cy + kMarkerSize / 2 <= kCanvasHeight;
  };
  if (!inside_canvas(s.start) || !inside_canvas(s.finish)) problems.push_back("marker outside canvas");
  if (chebyshev(dot_center(s.target.positions.front()), s.start.center()) > kContainRadius)
    problems.push_back("target does not start inside the start marker");
  if (chebyshev(final_center(s.dot(s.finisher_index)), finish) > kContainRadius)
    problems.push_back("finisher does not end inside the finish marker");
  if (s.label == Label::negative && chebyshev(final_center(s.target), finish) < kNegativeSeparation)
    problems.push_back("negative target ends within the separation margin");
  for (int i = 0; i < s.dot_count(); ++i) {
    if (i == s.finisher_index) continue;
    if (chebyshev(final_center(s.dot(i)), finish) <= kExclusionRadius)
      problems.push_back("non-finisher dot " + std::to_string(i) + " ends near the finish marker");
  }
  for (int i = 0; i < s.dot_count(); ++i) {
    const Trajectory& t = s.dot(i);
    if (t.positions.size() != static_cast<std::size_t>(cfg.frames)) {
      problems.push_back("dot " + std::to_string(i) + " has wrong frame count");
      continue;
    }
    if (t.base_positions.empty()) continue;  // read back from disk: per-frame positions only
    for (const auto& v : validate_trajectory(t, cfg))
      problems.push_back("dot " + std::to_string(i) + " " + std::string(to_string(v.kind)) + " at " +
                         std::to_string(v.index) + ": " + v.detail);
  }
  return problems;
}

}  // namespace pathtracker
