#include <gtest/gtest.h>

#include "oracle.hpp"
#include "pathtracker/errors.hpp"
#include "pathtracker/scene.hpp"

using namespace pathtracker;

namespace {

GenConfig config(int frames, int distractors, int speed, Layout layout = Layout::mixed) {
  GenConfig cfg;
  cfg.frames = frames;
  cfg.distractors = distractors;
  cfg.speed = speed;
  cfg.layout = layout;
  cfg.master_seed = 2024;
  return cfg;
}

int count_channel(const Frame& f, int c) {
  int n = 0;
  for (int y = 0; y < kCanvasHeight; ++y)
    for (int x = 0; x < kCanvasWidth; ++x) n += f[pixel_offset(y, x, c)] > 0;
  return n;
}

const Marker kStart{3, 3, MarkerKind::start};
const Marker kFinish{28, 28, MarkerKind::finish};

}  // namespace

TEST(Compose, PositiveInvariantsHold) {
  const GenConfig cfg = config(32, 6, 1);
  for (std::uint64_t i = 0; i < 100; ++i) {
    const VideoSample s = compose_positive(mix_seed({i}), cfg);
    ASSERT_EQ(s.label, Label::positive);
    EXPECT_EQ(s.finisher_index, 0);
    EXPECT_EQ(oracle::recheck_labels(s), "") << "sample " << i;
    EXPECT_TRUE(check_sample(s, cfg).empty());
  }
}

TEST(Compose, NegativeInvariantsHold) {
  const GenConfig cfg = config(32, 6, 1);
  for (std::uint64_t i = 0; i < 100; ++i) {
    const VideoSample s = compose_negative(mix_seed({i}), cfg);
    ASSERT_EQ(s.label, Label::negative);
    EXPECT_GE(s.finisher_index, 1);
    EXPECT_EQ(oracle::recheck_labels(s), "") << "sample " << i;
    EXPECT_TRUE(check_sample(s, cfg).empty());
  }
}

TEST(Compose, NegativeNeedsADistractor) {
  EXPECT_THROW(compose_negative(1, config(32, 0, 1)), ConfigError);
}

TEST(Compose, TinyBudgetRaisesGenerationError) {
  GenConfig cfg = config(32, 26, 1);
  cfg.max_resample_attempts = 1;
  bool thrown = false;
  for (std::uint64_t i = 0; i < 20 && !thrown; ++i) {
    try {
      compose_negative(mix_seed({i}), cfg);
    } catch (const GenerationError&) {
      thrown = true;
    }
  }
  EXPECT_TRUE(thrown);
}

TEST(Compose, TargetStartsInStartMarker) {
  const GenConfig cfg = config(64, 15, 2);
  for (std::uint64_t i = 0; i < 50; ++i) {
    const VideoSample s = generate_sample(cfg, Fold::train, i);
    const Vec2 c = dot_center(s.target.positions.front());
    EXPECT_LE(oracle::cheb(c.x, c.y, s.start.cx, s.start.cy), kContainRadius);
  }
}

TEST(Generate, LabelsAlternateAndBalance) {
  const GenConfig cfg = config(32, 1, 1);
  int pos = 0;
  for (std::uint64_t i = 0; i < 200; ++i) {
    const VideoSample s = generate_sample(cfg, Fold::test, i);
    EXPECT_EQ(s.label, i % 2 == 0 ? Label::positive : Label::negative);
    pos += s.label == Label::positive;
  }
  EXPECT_EQ(pos, 100);
}

TEST(Generate, Deterministic) {
  const GenConfig cfg = config(32, 6, 2);
  const VideoSample a = generate_sample(cfg, Fold::train, 17);
  const VideoSample b = generate_sample(cfg, Fold::train, 17);
  EXPECT_EQ(a.video, b.video);
  EXPECT_EQ(a.sample_seed, b.sample_seed);
  EXPECT_NE(sample_seed_for(cfg.master_seed, Fold::train, 17), sample_seed_for(cfg.master_seed, Fold::test, 17));
}

TEST(Generate, PixelsArePureLayout) {
  const GenConfig cfg = config(32, 6, 1, Layout::engineered);
  const VideoSample s = generate_sample(cfg, Fold::train, 3);
  for (int t = 0; t < s.frames(); ++t) {
    for (std::uint8_t v : s.video.frame(t)) EXPECT_TRUE(v == 0 || v == kOn);
  }
}

TEST(Render, EngineeredEmptyDotsLeaveDotChannelBlank) {
  const Frame f = render_frame({}, kStart, kFinish, Layout::engineered);
  EXPECT_EQ(count_channel(f, 1), 0);
  EXPECT_EQ(count_channel(f, 0), 16);
  EXPECT_EQ(count_channel(f, 2), 16);
}

TEST(Render, CoincidentDotsShareOneSquare) {
  const std::vector<Vec2> dots{{10.3, 12.7}, {10.9, 12.1}};
  const Frame f = render_frame(dots, kStart, kFinish, Layout::engineered);
  EXPECT_EQ(count_channel(f, 1), 4);
  EXPECT_EQ(f[pixel_offset(12, 10, 1)], kOn);
  EXPECT_EQ(f[pixel_offset(13, 11, 1)], kOn);
}

TEST(Render, MixedDotIsWhite) {
  const std::vector<Vec2> dots{{15.5, 15.5}};
  const Frame f = render_frame(dots, kStart, kFinish, Layout::mixed);
  EXPECT_EQ(count_channel(f, 1), 4);
  EXPECT_EQ(count_channel(f, 0), 4 + 16);
  EXPECT_EQ(count_channel(f, 2), 4 + 16);
  for (int c = 0; c < kChannels; ++c) EXPECT_EQ(f[pixel_offset(15, 15, c)], kOn);
}

TEST(Render, MarkerCoversFourByFour) {
  const Frame f = render_frame({}, kStart, kFinish, Layout::mixed);
  for (int y = 1; y <= 4; ++y)
    for (int x = 1; x <= 4; ++x) EXPECT_EQ(f[pixel_offset(y, x, 0)], kOn);
  EXPECT_EQ(f[pixel_offset(0, 1, 0)], 0);
  EXPECT_EQ(f[pixel_offset(5, 5, 0)], 0);
}

TEST(Render, FlowLayoutRejected) {
  EXPECT_THROW(render_frame({}, kStart, kFinish, Layout::flow), ConfigError);
}

TEST(Markers, ClampedInsideCanvas) {
  const Marker m = marker_at({30.9, 0.1}, MarkerKind::finish);
  EXPECT_EQ(m.cx, 30);
  EXPECT_EQ(m.cy, 2);
  const Marker n = marker_at({12.2, 7.8}, MarkerKind::start);
  EXPECT_EQ(n.cx, 13);
  EXPECT_EQ(n.cy, 8);
}

TEST(Crossings, FarApartIsZeroIdenticalIsEveryFrame) {
  const GenConfig cfg = config(32, 1, 1);
  VideoSample s = generate_sample(cfg, Fold::train, 0);
  s.distractors[0] = s.target;
  EXPECT_EQ(crossing_stats(s), 32);
  for (auto& p : s.distractors[0].positions) p = Vec2{p.x > 15 ? p.x - 15 : p.x + 15, p.y > 15 ? p.y - 15 : p.y + 15};
  EXPECT_EQ(crossing_stats(s), 0);
}

TEST(Crossings, LongCrowdedExceedsShortSparse) {
  double sparse = 0.0, crowded = 0.0;
  for (std::uint64_t i = 0; i < 40; ++i) {
    sparse += crossing_stats(generate_sample(config(32, 1, 1), Fold::train, i));
    crowded += crossing_stats(generate_sample(config(64, 26, 1), Fold::train, i));
  }
  EXPECT_GT(crowded, sparse);
}

TEST(CheckSample, FlagsMovedFinisher) {
  const GenConfig cfg = config(32, 1, 1);
  VideoSample s = generate_sample(cfg, Fold::train, 0);
  ASSERT_EQ(s.label, Label::positive);
  s.target.positions.back().x = s.finish.cx > 16 ? 2.0 : 28.0;
  s.target.base_positions.clear();
  EXPECT_FALSE(check_sample(s, cfg).empty());
  EXPECT_NE(oracle::recheck_labels(s), "");
}

TEST(Labels, ParseRoundTrip) {
  EXPECT_EQ(parse_label("positive"), Label::positive);
  EXPECT_EQ(parse_label(to_string(Label::negative)), Label::negative);
  try {
    parse_label("maybe");
    FAIL();
  } catch (const DataError& e) {
    EXPECT_EQ(e.kind(), DataErrorKind::unknown_label);
  }
}
