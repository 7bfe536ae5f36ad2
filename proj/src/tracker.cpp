#include "pathtracker/tracker.hpp"

#include <algorithm>
#include <bitset>
#include <cmath>
#include <numbers>

#include "pathtracker/errors.hpp"

namespace pathtracker {
namespace {

using PixelMask = std::bitset<static_cast<std::size_t>(kCanvasWidth) * kCanvasHeight>;

// Dot centers are floor(anchor) + 1 with anchors in [0, kMaxCoordinate].
constexpr double kMinCenter = 1.0;
constexpr double kMaxCenter = kMaxCoordinate + 1.0;
// Upper bound on candidate tilings examined by fit_squares.
constexpr double kMaxTilings = 4096.0;

bool is_dot_pixel(std::span<const std::uint8_t> frame, Layout layout, int y, int x) {
  switch (layout) {
    case Layout::mixed:
      // White: markers only ever light channels 0 and 2.
      return frame[pixel_offset(y, x, 0)] > 0 && frame[pixel_offset(y, x, 1)] > 0 && frame[pixel_offset(y, x, 2)] > 0;
    case Layout::engineered: return frame[pixel_offset(y, x, 1)] > 0;
    case Layout::flow: return frame[pixel_offset(y, x, 2)] > 0;
  }
  return false;
}

double distance(Vec2 a, Vec2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

template <typename T>
std::size_t idx(T i) {
  return static_cast<std::size_t>(i);
}

void mirror(double& pos, double& vel) {
  if (pos < kMinCenter) {
    pos = 2.0 * kMinCenter - pos;
    vel = -vel;
  } else if (pos > kMaxCenter) {
    pos = 2.0 * kMaxCenter - pos;
    vel = -vel;
  }
}

double direction_change(const TrackState& t, Vec2 target) {
  const MotionPrediction m = predict_motion(t);
  const double dx = target.x - t.position.x, dy = target.y - t.position.y;
  if (std::hypot(m.velocity.x, m.velocity.y) < 1e-9 || std::hypot(dx, dy) < 1e-9)
    return distance(m.position, target);
  const double d = std::remainder(std::atan2(dy, dx) - std::atan2(m.velocity.y, m.velocity.x), 2.0 * std::numbers::pi);
  return std::abs(d);
}

PixelMask square_mask(int x0, int y0) {
  PixelMask m;
  for (int y = y0; y < y0 + kDotSize; ++y)
    for (int x = x0; x < x0 + kDotSize; ++x) m.set(idx(y * kCanvasWidth + x));
  return m;
}

}  // namespace

double Detection::box_distance(Vec2 p) const {
  const double dx = std::max({min_x - p.x, p.x - (max_x + 1.0), 0.0});
  const double dy = std::max({min_y - p.y, p.y - (max_y + 1.0), 0.0});
  return std::max(dx, dy);
}

const TrackState& TrackSet::target() const {
  for (const auto& t : tracks)
    if (t.is_target) return t;
  throw TrackingError("track set has no target track");
}

TrackerInput tracker_input(const VideoSample& sample) {
  TrackerInput in;
  in.video = &sample.video;
  in.layout = sample.layout;
  in.start = sample.start;
  in.finish = sample.finish;
  in.dot_count = sample.dot_count();
  in.speed = sample.speed;
  return in;
}

std::vector<Detection> detect_dots(std::span<const std::uint8_t> frame, Layout layout, int frame_index) {
  std::vector<int> label(idx(kCanvasHeight * kCanvasWidth), -1);
  std::vector<Detection> out;
  std::vector<int> stack;
  for (int y0 = 0; y0 < kCanvasHeight; ++y0)
    for (int x0 = 0; x0 < kCanvasWidth; ++x0) {
      const int seed = y0 * kCanvasWidth + x0;
      if (label[idx(seed)] >= 0 || !is_dot_pixel(frame, layout, y0, x0)) continue;
      const int id = static_cast<int>(out.size());
      Detection det;
      det.frame_index = frame_index;
      det.min_x = det.max_x = x0;
      det.min_y = det.max_y = y0;
      double sx = 0.0, sy = 0.0;
      label[idx(seed)] = id;
      stack.assign(1, seed);
      while (!stack.empty()) {
        const int i = stack.back();
        stack.pop_back();
        const int x = i % kCanvasWidth, y = i / kCanvasWidth;
        det.pixels.push_back(i);
        sx += x;
        sy += y;
        det.min_x = std::min(det.min_x, x), det.max_x = std::max(det.max_x, x);
        det.min_y = std::min(det.min_y, y), det.max_y = std::max(det.max_y, y);
        constexpr int dx[] = {1, -1, 0, 0};
        constexpr int dy[] = {0, 0, 1, -1};
        for (int k = 0; k < 4; ++k) {
          const int nx = x + dx[k], ny = y + dy[k];
          if (nx < 0 || ny < 0 || nx >= kCanvasWidth || ny >= kCanvasHeight) continue;
          const int j = ny * kCanvasWidth + nx;
          if (label[idx(j)] >= 0 || !is_dot_pixel(frame, layout, ny, nx)) continue;
          label[idx(j)] = id;
          stack.push_back(j);
        }
      }
      std::sort(det.pixels.begin(), det.pixels.end());
      det.pixel_count = static_cast<int>(det.pixels.size());
      det.centroid = {sx / det.pixel_count + 0.5, sy / det.pixel_count + 0.5};
      out.push_back(std::move(det));
    }
  return out;
}

MotionPrediction predict_motion(const TrackState& t) {
  MotionPrediction m{{t.position.x + t.velocity.x, t.position.y + t.velocity.y}, t.velocity};
  mirror(m.position.x, m.velocity.x);
  mirror(m.position.y, m.velocity.y);
  return m;
}

std::vector<Vec2> fit_squares(const Detection& blob, std::span<const Vec2> predictions) {
  const std::size_t k = predictions.size();
  if (k == 0 || blob.pixels.empty()) return {};
  PixelMask blob_mask;
  for (int i : blob.pixels) blob_mask.set(idx(i));

  struct Candidate {
    PixelMask mask;
    Vec2 center;
  };
  std::vector<Candidate> candidates;
  for (int y = blob.min_y; y < blob.max_y; ++y)
    for (int x = blob.min_x; x < blob.max_x; ++x) {
      const PixelMask m = square_mask(x, y);
      if ((m & blob_mask) == m) candidates.push_back({m, {x + 1.0, y + 1.0}});
    }
  if (candidates.empty() || std::pow(static_cast<double>(candidates.size()), static_cast<double>(k)) > kMaxTilings)
    return {};

  // Exhaustive search over one candidate per prediction; squares may coincide.
  std::vector<std::size_t> choice(k, 0), best;
  double best_cost = std::numeric_limits<double>::infinity();
  while (true) {
    PixelMask cover;
    double cost = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      cover |= candidates[choice[i]].mask;
      cost += distance(predictions[i], candidates[choice[i]].center);
    }
    if (cover == blob_mask && cost < best_cost) {
      best_cost = cost;
      best = choice;
    }
    std::size_t pos = 0;
    while (pos < k && ++choice[pos] == candidates.size()) choice[pos++] = 0;
    if (pos == k) break;
  }
  if (best.empty()) return {};
  std::vector<Vec2> out;
  for (std::size_t c : best) out.push_back(candidates[c].center);
  return out;
}

TrackSet init_tracks(std::span<const Detection> detections, const Marker& start, int dot_count) {
  if (detections.empty()) throw TrackingError("malformed sample: no dots in frame 0");
  const Vec2 s = start.center();
  const auto closer = [&](const Detection& a, const Detection& b) {
    const double da = a.box_distance(s), db = b.box_distance(s);
    if (da != db) return da < db;
    return distance(a.centroid, s) < distance(b.centroid, s);
  };
  std::size_t target_det = 0;
  for (std::size_t i = 1; i < detections.size(); ++i)
    if (closer(detections[i], detections[target_det])) target_det = i;
  if (detections[target_det].box_distance(s) > kStartSearchRadius)
    throw TrackingError("malformed sample: no detection within 3 px of the start marker");

  // Blobs larger than one dot get the extra tracks, biggest first.
  std::vector<std::size_t> owners(detections.size());
  for (std::size_t i = 0; i < detections.size(); ++i) owners[i] = i;
  std::vector<std::size_t> shared;
  for (std::size_t i = 0; i < detections.size(); ++i)
    if (detections[i].pixel_count > kDotSize * kDotSize) shared.push_back(i);
  if (shared.empty()) shared = owners;
  std::stable_sort(shared.begin(), shared.end(),
                   [&](std::size_t a, std::size_t b) { return detections[a].pixel_count > detections[b].pixel_count; });
  for (std::size_t k = 0; static_cast<int>(owners.size()) < dot_count; ++k) owners.push_back(shared[k % shared.size()]);

  std::vector<int> users(detections.size(), 0);
  for (std::size_t d : owners) ++users[d];
  TrackSet ts;
  for (std::size_t d : owners) {
    TrackState t;
    t.position = detections[d].centroid;
    t.merged = users[d] > 1;
    t.history.push_back(detections[d]);
    ts.tracks.push_back(std::move(t));
  }
  // The target is the first track on its blob. Inside a shared blob the start
  // marker pins the target's square; the other squares follow from the tiling.
  const auto target_it = std::find(owners.begin(), owners.end(), target_det);
  ts.tracks[idx(target_it - owners.begin())].is_target = true;
  for (std::size_t d = 0; d < detections.size(); ++d) {
    if (users[d] < 2) continue;
    std::vector<std::size_t> members;
    std::vector<Vec2> anchors;
    for (std::size_t i = 0; i < owners.size(); ++i)
      if (owners[i] == d) {
        members.push_back(i);
        anchors.push_back(ts.tracks[i].is_target ? s : detections[d].centroid);
      }
    const auto fit = fit_squares(detections[d], anchors);
    for (std::size_t m = 0; m < members.size(); ++m) {
      TrackState& t = ts.tracks[members[m]];
      if (!fit.empty()) t.position = fit[m];
      else if (t.is_target) t.position = s;
    }
  }
  ts.frame_cursor = 1;
  return ts;
}

TrackSet step_tracks(TrackSet ts, std::span<const Detection> detections, int speed) {
  const int frame = ts.frame_cursor;
  ++ts.frame_cursor;
  const std::size_t n = ts.tracks.size();
  const std::size_t m = detections.size();

  std::vector<MotionPrediction> pred;
  pred.reserve(n);
  for (const auto& t : ts.tracks) pred.push_back(predict_motion(t));

  if (m == 0) {
    ts.failed_frames.push_back(frame);
    for (std::size_t i = 0; i < n; ++i) {
      auto& t = ts.tracks[i];
      t.position = pred[i].position;
      t.velocity = pred[i].velocity;
      Detection ghost;
      ghost.centroid = t.position;
      ghost.frame_index = frame;
      t.history.push_back(std::move(ghost));
    }
    return ts;
  }

  const double gate = gate_radius(speed);
  CostMatrix cost(static_cast<int>(n), static_cast<int>(m));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      const double d = distance(pred[i].position, detections[j].centroid);
      cost(static_cast<int>(i), static_cast<int>(j)) = d <= gate ? d : kGateSentinel;
    }
  const Assignment a = hungarian_assign(cost);

  std::vector<std::size_t> det_of(n, m);
  for (std::size_t i = 0; i < n; ++i) {
    const int j = a.col_of_row[i];
    if (j >= 0 && cost(static_cast<int>(i), j) < kGateSentinel) det_of[i] = idx(j);
  }
  // Tracks left over share the nearest detection (a merge); with nothing in
  // the gate they fall back to the nearest detection overall.
  for (std::size_t i = 0; i < n; ++i) {
    if (det_of[i] < m) continue;
    std::size_t best = 0;
    for (std::size_t j = 1; j < m; ++j)
      if (distance(pred[i].position, detections[j].centroid) < distance(pred[i].position, detections[best].centroid))
        best = j;
    det_of[i] = best;
  }

  std::vector<int> users(m, 0);
  for (std::size_t j : det_of) ++users[j];

  // Split: tracks that left the same blob swap detections if that keeps their
  // headings straighter.
  std::vector<std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& t = ts.tracks[i];
    if (!t.merged || users[det_of[i]] > 1) continue;
    const Vec2 blob = t.history.back().centroid;
    auto it = std::find_if(groups.begin(), groups.end(), [&](const std::vector<std::size_t>& g) {
      return ts.tracks[g.front()].history.back().centroid == blob;
    });
    if (it == groups.end()) groups.push_back({i});
    else it->push_back(i);
  }
  for (const auto& g : groups) {
    if (g.size() < 2) continue;
    const int k = static_cast<int>(g.size());
    CostMatrix turn(k, k);
    for (int r = 0; r < k; ++r)
      for (int c = 0; c < k; ++c) turn(r, c) = direction_change(ts.tracks[g[idx(r)]], detections[det_of[g[idx(c)]]].centroid);
    const Assignment best = hungarian_assign(turn);
    std::vector<std::size_t> dets(g.size());
    for (std::size_t r = 0; r < g.size(); ++r) dets[r] = det_of[g[idx(best.col_of_row[r])]];
    for (std::size_t r = 0; r < g.size(); ++r) det_of[g[r]] = dets[r];
  }

  // Positions inside blobs that hold more than one dot come from a square tiling.
  std::vector<Vec2> position(n);
  std::vector<char> observed(n, 1);
  for (std::size_t j = 0; j < m; ++j) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < n; ++i)
      if (det_of[i] == j) members.push_back(i);
    if (members.empty()) continue;
    const Detection& det = detections[j];
    if (members.size() == 1 && det.pixel_count <= kDotSize * kDotSize) {
      position[members[0]] = det.centroid;
      continue;
    }
    std::vector<Vec2> anchors;
    for (std::size_t i : members) anchors.push_back(pred[i].position);
    std::vector<Vec2> fit = fit_squares(det, anchors);
    if (fit.empty() && members.size() == 1) {
      // One track on a blob of several dots: take the square nearest its prediction.
      Vec2 best = det.centroid;
      double best_d = std::numeric_limits<double>::infinity();
      for (int y = det.min_y; y < det.max_y; ++y)
        for (int x = det.min_x; x < det.max_x; ++x) {
          const Vec2 c{x + 1.0, y + 1.0};
          if (distance(c, anchors[0]) < best_d) best_d = distance(c, anchors[0]), best = c;
        }
      fit = {best};
    }
    for (std::size_t k = 0; k < members.size(); ++k) {
      const std::size_t i = members[k];
      if (fit.empty()) {
        // No consistent tiling: coast, staying on the shared blob.
        position[i] = {det.centroid.x + std::clamp(pred[i].position.x - det.centroid.x, -1.0, 1.0),
                       det.centroid.y + std::clamp(pred[i].position.y - det.centroid.y, -1.0, 1.0)};
        observed[i] = 0;
        continue;
      }
      position[i] = fit[k];
      // Fully overlapping squares say nothing about which dot went where.
      for (std::size_t o = 0; o < members.size(); ++o)
        if (o != k && fit[o] == fit[k]) observed[i] = 0;
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    auto& t = ts.tracks[i];
    t.merged = users[det_of[i]] > 1;
    if (observed[i]) {
      const Vec2 delta{position[i].x - t.position.x, position[i].y - t.position.y};
      t.velocity = {kVelocitySmoothing * delta.x + (1.0 - kVelocitySmoothing) * pred[i].velocity.x,
                    kVelocitySmoothing * delta.y + (1.0 - kVelocitySmoothing) * pred[i].velocity.y};
    } else {
      t.velocity = pred[i].velocity;
    }
    t.position = position[i];
    t.history.push_back(detections[det_of[i]]);
  }
  return ts;
}

TrackSet run_tracker(const TrackerInput& input) {
  if (input.video == nullptr || input.video->frames() < 1) throw TrackingError("malformed sample: no frames");
  const Video& video = *input.video;
  const auto first = detect_dots(video.frame(0), input.layout, 0);
  TrackSet ts = init_tracks(first, input.start, input.dot_count);
  for (int t = 1; t < video.frames(); ++t) {
    const auto dets = detect_dots(video.frame(t), input.layout, t);
    ts = step_tracks(std::move(ts), dets, input.speed);
  }
  return ts;
}

Prediction classify(const TrackerInput& input, std::uint64_t sample_index) {
  const TrackSet ts = run_tracker(input);
  const Vec2 end = ts.target().position;
  Prediction p;
  p.sample_index = sample_index;
  p.target_final = end;
  p.label = chebyshev(end, input.finish.center()) <= kContainRadius ? Label::positive : Label::negative;
  return p;
}

}  // namespace pathtracker
