#include "pathtracker/flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pathtracker/errors.hpp"

namespace pathtracker {
namespace {

constexpr double kPresmoothSigma = 0.8;
constexpr double kGradIsZero = 1e-10;
/// Coarsest pyramid level kept, in pixels per side.
constexpr int kMinLevelSize = 8;

double sample_bilinear(const GrayImage& img, double x, double y) {
  x = std::clamp(x, 0.0, static_cast<double>(img.width - 1));
  y = std::clamp(y, 0.0, static_cast<double>(img.height - 1));
  const int x0 = static_cast<int>(std::floor(x));
  const int y0 = static_cast<int>(std::floor(y));
  const int x1 = std::min(x0 + 1, img.width - 1);
  const int y1 = std::min(y0 + 1, img.height - 1);
  const double fx = x - x0;
  const double fy = y - y0;
  const double top = (1.0 - fx) * img.at(x0, y0) + fx * img.at(x1, y0);
  const double bottom = (1.0 - fx) * img.at(x0, y1) + fx * img.at(x1, y1);
  return (1.0 - fy) * top + fy * bottom;
}

int reflect_index(int i, int n) {
  while (i < 0 || i >= n) i = i < 0 ? -i - 1 : 2 * n - i - 1;
  return i;
}

GrayImage gaussian_blur(const GrayImage& img, double sigma) {
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  for (int k = -radius; k <= radius; ++k) {
    const double w = std::exp(-0.5 * k * k / (sigma * sigma));
    kernel[static_cast<std::size_t>(k + radius)] = w;
    sum += w;
  }
  for (double& w : kernel) w /= sum;

  GrayImage tmp(img.width, img.height);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k)
        acc += kernel[static_cast<std::size_t>(k + radius)] * img.at(reflect_index(x + k, img.width), y);
      tmp.at(x, y) = acc;
    }
  GrayImage out(img.width, img.height);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k)
        acc += kernel[static_cast<std::size_t>(k + radius)] * tmp.at(x, reflect_index(y + k, img.height));
      out.at(x, y) = acc;
    }
  return out;
}

int level_size(int n, double scale) { return static_cast<int>(n * scale + 0.5); }

GrayImage zoom_out(const GrayImage& img, double scale) {
  const GrayImage smooth = gaussian_blur(img, 0.6 * std::sqrt(1.0 / (scale * scale) - 1.0));
  GrayImage out(level_size(img.width, scale), level_size(img.height, scale));
  for (int y = 0; y < out.height; ++y)
    for (int x = 0; x < out.width; ++x) out.at(x, y) = sample_bilinear(smooth, x / scale, y / scale);
  return out;
}

std::vector<double> zoom_in(const std::vector<double>& field, int w, int h, int nw, int nh) {
  GrayImage src(w, h);
  src.pixels = field;
  const double fx = static_cast<double>(w) / nw;
  const double fy = static_cast<double>(h) / nh;
  std::vector<double> out(static_cast<std::size_t>(nw) * nh);
  for (int y = 0; y < nh; ++y)
    for (int x = 0; x < nw; ++x) out[static_cast<std::size_t>(y) * nw + x] = sample_bilinear(src, x * fx, y * fy);
  return out;
}

void centered_gradient(const GrayImage& img, GrayImage& gx, GrayImage& gy) {
  gx = GrayImage(img.width, img.height);
  gy = GrayImage(img.width, img.height);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      const int xl = std::max(x - 1, 0), xr = std::min(x + 1, img.width - 1);
      const int yu = std::max(y - 1, 0), yd = std::min(y + 1, img.height - 1);
      gx.at(x, y) = (img.at(xr, y) - img.at(xl, y)) / std::max(1, xr - xl);
      gy.at(x, y) = (img.at(x, yd) - img.at(x, yu)) / std::max(1, yd - yu);
    }
}

// Forward differences, zero on the last column/row.
void forward_gradient(const std::vector<double>& f, int w, int h, std::vector<double>& fx, std::vector<double>& fy) {
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      fx[i] = x + 1 < w ? f[i + 1] - f[i] : 0.0;
      fy[i] = y + 1 < h ? f[i + static_cast<std::size_t>(w)] - f[i] : 0.0;
    }
}

// Negative adjoint of forward_gradient.
void divergence(const std::vector<double>& px, const std::vector<double>& py, int w, int h, std::vector<double>& div) {
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      double dx, dy;
      if (x == 0) dx = px[i];
      else if (x == w - 1) dx = -px[i - 1];
      else dx = px[i] - px[i - 1];
      if (y == 0) dy = py[i];
      else if (y == h - 1) dy = -py[i - static_cast<std::size_t>(w)];
      else dy = py[i] - py[i - static_cast<std::size_t>(w)];
      div[i] = dx + dy;
    }
}

double total_variation(const std::vector<double>& f, int w, int h) {
  std::vector<double> fx(f.size()), fy(f.size());
  forward_gradient(f, w, h, fx, fy);
  double tv = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) tv += std::hypot(fx[i], fy[i]);
  return tv;
}

// Pixels within `radius` (Chebyshev) of a pixel brighter than the darkest
// value in either frame. Empty when the constraint is disabled.
std::vector<std::uint8_t> support_mask(const GrayImage& a, const GrayImage& b, int radius) {
  if (radius < 0) return {};
  const int w = a.width, h = a.height;
  std::vector<std::uint8_t> mask(a.size(), 0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      if (a.pixels[i] <= 0.0 && b.pixels[i] <= 0.0) continue;
      for (int yy = std::max(0, y - radius); yy <= std::min(h - 1, y + radius); ++yy)
        for (int xx = std::max(0, x - radius); xx <= std::min(w - 1, x + radius); ++xx)
          mask[static_cast<std::size_t>(yy) * w + xx] = 1;
    }
  return mask;
}

void project(FlowField& flow, const std::vector<std::uint8_t>& mask) {
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (!mask[i]) flow.u[i] = flow.v[i] = 0.0;
}

// Dual TV-L1 at one pyramid level, refining `flow` in place. When `energies`
// is non-null the level is the finest one: the flow is kept on `mask`, the
// energy of the incoming flow and of every accepted warp is appended, and a
// warp that raises the energy is rolled back and ends the level.
void solve_level(const GrayImage& i0, const GrayImage& i1, FlowField& flow, const TvL1Params& p,
                 std::vector<double>* energies, const std::vector<std::uint8_t>& mask) {
  const int w = i0.width, h = i0.height;
  const std::size_t n = i0.size();
  const double l_t = p.lambda * p.theta;
  const double taut = p.tau / p.theta;

  GrayImage i1x, i1y;
  centered_gradient(i1, i1x, i1y);

  std::vector<double> p11(n, 0.0), p12(n, 0.0), p21(n, 0.0), p22(n, 0.0);
  std::vector<double> v1(n), v2(n), div1(n), div2(n), u1x(n), u1y(n), u2x(n), u2y(n);
  std::vector<double> grad(n), rho_c(n);
  project(flow, mask);
  if (energies != nullptr) energies->push_back(tvl1_energy(i0, i1, flow, p.lambda));

  for (int warp = 0; warp < p.warps; ++warp) {
    const FlowField before = flow;
    const GrayImage i1w = warp_image(i1, flow);
    const GrayImage i1wx = warp_image(i1x, flow);
    const GrayImage i1wy = warp_image(i1y, flow);
    for (std::size_t i = 0; i < n; ++i) {
      grad[i] = i1wx.pixels[i] * i1wx.pixels[i] + i1wy.pixels[i] * i1wy.pixels[i];
      rho_c[i] = i1w.pixels[i] - i1wx.pixels[i] * flow.u[i] - i1wy.pixels[i] * flow.v[i] - i0.pixels[i];
    }

    double error = std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < p.inner_iters && error > p.stop_epsilon * p.stop_epsilon; ++iter) {
      // Pointwise thresholding of the linearized data term.
      for (std::size_t i = 0; i < n; ++i) {
        const double gx = i1wx.pixels[i], gy = i1wy.pixels[i];
        const double rho = rho_c[i] + gx * flow.u[i] + gy * flow.v[i];
        double d1 = 0.0, d2 = 0.0;
        if (rho < -l_t * grad[i]) {
          d1 = l_t * gx;
          d2 = l_t * gy;
        } else if (rho > l_t * grad[i]) {
          d1 = -l_t * gx;
          d2 = -l_t * gy;
        } else if (grad[i] >= kGradIsZero) {
          const double fi = -rho / grad[i];
          d1 = fi * gx;
          d2 = fi * gy;
        }
        v1[i] = flow.u[i] + d1;
        v2[i] = flow.v[i] + d2;
      }

      divergence(p11, p12, w, h, div1);
      divergence(p21, p22, w, h, div2);
      error = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double u_old = flow.u[i], v_old = flow.v[i];
        const bool free = mask.empty() || mask[i];
        flow.u[i] = free ? v1[i] + p.theta * div1[i] : 0.0;
        flow.v[i] = free ? v2[i] + p.theta * div2[i] : 0.0;
        error += (flow.u[i] - u_old) * (flow.u[i] - u_old) + (flow.v[i] - v_old) * (flow.v[i] - v_old);
      }
      error /= static_cast<double>(n);

      // Projected dual ascent on the ROF problem for each component.
      forward_gradient(flow.u, w, h, u1x, u1y);
      forward_gradient(flow.v, w, h, u2x, u2y);
      for (std::size_t i = 0; i < n; ++i) {
        const double ng1 = 1.0 + taut * std::hypot(u1x[i], u1y[i]);
        const double ng2 = 1.0 + taut * std::hypot(u2x[i], u2y[i]);
        p11[i] = (p11[i] + taut * u1x[i]) / ng1;
        p12[i] = (p12[i] + taut * u1y[i]) / ng1;
        p21[i] = (p21[i] + taut * u2x[i]) / ng2;
        p22[i] = (p22[i] + taut * u2y[i]) / ng2;
      }
    }
    if (energies != nullptr) {
      const double e = tvl1_energy(i0, i1, flow, p.lambda);
      if (e > energies->back()) {
        flow = before;
        break;
      }
      energies->push_back(e);
    }
  }
}

void check_same_dims(const GrayImage& a, const GrayImage& b, const char* what) {
  if (a.width != b.width || a.height != b.height || a.size() != static_cast<std::size_t>(a.width) * a.height ||
      b.size() != static_cast<std::size_t>(b.width) * b.height)
    throw DataError(DataErrorKind::dimension_mismatch, what);
}

}  // namespace

void TvL1Params::validate() const {
  if (!(lambda > 0 && theta > 0 && tau > 0 && warps > 0 && inner_iters > 0 && pyramid_levels > 0 &&
        stop_epsilon > 0))
    throw ConfigError("TV-L1 parameters must be positive");
  if (tau > 0.25) throw ConfigError("TV-L1 tau must not exceed 1/4 for a stable dual iteration");
  if (!(pyramid_scale > 0.0 && pyramid_scale < 1.0)) throw ConfigError("TV-L1 pyramid_scale must lie in (0, 1)");
}

GrayImage warp_image(const GrayImage& img, const FlowField& flow) {
  if (img.width != flow.width || img.height != flow.height)
    throw DataError(DataErrorKind::dimension_mismatch, "warp_image: flow and image sizes differ");
  GrayImage out(img.width, img.height);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * img.width + x;
      out.pixels[i] = sample_bilinear(img, x + flow.u[i], y + flow.v[i]);
    }
  return out;
}

double tvl1_energy(const GrayImage& prev, const GrayImage& next, const FlowField& flow, double lambda) {
  check_same_dims(prev, next, "tvl1_energy: frame sizes differ");
  const GrayImage warped = warp_image(next, flow);
  double data = 0.0;
  for (std::size_t i = 0; i < prev.size(); ++i) data += std::abs(warped.pixels[i] - prev.pixels[i]);
  const double tv = total_variation(flow.u, flow.width, flow.height) + total_variation(flow.v, flow.width, flow.height);
  return (tv + lambda * data) / static_cast<double>(prev.size());
}

FlowResult tv_l1_detailed(const GrayImage& prev, const GrayImage& next, const TvL1Params& params) {
  params.validate();
  check_same_dims(prev, next, "tv_l1: frame sizes differ");
  if (prev.width < 1 || prev.height < 1) throw DataError(DataErrorKind::dimension_mismatch, "tv_l1: empty frame");

  // Joint min-max normalization onto [0, kFlowIntensityScale].
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (double x : prev.pixels) lo = std::min(lo, x), hi = std::max(hi, x);
  for (double x : next.pixels) lo = std::min(lo, x), hi = std::max(hi, x);
  const double range = hi - lo;
  std::vector<GrayImage> i0s{prev}, i1s{next};
  for (auto* img : {&i0s[0], &i1s[0]})
    for (double& x : img->pixels) x = range > 0.0 ? kFlowIntensityScale * (x - lo) / range : 0.0;
  const std::vector<std::uint8_t> mask = support_mask(i0s[0], i1s[0], params.support_radius);
  i0s[0] = gaussian_blur(i0s[0], kPresmoothSigma);
  i1s[0] = gaussian_blur(i1s[0], kPresmoothSigma);

  for (int s = 1; s < params.pyramid_levels; ++s) {
    const GrayImage& last = i0s.back();
    if (level_size(last.width, params.pyramid_scale) < kMinLevelSize ||
        level_size(last.height, params.pyramid_scale) < kMinLevelSize)
      break;
    i0s.push_back(zoom_out(i0s.back(), params.pyramid_scale));
    i1s.push_back(zoom_out(i1s.back(), params.pyramid_scale));
  }

  FlowResult result;
  const int levels = static_cast<int>(i0s.size());
  FlowField flow(i0s.back().width, i0s.back().height);
  for (int s = levels - 1; s >= 0; --s) {
    const auto idx = static_cast<std::size_t>(s);
    static const std::vector<std::uint8_t> kUnconstrained;
    solve_level(i0s[idx], i1s[idx], flow, params, s == 0 ? &result.finest_energies : nullptr,
                s == 0 ? mask : kUnconstrained);
    if (s == 0) break;
    const GrayImage& finer = i0s[idx - 1];
    FlowField up(finer.width, finer.height);
    up.u = zoom_in(flow.u, flow.width, flow.height, finer.width, finer.height);
    up.v = zoom_in(flow.v, flow.width, flow.height, finer.width, finer.height);
    for (double& x : up.u) x /= params.pyramid_scale;
    for (double& x : up.v) x /= params.pyramid_scale;
    flow = std::move(up);
  }
  result.flow = std::move(flow);
  return result;
}

FlowField tv_l1(const GrayImage& prev, const GrayImage& next, const TvL1Params& params) {
  return tv_l1_detailed(prev, next, params).flow;
}

std::uint8_t quantize_flow(double f) {
  const double clamped = std::clamp(f, -kFlowClamp, kFlowClamp);
  return static_cast<std::uint8_t>(std::lround((clamped + kFlowClamp) * 255.0 / (2.0 * kFlowClamp)));
}

double dequantize_flow(std::uint8_t q) { return q * (2.0 * kFlowClamp) / 255.0 - kFlowClamp; }

int dot_channel(Layout layout) { return layout == Layout::flow ? 2 : 1; }

GrayImage channel_image(std::span<const std::uint8_t> frame, int channel) {
  GrayImage img(kCanvasWidth, kCanvasHeight);
  for (int y = 0; y < kCanvasHeight; ++y)
    for (int x = 0; x < kCanvasWidth; ++x) img.at(x, y) = frame[pixel_offset(y, x, channel)];
  return img;
}

VideoSample encode_flow_video(const VideoSample& sample, const TvL1Params& params) {
  if (sample.layout == Layout::flow) throw ConfigError("encode_flow_video: sample is already flow-encoded");
  const int frames = sample.frames();
  if (frames < 2) throw ConfigError("encode_flow_video: need at least two frames");

  VideoSample out = sample;
  out.layout = Layout::flow;
  out.video = Video(frames);
  const int src_channel = dot_channel(sample.layout);

  GrayImage prev = channel_image(sample.video.frame(0), src_channel);
  for (int t = 1; t < frames; ++t) {
    GrayImage next = channel_image(sample.video.frame(t), src_channel);
    const FlowField f = tv_l1(prev, next, params);
    auto dst = out.video.frame(t);
    for (int y = 0; y < kCanvasHeight; ++y)
      for (int x = 0; x < kCanvasWidth; ++x) {
        const std::size_t i = static_cast<std::size_t>(y) * kCanvasWidth + x;
        dst[pixel_offset(y, x, 0)] = quantize_flow(f.u[i]);
        dst[pixel_offset(y, x, 1)] = quantize_flow(f.v[i]);
      }
    prev = std::move(next);
  }
  auto first = out.video.frame(0);
  const auto second = out.video.frame(1);
  for (int y = 0; y < kCanvasHeight; ++y)
    for (int x = 0; x < kCanvasWidth; ++x)
      for (int c = 0; c < 2; ++c) first[pixel_offset(y, x, c)] = second[pixel_offset(y, x, c)];
  for (int t = 0; t < frames; ++t) {
    const auto src = sample.video.frame(t);
    auto dst = out.video.frame(t);
    for (int y = 0; y < kCanvasHeight; ++y)
      for (int x = 0; x < kCanvasWidth; ++x) dst[pixel_offset(y, x, 2)] = src[pixel_offset(y, x, src_channel)];
  }
  return out;
}

}  // namespace pathtracker
