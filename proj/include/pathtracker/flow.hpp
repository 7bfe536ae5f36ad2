#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pathtracker/scene.hpp"

namespace pathtracker {

/// Single-channel real image, row-major.
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<double> pixels;

  GrayImage() = default;
  GrayImage(int w, int h, double fill = 0.0)
      : width(w), height(h), pixels(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill) {}

  double& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
  double at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
  std::size_t size() const { return pixels.size(); }
};

/// Dense displacement field: pixel (x, y) of the first frame moves to (x + u, y + v).
struct FlowField {
  int width = 0;
  int height = 0;
  std::vector<double> u;
  std::vector<double> v;

  FlowField() = default;
  FlowField(int w, int h)
      : width(w), height(h), u(static_cast<std::size_t>(w) * h, 0.0), v(static_cast<std::size_t>(w) * h, 0.0) {}

  std::size_t size() const { return u.size(); }
};

/// Parameters of the dual TV-L1 solver. Defaults follow the usual settings for
/// the Zach-Pock-Bischof scheme on 8-bit imagery.
struct TvL1Params {
  double lambda = 0.15;  ///< data-term weight
  double theta = 0.3;    ///< coupling between u and the auxiliary field
  double tau = 0.25;     ///< dual step; the Chambolle iteration needs tau <= 1/4
  int warps = 5;
  int inner_iters = 30;  ///< iteration cap per warp
  double pyramid_scale = 0.5;
  int pyramid_levels = 3;
  double stop_epsilon = 0.01;  ///< RMS change of u that ends a warp's iterations
  /// At the finest level the flow is held at zero on pixels farther than this
  /// (Chebyshev px) from every non-background pixel of either frame, where the
  /// data term carries no information. Negative disables the constraint.
  int support_radius = 2;

  /// Throws ConfigError unless every field is positive, tau <= 1/4 and the
  /// scale lies in (0, 1).
  void validate() const;
};

struct FlowResult {
  FlowField flow;
  /// Per-pixel TV-L1 energy at the finest level: entry 0 for the flow handed
  /// down from the coarser level, then one entry per accepted warp. A warp
  /// that would raise the energy is discarded and ends the refinement.
  std::vector<double> finest_energies;
};

/// Bilinear sampling of img at (x + u, y + v), coordinates clamped to the border.
GrayImage warp_image(const GrayImage& img, const FlowField& flow);

/// Coarse-to-fine dual TV-L1 optical flow from prev to next. Throws DataError
/// on dimension mismatch.
FlowField tv_l1(const GrayImage& prev, const GrayImage& next, const TvL1Params& params = {});
FlowResult tv_l1_detailed(const GrayImage& prev, const GrayImage& next, const TvL1Params& params = {});

/// Per-pixel TV-L1 energy of `flow` for the given pair (no presmoothing).
double tvl1_energy(const GrayImage& prev, const GrayImage& next, const FlowField& flow, double lambda);

/// Intensity scale the solver works in. The default lambda is tuned for 8-bit range.
inline constexpr double kFlowIntensityScale = 255.0;

/// Flow quantization range, px/frame, mapped affinely onto [0, 255].
inline constexpr double kFlowClamp = 20.0;
std::uint8_t quantize_flow(double f);
double dequantize_flow(std::uint8_t q);

/// Channel holding the dots for a layout.
int dot_channel(Layout layout);

/// One channel of a frame as a gray image with values 0..255.
GrayImage channel_image(std::span<const std::uint8_t> frame, int channel);

/// Replaces the frames of `sample` with the flow encoding: channel 0 quantized u,
/// channel 1 quantized v, channel 2 the raw dot channel. Frame t > 0 carries the
/// flow from t-1 to t; frame 0 reuses frame 1's flow. Metadata is kept.
/// Throws ConfigError for single-frame or already-encoded samples.
VideoSample encode_flow_video(const VideoSample& sample, const TvL1Params& params = {});

}  // namespace pathtracker
