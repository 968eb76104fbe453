#pragma once

#include <span>
#include <vector>

#include "gdgs/field_image.hpp"
#include "gdgs/projection.hpp"

namespace gdgs {

struct RenderConfig {
  ProjectionConfig projection;
  /// Front-to-back accumulation stops once transmittance drops below this.
  double transmittance_eps = 1e-4;
  int tile_size = 16;
};

/// Front-to-back alpha composition of pre-sorted splats:
///   out(u,v) = sum_k amp_k a_k prod_{j<k} (1 - a_j),  a_k = alpha_k G2D_k(u,v)
/// with G2D_k = exp(-d^T cov2d^-1 d) truncated to the configured footprint.
/// Throws ContractViolation when the input is not in composite_order.
FieldImage composite(std::span<const SplattedGaussian2D> splats, int width, int height,
                     const RenderConfig& cfg);

/// Color pass of the classic splatting renderer.
inline FieldImage composite_color(std::span<const SplattedGaussian2D> splats, int width,
                                  int height, const RenderConfig& cfg) {
  return composite(splats, width, height, cfg);
}

/// Signed Laplacian field of the gradient-domain renderer; the same
/// composition applied to Laplacian amplitudes.
inline FieldImage composite_laplacian(std::span<const SplattedGaussian2D> splats, int width,
                                      int height, const RenderConfig& cfg) {
  return composite(splats, width, height, cfg);
}

/// Reverse-mode pass of composite(): given dL/d(out), returns dL/d(splat) for
/// every input splat, in input order. Deterministic for any thread count.
std::vector<SplatGrad> composite_backward(std::span<const SplattedGaussian2D> splats, int width,
                                          int height, const RenderConfig& cfg,
                                          const FieldImage& grad_out);

struct ActivePixels {
  std::vector<int> pixels;  // linear index y * width + x, ascending
  double fraction = 0.0;
};

/// Pixels where |value| > eps in any channel.
ActivePixels active_pixel_set(const FieldImage& field, double eps);

}  // namespace gdgs
