#pragma once

#include <optional>
#include <vector>

#include "gdgs/field_image.hpp"
#include "gdgs/image_loss.hpp"
#include "gdgs/poisson.hpp"
#include "gdgs/projection.hpp"
#include "gdgs/rasterizer.hpp"
#include "gdgs/scene.hpp"

namespace gdgs {

enum class RenderMode {
  Gdgs,     // splat Laplacian amplitudes, then solve the Poisson equation
  Classic,  // splat colors directly
};

const char* to_string(RenderMode mode) noexcept;
RenderMode render_mode_from_string(const std::string& name);

struct RenderOptions {
  RenderConfig raster;
  SolverOptions solver;
};

/// Intermediate state of one forward pass.
struct RenderState {
  ProjectedScene projected;
  FieldImage laplacian;  // composited field (Gdgs only)
  FieldImage image;
  std::vector<double> dc;  // per-channel mean the image was pinned to (Gdgs only)
  SolveReport solve;
};

/// The composited signed Laplacian field of the scene, before any solve.
FieldImage render_laplacian(const Scene& scene, const Camera& cam, const RenderOptions& opts = {});

/// Gradient-domain render: splat, project rhs to zero mean, solve, and pin
/// the per-channel mean to dc (scene.dc_model unless overridden).
FieldImage render_gdgs(const Scene& scene, const Camera& cam, const RenderOptions& opts = {},
                       const std::optional<Color>& dc_override = std::nullopt,
                       RenderState* state = nullptr);

/// Classic color splatting.
FieldImage render_3dgs(const Scene& scene, const Camera& cam, const RenderOptions& opts = {},
                       RenderState* state = nullptr);

FieldImage render(const Scene& scene, const Camera& cam, RenderMode mode, const RenderOptions& opts = {},
                  const std::optional<Color>& dc_override = std::nullopt, RenderState* state = nullptr);

struct BackwardResult {
  double loss = 0.0;
  FieldImage image;
  /// One entry per scene particle; culled particles get zeros.
  std::vector<ParticleGrad> grads;
  /// Norm of dL/d(mean2d) in pixels, zero for culled particles.
  std::vector<double> screen_grad_norm;
  std::vector<char> visible;
};

/// Forward render, image loss against target and reverse-mode gradients with
/// respect to every particle parameter. Gdgs uses loss_gdgs and propagates
/// through the solver with a second (adjoint) solve; Classic uses loss_3dgs
/// with cfg.lambda. Throws NumericalDegeneracy on non-finite gradients.
BackwardResult render_backward(const Scene& scene, const Camera& cam, const FieldImage& target,
                               RenderMode mode, const LossConfig& cfg, const RenderOptions& opts = {},
                               const std::optional<Color>& dc_override = std::nullopt);

/// Forward render and loss only, same conventions as render_backward.
double render_loss(const Scene& scene, const Camera& cam, const FieldImage& target, RenderMode mode,
                   const LossConfig& cfg, const RenderOptions& opts = {},
                   const std::optional<Color>& dc_override = std::nullopt);

}  // namespace gdgs
