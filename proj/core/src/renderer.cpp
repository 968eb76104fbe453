#include "gdgs/renderer.hpp"

#include <string>

#include "gdgs/error.hpp"

namespace gdgs {

const char* to_string(RenderMode mode) noexcept {
  switch (mode) {
    case RenderMode::Gdgs: return "gdgs";
    case RenderMode::Classic: return "3dgs";
  }
  return "unknown";
}

RenderMode render_mode_from_string(const std::string& name) {
  if (name == "gdgs") return RenderMode::Gdgs;
  if (name == "3dgs") return RenderMode::Classic;
  throw Error(ErrorKind::InvalidArgument, "unknown render mode '" + name + "' (expected gdgs or 3dgs)");
}

FieldImage render_laplacian(const Scene& scene, const Camera& cam, const RenderOptions& opts) {
  cam.validate();
  const ProjectedScene projected = project_scene(scene, cam, opts.raster.projection);
  return composite_laplacian(projected.splats, cam.width, cam.height, opts.raster);
}

FieldImage render_gdgs(const Scene& scene, const Camera& cam, const RenderOptions& opts,
                       const std::optional<Color>& dc_override, RenderState* state) {
  cam.validate();
  RenderState local;
  RenderState& st = state ? *state : local;
  st.projected = project_scene(scene, cam, opts.raster.projection);
  st.laplacian = composite_laplacian(st.projected.splats, cam.width, cam.height, opts.raster);
  const Color dc = dc_override.value_or(scene.dc_model);
  st.dc.assign(dc.data(), dc.data() + dc.size());
  PoissonProblem problem{st.laplacian, st.dc, Boundary::Neumann};
  st.image = solve_poisson(problem, opts.solver, &st.solve);
  return st.image;
}

FieldImage render_3dgs(const Scene& scene, const Camera& cam, const RenderOptions& opts, RenderState* state) {
  cam.validate();
  RenderState local;
  RenderState& st = state ? *state : local;
  st.projected = project_scene(scene, cam, opts.raster.projection);
  st.laplacian = FieldImage();
  st.dc.clear();
  st.image = composite_color(st.projected.splats, cam.width, cam.height, opts.raster);
  return st.image;
}

FieldImage render(const Scene& scene, const Camera& cam, RenderMode mode, const RenderOptions& opts,
                  const std::optional<Color>& dc_override, RenderState* state) {
  return mode == RenderMode::Gdgs ? render_gdgs(scene, cam, opts, dc_override, state)
                                  : render_3dgs(scene, cam, opts, state);
}

namespace {

double image_loss(const FieldImage& image, const FieldImage& target, RenderMode mode, const LossConfig& cfg,
                  FieldImage* grad) {
  if (mode == RenderMode::Gdgs) return loss_gdgs(image, target, cfg, grad);
  return loss_3dgs(image, target, cfg.lambda, cfg.ssim, grad);
}

void check_target(const Camera& cam, const FieldImage& target) {
  if (target.height() != cam.height || target.width() != cam.width || target.channels() != kColorChannels) {
    throw Error(ErrorKind::ShapeMismatch, "target image shape does not match the camera");
  }
}

}  // namespace

double render_loss(const Scene& scene, const Camera& cam, const FieldImage& target, RenderMode mode,
                   const LossConfig& cfg, const RenderOptions& opts, const std::optional<Color>& dc_override) {
  check_target(cam, target);
  const FieldImage image = render(scene, cam, mode, opts, dc_override);
  return image_loss(image, target, mode, cfg, nullptr);
}

BackwardResult render_backward(const Scene& scene, const Camera& cam, const FieldImage& target,
                               RenderMode mode, const LossConfig& cfg, const RenderOptions& opts,
                               const std::optional<Color>& dc_override) {
  check_target(cam, target);
  RenderState st;
  render(scene, cam, mode, opts, dc_override, &st);

  BackwardResult out;
  FieldImage grad_image;
  out.loss = image_loss(st.image, target, mode, cfg, &grad_image);
  out.image = std::move(st.image);

  FieldImage grad_field;
  if (mode == RenderMode::Gdgs) {
    // The pseudo-inverse of the Neumann Laplacian is symmetric and already
    // annihilates constants, so the adjoint is one more solve with dc = 0.
    PoissonProblem adjoint{grad_image, {}, Boundary::Neumann};
    grad_field = solve_poisson(adjoint, opts.solver);
  } else {
    grad_field = std::move(grad_image);
  }

  const auto& splats = st.projected.splats;
  const std::vector<SplatGrad> splat_grads = composite_backward(splats, cam.width, cam.height, opts.raster, grad_field);

  const std::size_t k = scene.particles.size();
  out.grads.assign(k, ParticleGrad{});
  out.screen_grad_norm.assign(k, 0.0);
  out.visible.assign(k, 0);
  for (std::size_t i = 0; i < splats.size(); ++i) {
    const int idx = splats[i].index;
    out.grads[idx] = project_backward(scene.particles[idx], cam, st.projected.caches[i], splat_grads[i]);
    out.screen_grad_norm[idx] = splat_grads[i].mean2d.norm();
    out.visible[idx] = 1;
    if (!out.grads[idx].all_finite()) {
      throw Error(ErrorKind::NumericalDegeneracy,
                  "non-finite gradient for particle " + std::to_string(idx) + " (" + to_string(mode) + " mode)");
    }
  }
  return out;
}

}  // namespace gdgs
