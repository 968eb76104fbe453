#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "gdgs/renderer.hpp"
#include "gdgs/scene.hpp"

namespace gdgs {

struct GradcheckConfig {
  std::uint64_t seed = 7;
  int image_size = 32;
  int particles = 3;
  double step = 1e-4;
  double tolerance = 1e-3;
  /// Entries where both analytic and numeric magnitudes fall below this are skipped.
  double min_magnitude = 1e-6;
  /// (lambda, beta) pairs; each gets its own seeded scene.
  std::vector<std::pair<double, double>> loss_weights{{0.0, 0.0}, {0.0, 0.2}, {0.2, 0.0}, {0.2, 0.2}};
  RenderMode mode = RenderMode::Gdgs;
};

inline constexpr std::array<const char*, 5> kParamGroups = {"center", "rotation", "log_scale", "amplitude",
                                                            "opacity"};

struct GradcheckGroup {
  std::string name;
  double max_rel_error = 0.0;
  int checked = 0;
};

struct GradcheckReport {
  std::vector<GradcheckGroup> groups;  // in kParamGroups order
  bool passed = true;
};

/// Random scene of `particles` Gaussians in front of an identity camera.
/// Opacities stay moderate so transmittance never reaches the early-stop level.
struct GradcheckCase {
  Scene scene;
  Camera camera;
  FieldImage target;
  Color dc = Color::Zero();
};

GradcheckCase make_gradcheck_case(std::uint64_t seed, int image_size, int particles, RenderMode mode,
                                  const RenderOptions& opts);

/// Options the check renders with: 6 sigma truncation and the spectral
/// solver, which keep the loss smooth in every parameter.
RenderOptions gradcheck_render_options();

/// Compares render_backward against central differences of render_loss for
/// every parameter of every particle.
GradcheckReport run_gradcheck(const GradcheckConfig& cfg);

}  // namespace gdgs
