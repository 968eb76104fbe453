#pragma once

#include <optional>
#include <vector>

#include "gdgs/scene.hpp"

namespace gdgs {

struct ProjectionConfig {
  /// Isotropic dilation added to every screen-space covariance, in px^2.
  double low_pass = 0.3;
  /// Particles at or closer than this camera-space depth are culled.
  double z_near = 0.01;
  /// Footprint radius in standard deviations. Evaluation is restricted to
  /// the ellipse d^T Sigma2D^-1 d <= truncation_sigma^2.
  double truncation_sigma = 3.0;
};

struct SplattedGaussian2D {
  Vec2 mean2d = Vec2::Zero();
  Mat2 cov2d = Mat2::Identity();
  double depth = 1.0;
  Color amplitude = Color::Zero();
  double opacity = 0.0;
  /// Index of the source particle; breaks depth ties.
  int index = 0;
  /// Half-width of the axis-aligned footprint box, in pixels.
  double radius = 0.0;
};

/// Intermediate values of a projection kept for the backward pass.
struct ProjectionCache {
  Vec3 cam_center = Vec3::Zero();
  Mat23 jacobian = Mat23::Zero();
  Mat3 world_cov = Mat3::Identity();
};

/// Pinhole projection with the EWA local affine Jacobian. Returns nullopt
/// when the particle is behind z_near or its footprint misses the image.
std::optional<SplattedGaussian2D> project(const GaussianParticle& p, int index, const Camera& cam,
                                          const ProjectionConfig& cfg,
                                          ProjectionCache* cache = nullptr);

struct ProjectedScene {
  std::vector<SplattedGaussian2D> splats;  // ascending depth, ties by index
  std::vector<ProjectionCache> caches;     // parallel to splats
};

ProjectedScene project_scene(const Scene& scene, const Camera& cam, const ProjectionConfig& cfg);

/// Strict weak ordering used for compositing: depth, then particle index.
bool composite_order(const SplattedGaussian2D& a, const SplattedGaussian2D& b) noexcept;

/// Gradient of a scalar loss with respect to one screen-space splat. The
/// covariance gradient is stored for the three free entries (a, b, c) of
/// [[a, b], [b, c]].
struct SplatGrad {
  Vec2 mean2d = Vec2::Zero();
  Vec3 cov2d = Vec3::Zero();
  Color amplitude = Color::Zero();
  double opacity = 0.0;
};

/// Gradient with respect to every particle parameter, in flattening order.
struct ParticleGrad {
  Vec3 center = Vec3::Zero();
  Vec4 rotation = Vec4::Zero();
  Vec3 log_scale = Vec3::Zero();
  Color amplitude = Color::Zero();
  double opacity_logit = 0.0;

  ParticleGrad& operator+=(const ParticleGrad& o);
  bool all_finite() const;
};

/// Chains a splat gradient back through opacity sigmoid, the projection
/// Jacobian, the camera rotation and Sigma = R S S^T R^T.
ParticleGrad project_backward(const GaussianParticle& p, const Camera& cam,
                              const ProjectionCache& cache, const SplatGrad& grad);

}  // namespace gdgs
