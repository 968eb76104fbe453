#pragma once

#include <cmath>
#include <vector>

#include "gdgs/types.hpp"

namespace gdgs {

inline double sigmoid(double x) noexcept { return 1.0 / (1.0 + std::exp(-x)); }
inline double logit(double p) noexcept { return std::log(p / (1.0 - p)); }

/// One anisotropic 3D Gaussian. The amplitude is a color for the classic
/// renderer and a signed Laplacian value for the gradient-domain renderer.
struct GaussianParticle {
  Vec3 center = Vec3::Zero();
  Vec4 rotation{1.0, 0.0, 0.0, 0.0};  // (w, x, y, z)
  Vec3 log_scale = Vec3::Zero();
  Color amplitude = Color::Zero();
  double opacity_logit = 0.0;

  double opacity() const noexcept { return sigmoid(opacity_logit); }
  Vec3 scale() const { return log_scale.array().exp(); }

  /// Number of scalar parameters when flattened (center, rotation, log_scale,
  /// amplitude, opacity_logit in that order).
  static constexpr int kParamCount = 14;
};

/// Finite, positive scales and a non-degenerate quaternion.
bool is_valid(const GaussianParticle& p) noexcept;

/// Rotation matrix of the normalized quaternion (w, x, y, z).
Mat3 rotation_matrix(const Vec4& q);

/// Sigma = R S S^T R^T with S = diag(exp(log_scale)). Throws InvalidParticle on
/// non-finite fields.
Mat3 covariance(const GaussianParticle& p);

/// exp(-(x - c)^T Sigma^-1 (x - c)). No 1/2 in the exponent. Throws
/// NumericalDegeneracy when Sigma is singular.
double eval_gaussian(const GaussianParticle& p, const Vec3& x);

struct Aabb {
  Vec3 min = Vec3::Constant(-1.0);
  Vec3 max = Vec3::Constant(1.0);

  Vec3 extent() const { return max - min; }
  Vec3 middle() const { return 0.5 * (min + max); }
  bool contains(const Vec3& p, double inflate = 0.0) const;
};

/// Pinhole camera. world_to_camera maps world points into a frame where +z
/// looks forward, +x right and +y down; pixel (x, y) has its center at (x, y).
struct Camera {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  Mat4 world_to_camera = Mat4::Identity();
  int width = 1;
  int height = 1;

  Mat3 rotation() const { return world_to_camera.topLeftCorner<3, 3>(); }
  Vec3 translation() const { return world_to_camera.topRightCorner<3, 1>(); }
  Vec3 position() const { return -rotation().transpose() * translation(); }

  /// Throws InvalidArgument when an invariant fails.
  void validate() const;
};

/// Camera at `eye` looking at `target`, world +y up.
Camera look_at_camera(const Vec3& eye, const Vec3& target, double focal_px, int width,
                      int height);

struct Scene {
  std::vector<GaussianParticle> particles;
  Aabb bounds;
  Color dc_model = Color::Zero();

  /// Throws InvalidParticle / InvalidArgument naming the offending particle.
  void validate() const;
};

}  // namespace gdgs
