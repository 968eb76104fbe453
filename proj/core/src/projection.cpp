#include "gdgs/projection.hpp"

#include <algorithm>
#include <cmath>

namespace gdgs {

bool composite_order(const SplattedGaussian2D& a, const SplattedGaussian2D& b) noexcept {
  if (a.depth != b.depth) return a.depth < b.depth;
  return a.index < b.index;
}

std::optional<SplattedGaussian2D> project(const GaussianParticle& p, int index, const Camera& cam,
                                          const ProjectionConfig& cfg, ProjectionCache* cache) {
  const Mat3 w_rot = cam.rotation();
  const Vec3 c = w_rot * p.center + cam.translation();
  const double z = c.z();
  if (!(z > cfg.z_near)) return std::nullopt;

  Mat23 jac;
  jac << cam.fx / z, 0.0, -cam.fx * c.x() / (z * z),
         0.0, cam.fy / z, -cam.fy * c.y() / (z * z);
  const Mat3 sigma = covariance(p);
  const Mat23 m = jac * w_rot;
  Mat2 cov = m * sigma * m.transpose();
  cov(0, 1) = cov(1, 0) = 0.5 * (cov(0, 1) + cov(1, 0));
  cov(0, 0) += cfg.low_pass;
  cov(1, 1) += cfg.low_pass;

  const double half_trace = 0.5 * (cov(0, 0) + cov(1, 1));
  const double half_diff = 0.5 * (cov(0, 0) - cov(1, 1));
  const double lambda_max = half_trace + std::sqrt(half_diff * half_diff + cov(0, 1) * cov(0, 1));
  const double radius = cfg.truncation_sigma * std::sqrt(lambda_max);

  SplattedGaussian2D s;
  s.mean2d = Vec2(cam.fx * c.x() / z + cam.cx, cam.fy * c.y() / z + cam.cy);
  s.cov2d = cov;
  s.depth = z;
  s.amplitude = p.amplitude;
  s.opacity = p.opacity();
  s.index = index;
  s.radius = radius;

  if (!s.mean2d.allFinite() || !std::isfinite(radius)) return std::nullopt;
  if (s.mean2d.x() + radius < 0.0 || s.mean2d.x() - radius > cam.width - 1 ||
      s.mean2d.y() + radius < 0.0 || s.mean2d.y() - radius > cam.height - 1) {
    return std::nullopt;
  }
  if (cache) {
    cache->cam_center = c;
    cache->jacobian = jac;
    cache->world_cov = sigma;
  }
  return s;
}

ProjectedScene project_scene(const Scene& scene, const Camera& cam, const ProjectionConfig& cfg) {
  std::vector<std::pair<SplattedGaussian2D, ProjectionCache>> items;
  items.reserve(scene.particles.size());
  for (std::size_t k = 0; k < scene.particles.size(); ++k) {
    ProjectionCache cache;
    if (auto s = project(scene.particles[k], static_cast<int>(k), cam, cfg, &cache)) {
      items.emplace_back(*s, cache);
    }
  }
  std::sort(items.begin(), items.end(),
            [](const auto& a, const auto& b) { return composite_order(a.first, b.first); });
  ProjectedScene out;
  out.splats.reserve(items.size());
  out.caches.reserve(items.size());
  for (auto& [s, c] : items) {
    out.splats.push_back(s);
    out.caches.push_back(c);
  }
  return out;
}

ParticleGrad& ParticleGrad::operator+=(const ParticleGrad& o) {
  center += o.center;
  rotation += o.rotation;
  log_scale += o.log_scale;
  amplitude += o.amplitude;
  opacity_logit += o.opacity_logit;
  return *this;
}

bool ParticleGrad::all_finite() const {
  return center.allFinite() && rotation.allFinite() && log_scale.allFinite() &&
         amplitude.allFinite() && std::isfinite(opacity_logit);
}

ParticleGrad project_backward(const GaussianParticle& p, const Camera& cam,
                              const ProjectionCache& cache, const SplatGrad& grad) {
  ParticleGrad out;
  out.amplitude = grad.amplitude;
  const double alpha = p.opacity();
  out.opacity_logit = grad.opacity * alpha * (1.0 - alpha);

  const Mat3 w_rot = cam.rotation();
  const Mat23& jac = cache.jacobian;
  const Mat3& sigma = cache.world_cov;
  const Mat23 m = jac * w_rot;

  Mat2 g_cov;
  g_cov << grad.cov2d[0], 0.5 * grad.cov2d[1],
           0.5 * grad.cov2d[1], grad.cov2d[2];

  const Mat23 g_m = 2.0 * g_cov * m * sigma;
  const Mat3 g_sigma = m.transpose() * g_cov * m;
  const Mat23 g_jac = g_m * w_rot.transpose();

  const double x = cache.cam_center.x();
  const double y = cache.cam_center.y();
  const double z = cache.cam_center.z();
  const double z2 = z * z;
  const double z3 = z2 * z;
  const double fx = cam.fx, fy = cam.fy;

  Vec3 g_c;
  g_c.x() = grad.mean2d.x() * fx / z + g_jac(0, 2) * (-fx / z2);
  g_c.y() = grad.mean2d.y() * fy / z + g_jac(1, 2) * (-fy / z2);
  g_c.z() = grad.mean2d.x() * (-fx * x / z2) + grad.mean2d.y() * (-fy * y / z2) +
            g_jac(0, 0) * (-fx / z2) + g_jac(0, 2) * (2.0 * fx * x / z3) +
            g_jac(1, 1) * (-fy / z2) + g_jac(1, 2) * (2.0 * fy * y / z3);
  out.center = w_rot.transpose() * g_c;

  // Sigma = R diag(var) R^T, var = exp(2 s).
  const Mat3 r = rotation_matrix(p.rotation);
  const Vec3 var = (2.0 * p.log_scale).array().exp();
  const Mat3 g_sym = 0.5 * (g_sigma + g_sigma.transpose());
  const Mat3 g_r = 2.0 * g_sym * r * var.asDiagonal();
  const Mat3 rt_g_r = r.transpose() * g_sym * r;
  for (int i = 0; i < 3; ++i) out.log_scale[i] = rt_g_r(i, i) * 2.0 * var[i];

  const double qn = p.rotation.norm();
  const Vec4 q = p.rotation / qn;
  const double qw = q[0], qx = q[1], qy = q[2], qz = q[3];
  const auto& g = g_r;
  Vec4 g_q;
  g_q[0] = 2.0 * (-qz * g(0, 1) + qy * g(0, 2) + qz * g(1, 0) - qx * g(1, 2) - qy * g(2, 0) + qx * g(2, 1));
  g_q[1] = 2.0 * (qy * g(0, 1) + qz * g(0, 2) + qy * g(1, 0) - 2.0 * qx * g(1, 1) - qw * g(1, 2) +
                  qz * g(2, 0) + qw * g(2, 1) - 2.0 * qx * g(2, 2));
  g_q[2] = 2.0 * (-2.0 * qy * g(0, 0) + qx * g(0, 1) + qw * g(0, 2) + qx * g(1, 0) + qz * g(1, 2) -
                  qw * g(2, 0) + qz * g(2, 1) - 2.0 * qy * g(2, 2));
  g_q[3] = 2.0 * (-2.0 * qz * g(0, 0) - qw * g(0, 1) + qx * g(0, 2) + qw * g(1, 0) - 2.0 * qz * g(1, 1) +
                  qy * g(1, 2) + qx * g(2, 0) + qy * g(2, 1));
  out.rotation = (g_q - q * q.dot(g_q)) / qn;
  return out;
}

}  // namespace gdgs
