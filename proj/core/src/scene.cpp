#include "gdgs/scene.hpp"

#include <Eigen/Dense>
#include <string>

#include "gdgs/error.hpp"

namespace gdgs {

bool is_valid(const GaussianParticle& p) noexcept {
  if (!p.center.allFinite() || !p.rotation.allFinite() || !p.log_scale.allFinite() ||
      !p.amplitude.allFinite() || !std::isfinite(p.opacity_logit)) {
    return false;
  }
  if (p.rotation.norm() < 1e-12) return false;
  const Vec3 s = p.scale();
  return s.allFinite() && (s.array() > 0.0).all();
}

Mat3 rotation_matrix(const Vec4& q_raw) {
  const double n = q_raw.norm();
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw Error(ErrorKind::InvalidParticle, "quaternion has zero or non-finite norm");
  }
  const Vec4 q = q_raw / n;
  const double w = q[0], x = q[1], y = q[2], z = q[3];
  Mat3 r;
  r << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
      2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
      2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
  return r;
}

Mat3 covariance(const GaussianParticle& p) {
  if (!is_valid(p)) throw Error(ErrorKind::InvalidParticle, "particle has non-finite fields");
  const Mat3 r = rotation_matrix(p.rotation);
  const Vec3 var = (2.0 * p.log_scale).array().exp();
  Mat3 sigma = r * var.asDiagonal() * r.transpose();
  // Symmetrize so the result is exactly symmetric.
  return 0.5 * (sigma + sigma.transpose());
}

double eval_gaussian(const GaussianParticle& p, const Vec3& x) {
  const Mat3 sigma = covariance(p);
  Eigen::LDLT<Mat3> ldlt(sigma);
  const double min_pivot = ldlt.vectorD().minCoeff();
  if (ldlt.info() != Eigen::Success || !(min_pivot > 1e-300) ||
      min_pivot < 1e-14 * ldlt.vectorD().maxCoeff()) {
    throw Error(ErrorKind::NumericalDegeneracy, "covariance is singular");
  }
  const Vec3 d = x - p.center;
  return std::exp(-d.dot(ldlt.solve(d)));
}

bool Aabb::contains(const Vec3& p, double inflate) const {
  return ((p.array() >= (min.array() - inflate)) && (p.array() <= (max.array() + inflate))).all();
}

void Camera::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) throw Error(ErrorKind::InvalidArgument, "camera focal lengths must be positive");
  if (width <= 0 || height <= 0) throw Error(ErrorKind::InvalidArgument, "camera size must be positive");
  if (!(cx >= 0.0 && cx < width && cy >= 0.0 && cy < height)) {
    throw Error(ErrorKind::InvalidArgument, "camera principal point outside the image");
  }
  if (!world_to_camera.allFinite()) throw Error(ErrorKind::InvalidArgument, "camera extrinsics not finite");
  const Mat3 r = rotation();
  if ((r * r.transpose() - Mat3::Identity()).cwiseAbs().maxCoeff() > 1e-6) {
    throw Error(ErrorKind::InvalidArgument, "camera rotation block is not orthonormal");
  }
  if (std::abs(r.determinant() - 1.0) > 1e-6) {
    throw Error(ErrorKind::InvalidArgument, "camera rotation block is not a proper rotation");
  }
  const Eigen::RowVector4d last = world_to_camera.row(3);
  if ((last - Eigen::RowVector4d(0, 0, 0, 1)).cwiseAbs().maxCoeff() > 1e-12) {
    throw Error(ErrorKind::InvalidArgument, "camera extrinsics last row must be (0,0,0,1)");
  }
}

Camera look_at_camera(const Vec3& eye, const Vec3& target, double focal_px, int width,
                      int height) {
  const Vec3 diff = target - eye;
  if (diff.norm() < 1e-12) throw Error(ErrorKind::Spec, "camera look-at target equals its position");
  const Vec3 forward = diff.normalized();
  const Vec3 up(0.0, 1.0, 0.0);
  const Vec3 right_raw = forward.cross(up);
  if (right_raw.norm() < 1e-9) throw Error(ErrorKind::Spec, "camera looks along the world up axis");
  const Vec3 right = right_raw.normalized();
  const Vec3 down = forward.cross(right);

  Camera cam;
  cam.fx = cam.fy = focal_px;
  cam.width = width;
  cam.height = height;
  cam.cx = 0.5 * (width - 1);
  cam.cy = 0.5 * (height - 1);
  Mat3 r;
  r.row(0) = right.transpose();
  r.row(1) = down.transpose();
  r.row(2) = forward.transpose();
  cam.world_to_camera.setIdentity();
  cam.world_to_camera.topLeftCorner<3, 3>() = r;
  cam.world_to_camera.topRightCorner<3, 1>() = -r * eye;
  return cam;
}

void Scene::validate() const {
  if (particles.empty()) throw Error(ErrorKind::InvalidArgument, "scene must contain at least one particle");
  if (!bounds.min.allFinite() || !bounds.max.allFinite() ||
      !(bounds.min.array() <= bounds.max.array()).all()) {
    throw Error(ErrorKind::InvalidArgument, "scene bounds are malformed");
  }
  if (!dc_model.allFinite()) throw Error(ErrorKind::InvalidArgument, "scene dc_model is not finite");
  for (std::size_t k = 0; k < particles.size(); ++k) {
    const auto& p = particles[k];
    if (!is_valid(p)) {
      throw Error(ErrorKind::InvalidParticle, "particles[" + std::to_string(k) + "] is invalid");
    }
    const double inflate = 3.0 * p.scale().maxCoeff();
    if (!bounds.contains(p.center, inflate)) {
      throw Error(ErrorKind::InvalidParticle,
                  "particles[" + std::to_string(k) + "] center lies outside the scene bounds");
    }
  }
}

}  // namespace gdgs
