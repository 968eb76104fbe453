#pragma once

#include <Eigen/Core>

namespace gdgs {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;
using Mat23 = Eigen::Matrix<double, 2, 3>;

/// Per-particle color / Laplacian amplitude. Degree-0 only, so RGB.
using Color = Eigen::Vector3d;
inline constexpr int kColorChannels = 3;

}  // namespace gdgs
