#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "gdgs/field_image.hpp"
#include "gdgs/image_io.hpp"
#include "gdgs/scene.hpp"

namespace gdgs::testutil {

inline std::filesystem::path data_dir() { return GDGS_TEST_DATA_DIR; }

inline std::vector<std::filesystem::path> photo_paths() {
  std::vector<std::filesystem::path> out;
  for (const auto& e : std::filesystem::directory_iterator(data_dir() / "photos")) {
    if (e.path().extension() == ".png") out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline FieldImage random_image(int h, int w, int c, std::uint64_t seed, double lo = 0.0, double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  FieldImage img(h, w, c);
  for (double& v : img.data()) v = u(rng);
  return img;
}

/// Sum of a few random low-frequency cosines.
inline FieldImage smooth_image(int h, int w, int c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  FieldImage img(h, w, c);
  for (int ch = 0; ch < c; ++ch) {
    for (int term = 0; term < 4; ++term) {
      const double a = u(rng) - 0.5, fx = 3.0 * u(rng), fy = 3.0 * u(rng), phase = 6.283 * u(rng);
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
          img.at(y, x, ch) += a * std::cos(6.283 * (fx * x / w + fy * y / h) + phase);
    }
  }
  return img;
}

/// Camera at the origin looking down +z.
inline Camera identity_camera(int width, int height, double focal) {
  Camera cam;
  cam.width = width;
  cam.height = height;
  cam.fx = cam.fy = focal;
  cam.cx = 0.5 * (width - 1);
  cam.cy = 0.5 * (height - 1);
  return cam;
}

inline Vec4 random_quaternion(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  return Vec4(n(rng), n(rng), n(rng), n(rng)).normalized();
}

}  // namespace gdgs::testutil
