#pragma once

#include "gdgs/field_image.hpp"

namespace gdgs {

struct SsimConfig {
  int window = 11;  // odd
  double sigma = 1.5;
  double c1 = 1e-4;  // (0.01)^2 for unit-range images
  double c2 = 9e-4;  // (0.03)^2

  void validate() const;
};

/// Mean SSIM over all pixels and channels. The local statistics use a
/// normalized separable Gaussian window with zero padding outside the image.
/// When grad_x is non-null it receives dSSIM/dx.
double ssim(const FieldImage& x, const FieldImage& y, const SsimConfig& cfg = {},
            FieldImage* grad_x = nullptr);

struct LossConfig {
  double lambda = 0.2;  // D-SSIM weight, in [0, 1]
  double beta = 0.2;    // image-gradient L1 weight, >= 0
  SsimConfig ssim;

  void validate() const;
};

/// (1 - lambda) mean|c - im| + beta mean(|du c - du im| + |dv c - dv im|)
///   + lambda (1 - SSIM(c, im)) / 2
/// with forward differences (zero across the last row/column) and means over
/// all H*W*C samples. grad_c, when non-null, receives dL/dc; the L1 terms use
/// sign(0) = 0.
double loss_gdgs(const FieldImage& c, const FieldImage& im, const LossConfig& cfg,
                 FieldImage* grad_c = nullptr);

/// (1 - lambda) mean|c - im| + lambda (1 - SSIM(c, im)) / 2.
double loss_3dgs(const FieldImage& c, const FieldImage& im, double lambda,
                 const SsimConfig& ssim_cfg = {}, FieldImage* grad_c = nullptr);

inline constexpr double kPsnrCap = 99.0;

/// 10 log10(peak^2 / MSE), capped at kPsnrCap (also returned for MSE = 0).
double psnr(const FieldImage& c, const FieldImage& im, double peak = 1.0);

}  // namespace gdgs
