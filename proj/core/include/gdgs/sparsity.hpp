#pragma once

#include <span>
#include <string>
#include <vector>

#include "gdgs/field_image.hpp"

namespace gdgs {

struct CauchyFit {
  double x0 = 0.0;
  double gamma = 0.0;
  /// Set when the interquartile range vanished and gamma is only a floor.
  bool degenerate = false;
};

/// Location = sample median, scale = half the interquartile range (linear
/// quantile interpolation). With mle_refine the pair is polished by
/// maximum-likelihood iterations. Requires at least 16 finite samples.
CauchyFit fit_cauchy_gamma(std::span<const double> samples, bool mle_refine = false);

/// Hard threshold: keeps x where |x| >= t, zero elsewhere.
FieldImage threshold(const FieldImage& field, double t);

struct SweepRow {
  double t = 0.0;
  int channel = 0;
  double nonzero_fraction = 0.0;
  double mse = 0.0;
};

/// For each threshold t: threshold the image Laplacian, reconstruct with the
/// spectral solver pinned to the image mean, and record per channel the
/// fraction of nonzero Laplacian samples and the reconstruction MSE.
/// Laplacian samples within rounding error of zero count as zero.
std::vector<SweepRow> sparsity_sweep(const FieldImage& im, std::span<const double> thresholds);

struct DomainComparison {
  std::vector<CauchyFit> intensity;  // per channel
  std::vector<CauchyFit> laplacian;  // per channel
  std::vector<std::string> warnings;
};

/// Fits Cauchy scales to the intensity samples and to the Laplacian samples of
/// every channel. Expects an image on the 0..255 scale.
DomainComparison compare_domains(const FieldImage& im255, bool mle_refine = false);

struct SparsityReport {
  std::vector<double> gamma_intensity;
  std::vector<double> gamma_laplacian;
  std::vector<SweepRow> sweep;
};

}  // namespace gdgs
