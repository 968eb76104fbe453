#include "gdgs/sparsity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gdgs/error.hpp"
#include "gdgs/poisson.hpp"

namespace gdgs {
namespace {

double quantile_sorted(const std::vector<double>& v, double q) {
  const double pos = q * static_cast<double>(v.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return v[lo] + frac * (v[hi] - v[lo]);
}

/// Laplacian with entries below the rounding-error bound of the 5-point sum
/// set to exactly zero.
FieldImage clean_laplacian(const FieldImage& im) {
  FieldImage lap = discrete_laplacian(im);
  const int h = im.height(), w = im.width();
  const double eps = std::numeric_limits<double>::epsilon();
  for (int c = 0; c < im.channels(); ++c) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const double mag = std::abs(im.at(std::max(y - 1, 0), x, c)) + std::abs(im.at(std::min(y + 1, h - 1), x, c)) +
                           std::abs(im.at(y, std::max(x - 1, 0), c)) + std::abs(im.at(y, std::min(x + 1, w - 1), c)) +
                           4.0 * std::abs(im.at(y, x, c));
        if (std::abs(lap.at(y, x, c)) <= 8.0 * eps * mag) lap.at(y, x, c) = 0.0;
      }
    }
  }
  return lap;
}

/// Solves sum gamma^2 / (d_i^2 + gamma^2) = n / 2 for gamma by bisection.
double mle_gamma(const std::vector<double>& x, double x0, double hint) {
  auto score = [&](double g) {
    double s = 0.0;
    for (double v : x) {
      const double d = v - x0;
      s += g * g / (d * d + g * g);
    }
    return s - 0.5 * static_cast<double>(x.size());
  };
  double lo = hint, hi = hint;
  while (score(lo) > 0.0 && lo > 1e-300) lo *= 0.5;
  while (score(hi) < 0.0 && hi < 1e300) hi *= 2.0;
  for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (score(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

CauchyFit fit_cauchy_gamma(std::span<const double> samples, bool mle_refine) {
  if (samples.size() < 16) throw Error(ErrorKind::InvalidArgument, "Cauchy fit needs at least 16 samples");
  std::vector<double> v(samples.begin(), samples.end());
  for (double x : v) {
    if (!std::isfinite(x)) throw Error(ErrorKind::InvalidArgument, "Cauchy fit samples must be finite");
  }
  std::sort(v.begin(), v.end());
  CauchyFit fit;
  fit.x0 = quantile_sorted(v, 0.5);
  fit.gamma = 0.5 * (quantile_sorted(v, 0.75) - quantile_sorted(v, 0.25));
  if (!(fit.gamma > 0.0)) {
    fit.gamma = std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(fit.x0));
    fit.degenerate = true;
    return fit;
  }
  if (mle_refine) {
    for (int it = 0; it < 50; ++it) {
      fit.gamma = mle_gamma(v, fit.x0, fit.gamma);
      double num = 0.0, den = 0.0;
      for (double x : v) {
        const double d = x - fit.x0;
        const double w = 1.0 / (d * d + fit.gamma * fit.gamma);
        num += w * x;
        den += w;
      }
      const double next = num / den;
      const bool done = std::abs(next - fit.x0) <= 1e-12 * (std::abs(fit.x0) + fit.gamma);
      fit.x0 = next;
      if (done) break;
    }
    fit.gamma = mle_gamma(v, fit.x0, fit.gamma);
  }
  return fit;
}

FieldImage threshold(const FieldImage& field, double t) {
  if (!(t >= 0.0)) throw Error(ErrorKind::InvalidArgument, "threshold must be >= 0");
  FieldImage out = field;
  for (double& x : out.data()) {
    if (!(std::abs(x) >= t)) x = 0.0;
  }
  return out;
}

std::vector<SweepRow> sparsity_sweep(const FieldImage& im, std::span<const double> thresholds) {
  if (im.empty() || !im.all_finite()) throw Error(ErrorKind::InvalidArgument, "sweep needs a finite, non-empty image");
  const FieldImage rho = clean_laplacian(im);
  const std::vector<double> dc = im.channel_means();
  const double npix = static_cast<double>(im.pixel_count());
  std::vector<SweepRow> rows;
  for (double t : thresholds) {
    const FieldImage rho_t = threshold(rho, t);
    const FieldImage rec = solve_spectral(PoissonProblem{rho_t, dc, Boundary::Neumann});
    for (int c = 0; c < im.channels(); ++c) {
      std::size_t nonzero = 0;
      double se = 0.0;
      for (int y = 0; y < im.height(); ++y) {
        for (int x = 0; x < im.width(); ++x) {
          if (rho_t.at(y, x, c) != 0.0) ++nonzero;
          const double d = rec.at(y, x, c) - im.at(y, x, c);
          se += d * d;
        }
      }
      rows.push_back({t, c, static_cast<double>(nonzero) / npix, se / npix});
    }
  }
  return rows;
}

DomainComparison compare_domains(const FieldImage& im255, bool mle_refine) {
  if (im255.empty() || !im255.all_finite()) {
    throw Error(ErrorKind::InvalidArgument, "compare_domains needs a finite, non-empty image");
  }
  const FieldImage lap = discrete_laplacian(im255);
  DomainComparison out;
  for (int c = 0; c < im255.channels(); ++c) {
    out.intensity.push_back(fit_cauchy_gamma(im255.channel_plane(c), mle_refine));
    out.laplacian.push_back(fit_cauchy_gamma(lap.channel_plane(c), mle_refine));
    if (out.intensity.back().degenerate) {
      out.warnings.push_back("event=degenerate_samples domain=intensity channel=" + std::to_string(c));
    }
    if (out.laplacian.back().degenerate) {
      out.warnings.push_back("event=degenerate_samples domain=laplacian channel=" + std::to_string(c));
    }
  }
  return out;
}

}  // namespace gdgs
