#include "gdgs/image_loss.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "gdgs/error.hpp"

namespace gdgs {
namespace {

std::vector<double> gaussian_window(const SsimConfig& cfg) {
  std::vector<double> w(cfg.window);
  const int r = cfg.window / 2;
  double sum = 0.0;
  for (int i = 0; i < cfg.window; ++i) {
    const double d = i - r;
    w[i] = std::exp(-d * d / (2.0 * cfg.sigma * cfg.sigma));
    sum += w[i];
  }
  for (double& v : w) v /= sum;
  return w;
}

/// Zero-padded "same" separable convolution of a single plane. The window is
/// symmetric, so this operator is also its own adjoint.
std::vector<double> blur(const std::vector<double>& in, int h, int w, const std::vector<double>& k) {
  const int r = static_cast<int>(k.size()) / 2;
  std::vector<double> tmp(in.size(), 0.0), out(in.size(), 0.0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double s = 0.0;
      const int lo = std::max(-r, -x), hi = std::min(r, w - 1 - x);
      for (int d = lo; d <= hi; ++d) s += k[d + r] * in[static_cast<std::size_t>(y) * w + x + d];
      tmp[static_cast<std::size_t>(y) * w + x] = s;
    }
  }
  for (int y = 0; y < h; ++y) {
    const int lo = std::max(-r, -y), hi = std::min(r, h - 1 - y);
    for (int x = 0; x < w; ++x) {
      double s = 0.0;
      for (int d = lo; d <= hi; ++d) s += k[d + r] * tmp[static_cast<std::size_t>(y + d) * w + x];
      out[static_cast<std::size_t>(y) * w + x] = s;
    }
  }
  return out;
}

inline double sign(double v) { return (v > 0.0) - (v < 0.0); }

}  // namespace

void SsimConfig::validate() const {
  if (window < 1 || window % 2 == 0) throw Error(ErrorKind::InvalidArgument, "ssim window must be a positive odd integer");
  if (!(sigma > 0.0)) throw Error(ErrorKind::InvalidArgument, "ssim sigma must be positive");
  if (!(c1 > 0.0) || !(c2 > 0.0)) throw Error(ErrorKind::InvalidArgument, "ssim stabilizers must be positive");
}

void LossConfig::validate() const {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw Error(ErrorKind::InvalidArgument, "lambda must lie in [0, 1]");
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw Error(ErrorKind::InvalidArgument, "beta must be >= 0");
  ssim.validate();
}

double ssim(const FieldImage& x, const FieldImage& y, const SsimConfig& cfg, FieldImage* grad_x) {
  require_same_shape(x, y, "ssim");
  cfg.validate();
  if (x.empty()) throw Error(ErrorKind::InvalidArgument, "ssim of an empty image");
  const int h = x.height(), w = x.width();
  const std::size_t n = x.pixel_count();
  const double inv_count = 1.0 / static_cast<double>(x.size());
  const std::vector<double> k = gaussian_window(cfg);
  if (grad_x) *grad_x = FieldImage(h, w, x.channels());

  double total = 0.0;
  for (int c = 0; c < x.channels(); ++c) {
    const std::vector<double> xp = x.channel_plane(c);
    const std::vector<double> yp = y.channel_plane(c);
    std::vector<double> xx(n), yy(n), xy(n);
    for (std::size_t i = 0; i < n; ++i) {
      xx[i] = xp[i] * xp[i];
      yy[i] = yp[i] * yp[i];
      xy[i] = xp[i] * yp[i];
    }
    const auto mu1 = blur(xp, h, w, k);
    const auto mu2 = blur(yp, h, w, k);
    const auto m11 = blur(xx, h, w, k);
    const auto m22 = blur(yy, h, w, k);
    const auto m12 = blur(xy, h, w, k);

    std::vector<double> d_mu1, d_m11, d_m12;
    if (grad_x) {
      d_mu1.resize(n);
      d_m11.resize(n);
      d_m12.resize(n);
    }
    for (std::size_t i = 0; i < n; ++i) {
      const double s11 = m11[i] - mu1[i] * mu1[i];
      const double s22 = m22[i] - mu2[i] * mu2[i];
      const double s12 = m12[i] - mu1[i] * mu2[i];
      const double a1 = 2.0 * mu1[i] * mu2[i] + cfg.c1;
      const double a2 = 2.0 * s12 + cfg.c2;
      const double b1 = mu1[i] * mu1[i] + mu2[i] * mu2[i] + cfg.c1;
      const double b2 = s11 + s22 + cfg.c2;
      const double map = (a1 * a2) / (b1 * b2);
      total += map;
      if (grad_x) {
        // Partial derivatives of the map with respect to the blurred moments.
        d_m12[i] = inv_count * map * 2.0 / a2;
        d_m11[i] = -inv_count * map / b2;
        d_mu1[i] = inv_count * map *
                   (2.0 * mu2[i] / a1 - 2.0 * mu2[i] / a2 - 2.0 * mu1[i] / b1 + 2.0 * mu1[i] / b2);
      }
    }
    if (grad_x) {
      const auto g_mu1 = blur(d_mu1, h, w, k);
      const auto g_m11 = blur(d_m11, h, w, k);
      const auto g_m12 = blur(d_m12, h, w, k);
      std::vector<double> g(n);
      for (std::size_t i = 0; i < n; ++i) g[i] = g_mu1[i] + 2.0 * xp[i] * g_m11[i] + yp[i] * g_m12[i];
      grad_x->set_channel_plane(c, g);
    }
  }
  return total * inv_count;
}

double loss_gdgs(const FieldImage& c, const FieldImage& im, const LossConfig& cfg, FieldImage* grad_c) {
  require_same_shape(c, im, "loss_gdgs");
  cfg.validate();
  if (c.empty()) throw Error(ErrorKind::InvalidArgument, "loss of an empty image");
  const double inv_count = 1.0 / static_cast<double>(c.size());
  const int h = c.height(), w = c.width(), ch = c.channels();
  if (grad_c) *grad_c = FieldImage(h, w, ch);

  double l1 = 0.0, lgrad = 0.0;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int k = 0; k < ch; ++k) {
        const double d = c.at(y, x, k) - im.at(y, x, k);
        l1 += std::abs(d);
        if (grad_c) grad_c->at(y, x, k) += (1.0 - cfg.lambda) * inv_count * sign(d);
        if (cfg.beta == 0.0) continue;
        if (x + 1 < w) {
          const double gx = (c.at(y, x + 1, k) - im.at(y, x + 1, k)) - d;
          lgrad += std::abs(gx);
          if (grad_c) {
            const double s = cfg.beta * inv_count * sign(gx);
            grad_c->at(y, x + 1, k) += s;
            grad_c->at(y, x, k) -= s;
          }
        }
        if (y + 1 < h) {
          const double gy = (c.at(y + 1, x, k) - im.at(y + 1, x, k)) - d;
          lgrad += std::abs(gy);
          if (grad_c) {
            const double s = cfg.beta * inv_count * sign(gy);
            grad_c->at(y + 1, x, k) += s;
            grad_c->at(y, x, k) -= s;
          }
        }
      }
    }
  }
  double value = (1.0 - cfg.lambda) * l1 * inv_count + cfg.beta * lgrad * inv_count;
  if (cfg.lambda > 0.0) {
    FieldImage g_ssim;
    const double s = ssim(c, im, cfg.ssim, grad_c ? &g_ssim : nullptr);
    value += cfg.lambda * 0.5 * (1.0 - s);
    if (grad_c) *grad_c += g_ssim * (-0.5 * cfg.lambda);
  }
  return value;
}

double loss_3dgs(const FieldImage& c, const FieldImage& im, double lambda, const SsimConfig& ssim_cfg,
                 FieldImage* grad_c) {
  LossConfig cfg;
  cfg.lambda = lambda;
  cfg.beta = 0.0;
  cfg.ssim = ssim_cfg;
  return loss_gdgs(c, im, cfg, grad_c);
}

double psnr(const FieldImage& c, const FieldImage& im, double peak) {
  if (!(peak > 0.0)) throw Error(ErrorKind::InvalidArgument, "psnr peak must be positive");
  const double mse = mean_squared_error(c, im);
  if (mse <= 0.0) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(peak * peak / mse));
}

}  // namespace gdgs
