#include "gdgs/rasterizer.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gdgs/error.hpp"
#include "gdgs/parallel.hpp"

namespace gdgs {
namespace {

struct Conic {
  double a = 0.0, b = 0.0, c = 0.0;  // inverse covariance [[a, b], [b, c]]
};

struct PixelBox {
  int x0 = 0, x1 = -1, y0 = 0, y1 = -1;
  bool empty() const { return x1 < x0 || y1 < y0; }
};

struct TileGrid {
  int tiles_x = 0;
  int tiles_y = 0;
  int tile_size = 16;
  std::vector<Conic> conics;
  std::vector<PixelBox> boxes;
  std::vector<std::vector<int>> bins;  // splat indices per tile, composite order
};

void require_sorted(std::span<const SplattedGaussian2D> splats) {
  for (std::size_t i = 1; i < splats.size(); ++i) {
    if (composite_order(splats[i], splats[i - 1])) {
      throw Error(ErrorKind::ContractViolation,
                  "splats must be sorted by depth before compositing (violated at position " +
                      std::to_string(i) + ")");
    }
  }
}

TileGrid bin_splats(std::span<const SplattedGaussian2D> splats, int width, int height,
                    const RenderConfig& cfg) {
  if (cfg.tile_size <= 0) throw Error(ErrorKind::InvalidArgument, "tile_size must be positive");
  TileGrid grid;
  grid.tile_size = cfg.tile_size;
  grid.tiles_x = (width + cfg.tile_size - 1) / cfg.tile_size;
  grid.tiles_y = (height + cfg.tile_size - 1) / cfg.tile_size;
  grid.bins.resize(static_cast<std::size_t>(grid.tiles_x) * grid.tiles_y);
  grid.conics.resize(splats.size());
  grid.boxes.resize(splats.size());
  for (std::size_t i = 0; i < splats.size(); ++i) {
    const auto& s = splats[i];
    const double a = s.cov2d(0, 0), b = s.cov2d(0, 1), c = s.cov2d(1, 1);
    const double det = a * c - b * b;
    if (!(det > 0.0) || !std::isfinite(det)) continue;
    grid.conics[i] = {c / det, -b / det, a / det};
    const double lambda_max = 0.5 * (a + c) + std::sqrt(0.25 * (a - c) * (a - c) + b * b);
    const double r = cfg.projection.truncation_sigma * std::sqrt(lambda_max);
    PixelBox box;
    box.x0 = std::max(0, static_cast<int>(std::ceil(s.mean2d.x() - r)));
    box.x1 = std::min(width - 1, static_cast<int>(std::floor(s.mean2d.x() + r)));
    box.y0 = std::max(0, static_cast<int>(std::ceil(s.mean2d.y() - r)));
    box.y1 = std::min(height - 1, static_cast<int>(std::floor(s.mean2d.y() + r)));
    if (!(s.mean2d.x() + r >= 0.0 && s.mean2d.x() - r <= width - 1 && s.mean2d.y() + r >= 0.0 &&
          s.mean2d.y() - r <= height - 1)) {
      continue;
    }
    grid.boxes[i] = box;
    if (box.empty()) continue;
    for (int ty = box.y0 / cfg.tile_size; ty <= box.y1 / cfg.tile_size; ++ty)
      for (int tx = box.x0 / cfg.tile_size; tx <= box.x1 / cfg.tile_size; ++tx)
        grid.bins[static_cast<std::size_t>(ty) * grid.tiles_x + tx].push_back(static_cast<int>(i));
  }
  return grid;
}

struct Sample {
  double g = 0.0;      // truncated Gaussian value
  double alpha = 0.0;  // opacity * g
};

/// Evaluates splat i at pixel (x, y); returns false outside the footprint.
inline bool sample(const SplattedGaussian2D& s, const Conic& k, const PixelBox& box, double trunc2,
                   int x, int y, double& dx, double& dy, Sample& out) {
  if (x < box.x0 || x > box.x1 || y < box.y0 || y > box.y1) return false;
  dx = x - s.mean2d.x();
  dy = y - s.mean2d.y();
  const double q = k.a * dx * dx + 2.0 * k.b * dx * dy + k.c * dy * dy;
  if (q > trunc2) return false;
  out.g = std::exp(-q);
  out.alpha = s.opacity * out.g;
  return true;
}

}  // namespace

FieldImage composite(std::span<const SplattedGaussian2D> splats, int width, int height,
                     const RenderConfig& cfg) {
  require_sorted(splats);
  FieldImage out(height, width, kColorChannels);
  if (splats.empty() || width == 0 || height == 0) return out;
  const TileGrid grid = bin_splats(splats, width, height, cfg);
  const double trunc2 = cfg.projection.truncation_sigma * cfg.projection.truncation_sigma;

  parallel_for(grid.bins.size(), [&](std::size_t t) {
    const auto& bin = grid.bins[t];
    if (bin.empty()) return;
    const int tx = static_cast<int>(t) % grid.tiles_x;
    const int ty = static_cast<int>(t) / grid.tiles_x;
    const int x_end = std::min(width, (tx + 1) * grid.tile_size);
    const int y_end = std::min(height, (ty + 1) * grid.tile_size);
    for (int y = ty * grid.tile_size; y < y_end; ++y) {
      for (int x = tx * grid.tile_size; x < x_end; ++x) {
        double transmittance = 1.0;
        Color acc = Color::Zero();
        for (int i : bin) {
          double dx, dy;
          Sample smp;
          if (!sample(splats[i], grid.conics[i], grid.boxes[i], trunc2, x, y, dx, dy, smp)) continue;
          acc += splats[i].amplitude * (smp.alpha * transmittance);
          transmittance *= 1.0 - smp.alpha;
          if (transmittance < cfg.transmittance_eps) break;
        }
        for (int c = 0; c < kColorChannels; ++c) out.at(y, x, c) = acc[c];
      }
    }
  });
  return out;
}

std::vector<SplatGrad> composite_backward(std::span<const SplattedGaussian2D> splats, int width,
                                          int height, const RenderConfig& cfg,
                                          const FieldImage& grad_out) {
  require_sorted(splats);
  if (grad_out.height() != height || grad_out.width() != width ||
      grad_out.channels() != kColorChannels) {
    throw Error(ErrorKind::ShapeMismatch, "composite_backward: gradient image has the wrong shape");
  }
  std::vector<SplatGrad> grads(splats.size());
  if (splats.empty()) return grads;
  const TileGrid grid = bin_splats(splats, width, height, cfg);
  const double trunc2 = cfg.projection.truncation_sigma * cfg.projection.truncation_sigma;

  // Conic gradients are accumulated per tile and converted to covariance
  // gradients once per splat.
  struct LocalGrad {
    SplatGrad g;
    Vec3 conic = Vec3::Zero();
  };
  std::vector<std::vector<LocalGrad>> tile_grads(grid.bins.size());

  parallel_for(grid.bins.size(), [&](std::size_t t) {
    const auto& bin = grid.bins[t];
    if (bin.empty()) return;
    auto& local = tile_grads[t];
    local.assign(bin.size(), LocalGrad{});
    const int tx = static_cast<int>(t) % grid.tiles_x;
    const int ty = static_cast<int>(t) / grid.tiles_x;
    const int x_end = std::min(width, (tx + 1) * grid.tile_size);
    const int y_end = std::min(height, (ty + 1) * grid.tile_size);

    struct Contribution {
      int slot;
      double g, alpha, transmittance, dx, dy;
    };
    std::vector<Contribution> contribs;
    contribs.reserve(bin.size());

    for (int y = ty * grid.tile_size; y < y_end; ++y) {
      for (int x = tx * grid.tile_size; x < x_end; ++x) {
        const Color g_pix(grad_out.at(y, x, 0), grad_out.at(y, x, 1), grad_out.at(y, x, 2));
        if (g_pix.isZero(0.0)) continue;
        contribs.clear();
        double transmittance = 1.0;
        for (std::size_t slot = 0; slot < bin.size(); ++slot) {
          const int i = bin[slot];
          double dx, dy;
          Sample smp;
          if (!sample(splats[i], grid.conics[i], grid.boxes[i], trunc2, x, y, dx, dy, smp)) continue;
          contribs.push_back({static_cast<int>(slot), smp.g, smp.alpha, transmittance, dx, dy});
          transmittance *= 1.0 - smp.alpha;
          if (transmittance < cfg.transmittance_eps) break;
        }
        double suffix = 0.0;  // weighted color behind the current splat, per unit transmittance
        for (auto it = contribs.rbegin(); it != contribs.rend(); ++it) {
          const int i = bin[it->slot];
          const auto& s = splats[i];
          const Conic& k = grid.conics[i];
          LocalGrad& lg = local[it->slot];
          const double w = g_pix.dot(s.amplitude);
          lg.g.amplitude += g_pix * (it->alpha * it->transmittance);
          const double d_alpha = it->transmittance * (w - suffix);
          suffix = it->alpha * w + (1.0 - it->alpha) * suffix;

          lg.g.opacity += d_alpha * it->g;
          const double d_q = -d_alpha * s.opacity * it->g;
          lg.g.mean2d.x() += d_q * -2.0 * (k.a * it->dx + k.b * it->dy);
          lg.g.mean2d.y() += d_q * -2.0 * (k.b * it->dx + k.c * it->dy);
          lg.conic += d_q * Vec3(it->dx * it->dx, 2.0 * it->dx * it->dy, it->dy * it->dy);
        }
      }
    }
  });

  std::vector<Vec3> conic_grads(splats.size(), Vec3::Zero());
  for (std::size_t t = 0; t < grid.bins.size(); ++t) {
    const auto& bin = grid.bins[t];
    const auto& local = tile_grads[t];
    for (std::size_t slot = 0; slot < local.size(); ++slot) {
      auto& g = grads[bin[slot]];
      g.mean2d += local[slot].g.mean2d;
      g.amplitude += local[slot].g.amplitude;
      g.opacity += local[slot].g.opacity;
      conic_grads[bin[slot]] += local[slot].conic;
    }
  }

  for (std::size_t i = 0; i < splats.size(); ++i) {
    const double a = splats[i].cov2d(0, 0), b = splats[i].cov2d(0, 1), c = splats[i].cov2d(1, 1);
    const double det = a * c - b * b;
    if (!(det > 0.0)) continue;
    const double d2 = det * det;
    const double gA = conic_grads[i][0], gB = conic_grads[i][1], gC = conic_grads[i][2];
    // conic = (c, -b, a) / det
    grads[i].cov2d[0] = gA * (-c * c / d2) + gB * (b * c / d2) + gC * (-b * b / d2);
    grads[i].cov2d[1] = gA * (2.0 * b * c / d2) + gB * (-1.0 / det - 2.0 * b * b / d2) + gC * (2.0 * a * b / d2);
    grads[i].cov2d[2] = gA * (-b * b / d2) + gB * (a * b / d2) + gC * (-a * a / d2);
  }
  return grads;
}

ActivePixels active_pixel_set(const FieldImage& field, double eps) {
  if (eps < 0.0) throw Error(ErrorKind::InvalidArgument, "active_pixel_set: eps must be >= 0");
  ActivePixels out;
  for (int y = 0; y < field.height(); ++y) {
    for (int x = 0; x < field.width(); ++x) {
      for (int c = 0; c < field.channels(); ++c) {
        if (std::abs(field.at(y, x, c)) > eps) {
          out.pixels.push_back(y * field.width() + x);
          break;
        }
      }
    }
  }
  out.fraction = field.pixel_count() == 0
                     ? 0.0
                     : static_cast<double>(out.pixels.size()) / static_cast<double>(field.pixel_count());
  return out;
}

}  // namespace gdgs
