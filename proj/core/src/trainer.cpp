#include "gdgs/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "gdgs/error.hpp"

namespace gdgs {

void TrainConfig::validate() const {
  if (steps < 0) throw Error(ErrorKind::InvalidArgument, "steps must be >= 0");
  if (psnr_interval < 0 || checkpoint_interval < 0) {
    throw Error(ErrorKind::InvalidArgument, "logging intervals must be >= 0");
  }
  loss.validate();
  adam.validate();
  densify.validate();
}

Color mean_color(std::span<const TrainView> views) {
  Color sum = Color::Zero();
  if (views.empty()) return sum;
  for (const auto& v : views) {
    for (int c = 0; c < kColorChannels; ++c) sum[c] += v.image.channel_mean(c);
  }
  return sum / static_cast<double>(views.size());
}

TrainResult train(Scene scene, std::span<const TrainView> views, const TrainConfig& cfg) {
  cfg.validate();
  if (views.empty()) throw Error(ErrorKind::InvalidArgument, "training needs at least one view");
  for (const auto& v : views) {
    v.camera.validate();
    if (v.image.height() != v.camera.height || v.image.width() != v.camera.width ||
        v.image.channels() != kColorChannels) {
      throw Error(ErrorKind::ShapeMismatch, "training image shape does not match its camera");
    }
  }
  scene.validate();

  TrainResult result;
  std::vector<Color> view_dc(views.size());
  for (std::size_t i = 0; i < views.size(); ++i) {
    for (int c = 0; c < kColorChannels; ++c) view_dc[i][c] = views[i].image.channel_mean(c);
  }
  if (cfg.mode == RenderMode::Gdgs) scene.dc_model = mean_color(views);

  DensifyConfig densify_cfg = cfg.densify;
  if (cfg.mode == RenderMode::Classic) densify_cfg.amplitude_prune_eps = 0.0;

  const double extent = std::max(1e-6, scene.bounds.extent().norm());
  AdamOptimizer optimizer(cfg.adam, extent, cfg.steps);
  std::mt19937_64 rng(cfg.seed);
  DensifyStats stats;
  stats.reset(scene.particles.size());

  std::vector<std::size_t> order(views.size());
  std::size_t cursor = order.size();
  bool cap_warned = false;

  for (int step = 1; step <= cfg.steps; ++step) {
    if (cursor == order.size()) {
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::shuffle(order.begin(), order.end(), rng);
      cursor = 0;
    }
    const std::size_t vi = order[cursor++];
    const TrainView& view = views[vi];
    const std::optional<Color> dc = cfg.mode == RenderMode::Gdgs ? std::optional<Color>(view_dc[vi]) : std::nullopt;
    BackwardResult bw = render_backward(scene, view.camera, view.image, cfg.mode, cfg.loss, cfg.render, dc);

    MetricsRow row;
    row.step = step;
    row.loss = bw.loss;
    row.psnr = std::numeric_limits<double>::quiet_NaN();
    if (cfg.psnr_interval > 0 && step % cfg.psnr_interval == 0) row.psnr = psnr(bw.image, view.image);

    stats.accumulate(bw.screen_grad_norm, bw.visible);
    optimizer.step(scene.particles, bw.grads);

    if (cfg.densify_enabled && step >= densify_cfg.start_step && step % densify_cfg.interval_steps == 0 &&
        step < cfg.steps) {
      const bool grow = densify_cfg.stop_step < 0 || step <= densify_cfg.stop_step;
      DensifyResult d = densify_prune(scene.particles, stats, densify_cfg, rng, grow, &scene.bounds);
      if (d.capped && !cap_warned) {
        result.warnings.push_back("event=densify_suspended step=" + std::to_string(step) +
                                  " particles=" + std::to_string(scene.particles.size()) +
                                  " max_particles=" + std::to_string(densify_cfg.max_particles));
        cap_warned = true;
      }
      scene.particles = std::move(d.particles);
      optimizer.remap(d.parent);
      stats.reset(scene.particles.size());
    }
    row.particle_count = static_cast<int>(scene.particles.size());
    result.metrics.push_back(row);

    if (cfg.checkpoint && cfg.checkpoint_interval > 0 && step % cfg.checkpoint_interval == 0) {
      cfg.checkpoint(step, scene);
    }
  }
  result.scene = std::move(scene);
  return result;
}

std::string metrics_to_csv(const std::vector<MetricsRow>& rows) {
  std::ostringstream os;
  os.precision(17);
  os << "step,loss,psnr,particle_count\n";
  for (const auto& r : rows) {
    os << r.step << ',' << r.loss << ',';
    if (std::isfinite(r.psnr)) os << r.psnr;
    os << ',' << r.particle_count << '\n';
  }
  return os.str();
}

}  // namespace gdgs
