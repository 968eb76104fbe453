#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "gdgs/densify.hpp"
#include "gdgs/image_loss.hpp"
#include "gdgs/optimizer.hpp"
#include "gdgs/renderer.hpp"
#include "gdgs/scene.hpp"

namespace gdgs {

struct TrainView {
  Camera camera;
  FieldImage image;  // H x W x 3, values in [0, 1]
};

struct TrainConfig {
  RenderMode mode = RenderMode::Gdgs;
  int steps = 1000;
  LossConfig loss;
  AdamConfig adam;
  DensifyConfig densify;
  bool densify_enabled = true;
  RenderOptions render;
  std::uint64_t seed = 0;
  /// PSNR of the current training view is logged every this many steps (0 disables).
  int psnr_interval = 50;
  /// checkpoint(step, scene) is called every this many steps (0 disables).
  int checkpoint_interval = 0;
  std::function<void(int, const Scene&)> checkpoint;

  void validate() const;
};

struct MetricsRow {
  int step = 0;
  double loss = 0.0;
  double psnr = 0.0;  // NaN on steps without a PSNR evaluation
  int particle_count = 0;
};

struct TrainResult {
  Scene scene;
  std::vector<MetricsRow> metrics;
  std::vector<std::string> warnings;
};

/// Per-channel mean over all training images.
Color mean_color(std::span<const TrainView> views);

/// Runs cfg.steps forward/backward/update iterations over views visited in a
/// seeded shuffled order. Gdgs renders are pinned to the mean of the view
/// being fitted; the returned scene's dc_model is the mean of all training
/// images. Classic mode never prunes on amplitude.
TrainResult train(Scene scene, std::span<const TrainView> views, const TrainConfig& cfg);

/// CSV with header "step,loss,psnr,particle_count"; psnr is empty when not evaluated.
std::string metrics_to_csv(const std::vector<MetricsRow>& rows);

}  // namespace gdgs
