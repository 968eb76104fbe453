#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "gdgs/scene.hpp"

namespace gdgs {

struct DensifyConfig {
  /// Mean screen-space center gradient norm (loss per pixel) that triggers densification.
  double grad_threshold = 2e-6;
  /// Particles whose largest |amplitude| channel falls below this are pruned.
  double amplitude_prune_eps = 0.0;
  double opacity_prune_eps = 0.005;
  /// Particles with a largest scale above this (world units) are split, smaller ones cloned.
  double split_scale_threshold = 0.05;
  int interval_steps = 100;
  int start_step = 100;
  /// Densification stops after this step; pruning continues. Negative means never.
  int stop_step = -1;
  int max_particles = 20000;
  /// A cloned particle and its copy both take opacity 1 - sqrt(1 - alpha), so
  /// where the two overlap they composite exactly like the original: same
  /// weighted amplitude, same transmittance behind.
  bool preserve_coverage = false;

  void validate() const;
};

/// Screen-space positional gradient statistics gathered between densification passes.
struct DensifyStats {
  std::vector<double> grad_sum;
  std::vector<int> visible_count;

  void reset(std::size_t particle_count);
  void accumulate(const std::vector<double>& screen_grad_norm, const std::vector<char>& visible);
  double mean_grad(std::size_t k) const;
};

struct DensifyResult {
  std::vector<GaussianParticle> particles;
  /// For every output particle, the index of the input particle it was kept
  /// from, or -1 for newly created ones.
  std::vector<int> source;
  /// For every output particle, the input particle it was kept or derived from.
  std::vector<int> parent;
  int cloned = 0;
  int split = 0;
  int pruned = 0;
  /// True when growth was suspended because of max_particles.
  bool capped = false;
};

/// Clones small high-gradient particles (offset by one standard deviation
/// along the dominant axis), splits large high-gradient particles into two
/// samples with scales divided by 1.6, then prunes faint particles. Never
/// prunes the last particle. grow = false applies pruning only. When bounds
/// is given, particles that violate the scene bounds invariant are pruned too.
DensifyResult densify_prune(const std::vector<GaussianParticle>& particles, const DensifyStats& stats,
                            const DensifyConfig& cfg, std::mt19937_64& rng, bool grow = true,
                            const Aabb* bounds = nullptr);

}  // namespace gdgs
