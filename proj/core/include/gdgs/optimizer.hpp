#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "gdgs/projection.hpp"
#include "gdgs/scene.hpp"

namespace gdgs {

struct LearningRates {
  double center = 2e-4;  // multiplied by the scene extent
  double rotation = 1e-3;
  double log_scale = 5e-3;
  double amplitude = 2.5e-2;
  double opacity = 5e-2;
  /// Center rate at the last step relative to the first; decays exponentially.
  double center_final_ratio = 0.01;
  /// The same for the rotation, scale, amplitude and opacity rates.
  double final_ratio = 1.0;
};

struct AdamConfig {
  LearningRates lr;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-15;

  void validate() const;
};

using ParamVector = std::array<double, GaussianParticle::kParamCount>;

/// Flattening order: center(3), rotation(4), log_scale(3), amplitude(3), opacity_logit(1).
ParamVector pack(const GaussianParticle& p);
GaussianParticle unpack(const ParamVector& v);
ParamVector pack(const ParticleGrad& g);

/// Adaptive moment estimation with one learning rate per parameter group.
/// Bias correction counts the updates each particle has received, so particles
/// created mid-run start like fresh parameters. Quaternions are renormalized
/// after every step.
class AdamOptimizer {
 public:
  AdamOptimizer(const AdamConfig& cfg, double scene_extent, int total_steps);

  void step(std::vector<GaussianParticle>& particles, const std::vector<ParticleGrad>& grads);

  /// Rebuilds the moment buffers after densification: particle i of the new
  /// set inherits the moments and update count of old particle source[i], or
  /// zeros if source[i] < 0.
  void remap(const std::vector<int>& source);

  std::int64_t step_count() const noexcept { return step_; }
  double center_lr() const noexcept;

 private:
  AdamConfig cfg_;
  double extent_;
  int total_steps_;
  std::int64_t step_ = 0;
  std::vector<ParamVector> m_;
  std::vector<ParamVector> v_;
  std::vector<std::int64_t> age_;  // updates applied to each particle
};

}  // namespace gdgs
