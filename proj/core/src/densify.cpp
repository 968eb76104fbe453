#include "gdgs/densify.hpp"

#include <algorithm>
#include <cmath>

#include "gdgs/error.hpp"

namespace gdgs {

void DensifyConfig::validate() const {
  const double values[] = {grad_threshold, amplitude_prune_eps, opacity_prune_eps, split_scale_threshold};
  for (double v : values) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw Error(ErrorKind::InvalidArgument, "densify thresholds must be finite and >= 0");
  }
  if (interval_steps < 1) throw Error(ErrorKind::InvalidArgument, "densify interval_steps must be >= 1");
  if (start_step < 0) throw Error(ErrorKind::InvalidArgument, "densify start_step must be >= 0");
  if (max_particles < 1) throw Error(ErrorKind::InvalidArgument, "max_particles must be >= 1");
}

void DensifyStats::reset(std::size_t particle_count) {
  grad_sum.assign(particle_count, 0.0);
  visible_count.assign(particle_count, 0);
}

void DensifyStats::accumulate(const std::vector<double>& screen_grad_norm, const std::vector<char>& visible) {
  if (screen_grad_norm.size() != grad_sum.size() || visible.size() != grad_sum.size()) {
    throw Error(ErrorKind::ShapeMismatch, "densify statistics have the wrong particle count");
  }
  for (std::size_t k = 0; k < grad_sum.size(); ++k) {
    if (!visible[k]) continue;
    grad_sum[k] += screen_grad_norm[k];
    ++visible_count[k];
  }
}

double DensifyStats::mean_grad(std::size_t k) const {
  if (k >= grad_sum.size() || visible_count[k] == 0) return 0.0;
  return grad_sum[k] / visible_count[k];
}

DensifyResult densify_prune(const std::vector<GaussianParticle>& particles, const DensifyStats& stats,
                            const DensifyConfig& cfg, std::mt19937_64& rng, bool grow,
                            const Aabb* bounds) {
  cfg.validate();
  DensifyResult out;
  const std::size_t k_in = particles.size();

  std::vector<std::size_t> candidates;
  if (grow) {
    for (std::size_t k = 0; k < k_in; ++k) {
      if (stats.mean_grad(k) > cfg.grad_threshold) candidates.push_back(k);
    }
    if (k_in + candidates.size() > static_cast<std::size_t>(cfg.max_particles)) {
      out.capped = !candidates.empty();
      candidates.clear();
    }
  }
  std::vector<char> is_candidate(k_in, 0);
  for (std::size_t k : candidates) is_candidate[k] = 1;

  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<GaussianParticle> grown;
  std::vector<int> grown_source, grown_parent;
  for (std::size_t k = 0; k < k_in; ++k) {
    const GaussianParticle& p = particles[k];
    if (!is_candidate[k]) {
      grown.push_back(p);
      grown_source.push_back(static_cast<int>(k));
      grown_parent.push_back(static_cast<int>(k));
      continue;
    }
    const Vec3 scale = p.scale();
    int axis;
    const double largest = scale.maxCoeff(&axis);
    const Mat3 r = rotation_matrix(p.rotation);
    if (largest <= cfg.split_scale_threshold) {
      GaussianParticle kept = p;
      GaussianParticle clone = p;
      clone.center = p.center + r.col(axis) * largest;
      if (cfg.preserve_coverage) {
        kept.opacity_logit = clone.opacity_logit = logit(1.0 - std::sqrt(1.0 - p.opacity()));
      }
      grown.push_back(kept);
      grown_source.push_back(static_cast<int>(k));
      grown.push_back(clone);
      grown_source.push_back(-1);
      grown_parent.insert(grown_parent.end(), 2, static_cast<int>(k));
      ++out.cloned;
    } else {
      for (int s = 0; s < 2; ++s) {
        GaussianParticle child = p;
        const Vec3 z(normal(rng), normal(rng), normal(rng));
        child.center = p.center + r * scale.cwiseProduct(z);
        child.log_scale = p.log_scale.array() - std::log(1.6);
        grown.push_back(child);
        grown_source.push_back(-1);
        grown_parent.push_back(static_cast<int>(k));
      }
      ++out.split;
    }
  }

  for (std::size_t i = 0; i < grown.size(); ++i) {
    const GaussianParticle& p = grown[i];
    const bool faint_amplitude = p.amplitude.cwiseAbs().maxCoeff() < cfg.amplitude_prune_eps;
    const bool faint_opacity = p.opacity() < cfg.opacity_prune_eps;
    const bool outside = bounds && !bounds->contains(p.center, 3.0 * p.scale().maxCoeff());
    if (faint_amplitude || faint_opacity || outside) {
      ++out.pruned;
      continue;
    }
    out.particles.push_back(p);
    out.source.push_back(grown_source[i]);
    out.parent.push_back(grown_parent[i]);
  }
  if (out.particles.empty() && !grown.empty()) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < grown.size(); ++i) {
      if (grown[i].opacity_logit > grown[best].opacity_logit) best = i;
    }
    out.particles.push_back(grown[best]);
    out.source.push_back(grown_source[best]);
    out.parent.push_back(grown_parent[best]);
    --out.pruned;
  }
  return out;
}

}  // namespace gdgs
