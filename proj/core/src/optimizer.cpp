#include "gdgs/optimizer.hpp"

#include <cmath>

#include "gdgs/error.hpp"

namespace gdgs {

void AdamConfig::validate() const {
  const double rates[] = {lr.center, lr.rotation, lr.log_scale, lr.amplitude, lr.opacity};
  for (double r : rates) {
    if (!(r >= 0.0) || !std::isfinite(r)) throw Error(ErrorKind::InvalidArgument, "learning rates must be finite and >= 0");
  }
  if (!(lr.center_final_ratio > 0.0 && lr.center_final_ratio <= 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "center_final_ratio must lie in (0, 1]");
  }
  if (!(lr.final_ratio > 0.0 && lr.final_ratio <= 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "final_ratio must lie in (0, 1]");
  }
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "Adam betas must lie in [0, 1)");
  }
  if (!(eps > 0.0)) throw Error(ErrorKind::InvalidArgument, "Adam eps must be positive");
}

ParamVector pack(const GaussianParticle& p) {
  return {p.center[0],    p.center[1],    p.center[2],    p.rotation[0],  p.rotation[1],
          p.rotation[2],  p.rotation[3],  p.log_scale[0], p.log_scale[1], p.log_scale[2],
          p.amplitude[0], p.amplitude[1], p.amplitude[2], p.opacity_logit};
}

GaussianParticle unpack(const ParamVector& v) {
  GaussianParticle p;
  p.center = Vec3(v[0], v[1], v[2]);
  p.rotation = Vec4(v[3], v[4], v[5], v[6]);
  p.log_scale = Vec3(v[7], v[8], v[9]);
  p.amplitude = Color(v[10], v[11], v[12]);
  p.opacity_logit = v[13];
  return p;
}

ParamVector pack(const ParticleGrad& g) {
  return {g.center[0],    g.center[1],    g.center[2],    g.rotation[0],  g.rotation[1],
          g.rotation[2],  g.rotation[3],  g.log_scale[0], g.log_scale[1], g.log_scale[2],
          g.amplitude[0], g.amplitude[1], g.amplitude[2], g.opacity_logit};
}

AdamOptimizer::AdamOptimizer(const AdamConfig& cfg, double scene_extent, int total_steps)
    : cfg_(cfg), extent_(scene_extent), total_steps_(std::max(1, total_steps)) {
  cfg_.validate();
  if (!(scene_extent > 0.0)) throw Error(ErrorKind::InvalidArgument, "scene extent must be positive");
}

double AdamOptimizer::center_lr() const noexcept {
  const double t = std::min(1.0, static_cast<double>(step_) / total_steps_);
  return cfg_.lr.center * extent_ * std::pow(cfg_.lr.center_final_ratio, t);
}

void AdamOptimizer::step(std::vector<GaussianParticle>& particles, const std::vector<ParticleGrad>& grads) {
  if (grads.size() != particles.size()) {
    throw Error(ErrorKind::ShapeMismatch, "gradient count does not match particle count");
  }
  if (m_.size() != particles.size()) {
    m_.resize(particles.size(), ParamVector{});
    v_.resize(particles.size(), ParamVector{});
    age_.resize(particles.size(), 0);
  }
  const double center = center_lr();
  const double decay = std::pow(cfg_.lr.final_ratio, std::min(1.0, static_cast<double>(step_) / total_steps_));
  ++step_;
  ParamVector lr;
  for (int i = 0; i < 3; ++i) lr[i] = center;
  for (int i = 3; i < 7; ++i) lr[i] = cfg_.lr.rotation * decay;
  for (int i = 7; i < 10; ++i) lr[i] = cfg_.lr.log_scale * decay;
  for (int i = 10; i < 13; ++i) lr[i] = cfg_.lr.amplitude * decay;
  lr[13] = cfg_.lr.opacity * decay;

  for (std::size_t k = 0; k < particles.size(); ++k) {
    ParamVector p = pack(particles[k]);
    const ParamVector g = pack(grads[k]);
    auto& m = m_[k];
    auto& v = v_[k];
    const double age = static_cast<double>(++age_[k]);
    const double bc1 = 1.0 - std::pow(cfg_.beta1, age);
    const double bc2 = 1.0 - std::pow(cfg_.beta2, age);
    for (int i = 0; i < GaussianParticle::kParamCount; ++i) {
      m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g[i];
      v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g[i] * g[i];
      p[i] -= lr[i] * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + cfg_.eps);
    }
    GaussianParticle updated = unpack(p);
    const double qn = updated.rotation.norm();
    updated.rotation = qn > 0.0 ? Vec4(updated.rotation / qn) : Vec4(1.0, 0.0, 0.0, 0.0);
    particles[k] = updated;
  }
}

void AdamOptimizer::remap(const std::vector<int>& source) {
  std::vector<ParamVector> m(source.size(), ParamVector{}), v(source.size(), ParamVector{});
  std::vector<std::int64_t> age(source.size(), 0);
  for (std::size_t i = 0; i < source.size(); ++i) {
    const int s = source[i];
    if (s >= 0 && static_cast<std::size_t>(s) < m_.size()) {
      m[i] = m_[s];
      v[i] = v_[s];
      age[i] = age_[s];
    }
  }
  m_ = std::move(m);
  v_ = std::move(v);
  age_ = std::move(age);
}

}  // namespace gdgs
