#include "gdgs/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "gdgs/error.hpp"
#include "gdgs/optimizer.hpp"

namespace gdgs {

RenderOptions gradcheck_render_options() {
  RenderOptions opts;
  opts.raster.projection.truncation_sigma = 6.0;
  opts.solver.kind = SolverKind::Spectral;
  return opts;
}

GradcheckCase make_gradcheck_case(std::uint64_t seed, int image_size, int particles, RenderMode mode,
                                  const RenderOptions& opts) {
  if (image_size < 8 || particles < 1) throw Error(ErrorKind::InvalidArgument, "gradcheck case is too small");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * u01(rng); };
  std::normal_distribution<double> normal(0.0, 1.0);

  GradcheckCase gc;
  gc.camera.width = gc.camera.height = image_size;
  gc.camera.fx = gc.camera.fy = 1.25 * image_size;
  gc.camera.cx = gc.camera.cy = 0.5 * (image_size - 1);
  gc.scene.bounds.min = Vec3(-2.0, -2.0, 1.0);
  gc.scene.bounds.max = Vec3(2.0, 2.0, 6.0);

  for (int k = 0; k < particles; ++k) {
    GaussianParticle p;
    p.center = Vec3(uniform(-0.3, 0.3), uniform(-0.3, 0.3), uniform(3.0, 4.0));
    p.rotation = Vec4(normal(rng), normal(rng), normal(rng), normal(rng)).normalized();
    p.log_scale = Vec3(std::log(uniform(0.08, 0.25)), std::log(uniform(0.08, 0.25)), std::log(uniform(0.08, 0.25)));
    if (mode == RenderMode::Gdgs) {
      p.amplitude = Color(uniform(-1.0, 1.0), uniform(-1.0, 1.0), uniform(-1.0, 1.0));
    } else {
      p.amplitude = Color(uniform(0.1, 0.9), uniform(0.1, 0.9), uniform(0.1, 0.9));
    }
    p.opacity_logit = logit(uniform(0.25, 0.6));
    gc.scene.particles.push_back(p);
  }
  gc.dc = Color(uniform(0.3, 0.7), uniform(0.3, 0.7), uniform(0.3, 0.7));
  gc.scene.dc_model = gc.dc;

  // Target = render + checkerboard offset of magnitude 0.1..0.2, so the L1
  // residuals and their neighbor differences stay far from zero.
  gc.target = render(gc.scene, gc.camera, mode, opts, gc.dc);
  for (int y = 0; y < image_size; ++y) {
    for (int x = 0; x < image_size; ++x) {
      const double sgn = ((x + y) % 2 == 0) ? 1.0 : -1.0;
      for (int c = 0; c < kColorChannels; ++c) gc.target.at(y, x, c) += sgn * uniform(0.1, 0.2);
    }
  }
  return gc;
}

GradcheckReport run_gradcheck(const GradcheckConfig& cfg) {
  if (!(cfg.step > 0.0) || !(cfg.tolerance > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "gradcheck step and tolerance must be positive");
  }
  const RenderOptions opts = gradcheck_render_options();
  GradcheckReport report;
  for (const char* name : kParamGroups) report.groups.push_back({name, 0.0, 0});

  auto group_of = [](int param) {
    if (param < 3) return 0;
    if (param < 7) return 1;
    if (param < 10) return 2;
    if (param < 13) return 3;
    return 4;
  };

  std::uint64_t case_seed = cfg.seed;
  for (const auto& [lambda, beta] : cfg.loss_weights) {
    LossConfig loss;
    loss.lambda = lambda;
    loss.beta = beta;
    const GradcheckCase gc = make_gradcheck_case(case_seed++, cfg.image_size, cfg.particles, cfg.mode, opts);
    const BackwardResult bw = render_backward(gc.scene, gc.camera, gc.target, cfg.mode, loss, opts, gc.dc);

    for (std::size_t k = 0; k < gc.scene.particles.size(); ++k) {
      const ParamVector analytic = pack(bw.grads[k]);
      const ParamVector base = pack(gc.scene.particles[k]);
      for (int i = 0; i < GaussianParticle::kParamCount; ++i) {
        Scene probe = gc.scene;
        ParamVector v = base;
        v[i] = base[i] + cfg.step;
        probe.particles[k] = unpack(v);
        const double up = render_loss(probe, gc.camera, gc.target, cfg.mode, loss, opts, gc.dc);
        v[i] = base[i] - cfg.step;
        probe.particles[k] = unpack(v);
        const double down = render_loss(probe, gc.camera, gc.target, cfg.mode, loss, opts, gc.dc);
        const double numeric = (up - down) / (2.0 * cfg.step);
        const double scale = std::max(std::abs(analytic[i]), std::abs(numeric));
        if (scale <= cfg.min_magnitude) continue;
        const double rel = std::abs(analytic[i] - numeric) / scale;
        auto& g = report.groups[group_of(i)];
        g.max_rel_error = std::max(g.max_rel_error, rel);
        ++g.checked;
      }
    }
  }
  for (const auto& g : report.groups) {
    if (g.max_rel_error >= cfg.tolerance || g.checked == 0) report.passed = false;
  }
  return report;
}

}  // namespace gdgs
