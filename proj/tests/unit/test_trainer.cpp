#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "gdgs/benchmark.hpp"
#include "gdgs/error.hpp"
#include "gdgs/parallel.hpp"
#include "gdgs/synthetic.hpp"
#include "gdgs/trainer.hpp"
#include "unit/test_util.hpp"

using namespace gdgs;

namespace {

GaussianParticle splat(const Vec3& c, double scale, const Color& amp, double opacity) {
  GaussianParticle p;
  p.center = c;
  p.log_scale = Vec3(std::log(scale), std::log(scale * 0.6), std::log(scale * 0.8));
  p.amplitude = amp;
  p.opacity_logit = logit(opacity);
  return p;
}

Scene one_splat_scene() {
  Scene s;
  s.bounds.min = Vec3(-2, -2, 2);
  s.bounds.max = Vec3(2, 2, 6);
  s.particles.push_back(splat(Vec3(0.1, -0.05, 4.0), 0.25, Color(0.8, 0.4, 0.2), 0.8));
  return s;
}

TrainConfig quiet_config(RenderMode mode, int steps) {
  TrainConfig cfg;
  cfg.mode = mode;
  cfg.steps = steps;
  cfg.densify_enabled = false;
  cfg.psnr_interval = 0;
  return cfg;
}

/// Small synthetic scene: 32x32 views of the piecewise-constant layout.
struct SmallBench {
  SyntheticDataset data;
  std::vector<TrainView> views;
  Scene init;
};

SmallBench small_bench(RenderMode mode) {
  SyntheticSceneSpec spec = piecewise_constant_spec();
  spec.width = spec.height = 32;
  spec.supersample = 2;
  spec.seed_points = 300;
  SmallBench b;
  b.data = generate(spec);
  for (std::size_t i = 0; i < b.data.cameras.size(); ++i) {
    if (std::find(spec.holdout.begin(), spec.holdout.end(), static_cast<int>(i)) != spec.holdout.end()) continue;
    b.views.push_back({b.data.cameras[i], b.data.images[i]});
  }
  InitConfig init;
  if (mode == RenderMode::Gdgs) init.opacity = 0.5;
  b.init = initial_scene(b.data.seed_points, b.data.seed_colors, b.data.bounds, mode, init, mean_color(b.views));
  return b;
}

}  // namespace

TEST(Train, ZeroStepsLeavesSceneUnchanged) {
  const Scene s = one_splat_scene();
  const Camera cam = testutil::identity_camera(24, 24, 24.0);
  std::vector<TrainView> views{{cam, FieldImage(24, 24, 3, 0.5)}};
  const TrainResult r = train(s, views, quiet_config(RenderMode::Classic, 0));
  ASSERT_EQ(r.scene.particles.size(), 1u);
  EXPECT_EQ(pack(r.scene.particles[0]), pack(s.particles[0]));
  EXPECT_TRUE(r.metrics.empty());
}

TEST(Train, RecoversOneSplatFromPerturbedInit) {
  for (RenderMode mode : {RenderMode::Classic, RenderMode::Gdgs}) {
    const Scene truth = one_splat_scene();
    const Camera cam = testutil::identity_camera(32, 32, 32.0);
    const FieldImage target0 = render(truth, cam, mode, {}, Color(0.3, 0.3, 0.3));
    std::vector<TrainView> views{{cam, target0}};

    Scene init = truth;
    init.particles[0].center += Vec3(0.05, 0.04, 0.0);
    init.particles[0].log_scale += Vec3::Constant(0.15);
    init.particles[0].amplitude *= 0.6;
    init.particles[0].opacity_logit -= 0.4;

    TrainConfig cfg = quiet_config(mode, 600);
    cfg.loss.lambda = 0.0;
    cfg.loss.beta = 0.0;
    cfg.adam.lr.amplitude = 5e-3;
    cfg.adam.lr.opacity = 1e-2;
    cfg.adam.lr.center = 1e-3;
    const TrainResult r = train(init, views, cfg);
    const FieldImage out = render(r.scene, cam, mode, {}, Color(0.3, 0.3, 0.3));
    EXPECT_GT(psnr(out, target0), 40.0) << to_string(mode);
  }
}

TEST(Train, IsDeterministicAcrossRunsAndThreadCounts) {
  SmallBench b = small_bench(RenderMode::Gdgs);
  TrainConfig cfg;
  cfg.steps = 60;
  cfg.psnr_interval = 10;
  cfg.densify.start_step = 20;
  cfg.densify.interval_steps = 20;
  cfg.seed = 3;
  const TrainResult a = train(b.init, b.views, cfg);
  const TrainResult c = train(b.init, b.views, cfg);
  set_thread_count(3);
  const TrainResult d = train(b.init, b.views, cfg);
  set_thread_count(1);
  EXPECT_EQ(metrics_to_csv(a.metrics), metrics_to_csv(c.metrics));
  EXPECT_EQ(metrics_to_csv(a.metrics), metrics_to_csv(d.metrics));
  ASSERT_EQ(a.scene.particles.size(), d.scene.particles.size());
  for (std::size_t k = 0; k < a.scene.particles.size(); ++k) {
    EXPECT_EQ(pack(a.scene.particles[k]), pack(d.scene.particles[k]));
  }
}

TEST(Train, SmoothedLossIsNonIncreasing) {
  const SyntheticSceneSpec spec = piecewise_constant_spec();
  const SyntheticDataset data = generate(spec);
  std::vector<TrainView> views;
  for (std::size_t i = 0; i < data.cameras.size(); ++i) {
    if (std::find(spec.holdout.begin(), spec.holdout.end(), static_cast<int>(i)) != spec.holdout.end()) continue;
    views.push_back({data.cameras[i], data.images[i]});
  }
  const BenchConfig bench = default_bench_config(600);
  TrainConfig cfg = bench.gdgs;
  cfg.psnr_interval = 0;
  const Scene init =
      initial_scene(data.seed_points, data.seed_colors, data.bounds, RenderMode::Gdgs, bench.gdgs_init, mean_color(views));
  const TrainResult r = train(init, views, cfg);
  const int window = 50;
  std::vector<double> smoothed;
  for (std::size_t end = window; end <= r.metrics.size(); end += window) {
    double s = 0.0;
    for (std::size_t i = end - window; i < end; ++i) s += r.metrics[i].loss;
    smoothed.push_back(s / window);
  }
  for (std::size_t i = 1; i < smoothed.size(); ++i) {
    EXPECT_LE(smoothed[i], smoothed[i - 1]) << "window ending at step " << (i + 1) * window;
  }
}

TEST(Train, DcModelIsMeanOfTrainingImages) {
  const Camera cam = testutil::identity_camera(16, 16, 16.0);
  std::vector<TrainView> views{{cam, FieldImage(16, 16, 3, 0.2)}, {cam, FieldImage(16, 16, 3, 0.6)}};
  const TrainResult r = train(one_splat_scene(), views, quiet_config(RenderMode::Gdgs, 2));
  EXPECT_TRUE(r.scene.dc_model.isApprox(Color::Constant(0.4), 1e-12));
}

TEST(Train, WarnsWhenDensificationIsCapped) {
  SmallBench b = small_bench(RenderMode::Classic);
  TrainConfig cfg;
  cfg.mode = RenderMode::Classic;
  cfg.steps = 40;
  cfg.densify.start_step = 10;
  cfg.densify.interval_steps = 10;
  cfg.densify.grad_threshold = 0.0;
  cfg.densify.max_particles = static_cast<int>(b.init.particles.size()) + 1;
  const TrainResult r = train(b.init, b.views, cfg);
  ASSERT_EQ(r.warnings.size(), 1u);
  EXPECT_EQ(r.warnings[0].rfind("event=densify_suspended", 0), 0u);
  EXPECT_LE(r.scene.particles.size(), b.init.particles.size() + 1);
}

TEST(Train, RejectsBadInputs) {
  const Camera cam = testutil::identity_camera(16, 16, 16.0);
  EXPECT_THROW(train(one_splat_scene(), std::vector<TrainView>{}, {}), Error);
  std::vector<TrainView> wrong{{cam, FieldImage(8, 16, 3)}};
  EXPECT_THROW(train(one_splat_scene(), wrong, {}), Error);
  TrainConfig cfg;
  cfg.steps = -1;
  std::vector<TrainView> ok{{cam, FieldImage(16, 16, 3)}};
  EXPECT_THROW(train(one_splat_scene(), ok, cfg), Error);
}

TEST(MetricsCsv, HeaderAndEmptyPsnr) {
  std::vector<MetricsRow> rows{{1, 0.5, std::nan(""), 3}, {2, 0.25, 31.5, 4}};
  EXPECT_EQ(metrics_to_csv(rows), "step,loss,psnr,particle_count\n1,0.5,,3\n2,0.25,31.5,4\n");
}
