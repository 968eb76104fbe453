#include "gdgs/benchmark.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "gdgs/error.hpp"
#include "gdgs/image_loss.hpp"
#include "gdgs/rasterizer.hpp"

namespace gdgs {

Scene initial_scene(const std::vector<Vec3>& points, const std::vector<Color>& colors, const Aabb& bounds,
                    RenderMode mode, const InitConfig& cfg, const Color& dc) {
  if (points.empty()) throw Error(ErrorKind::InvalidArgument, "initialization needs at least one seed point");
  if (colors.size() != points.size()) throw Error(ErrorKind::ShapeMismatch, "seed colors and points differ in count");
  if (!(cfg.opacity > 0.0 && cfg.opacity < 1.0)) throw Error(ErrorKind::InvalidArgument, "initial opacity must lie in (0, 1)");
  Scene scene;
  scene.bounds = bounds;
  scene.dc_model = dc;
  const std::size_t n = points.size();
  const int nn = std::max(1, std::min<int>(cfg.neighbors, static_cast<int>(n) - 1));
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) {
    double scale = cfg.max_scale;
    if (n > 1) {
      for (std::size_t j = 0; j < n; ++j) d2[j] = (points[j] - points[i]).squaredNorm();
      d2[i] = std::numeric_limits<double>::infinity();
      std::partial_sort(d2.begin(), d2.begin() + nn, d2.end());
      double sum = 0.0;
      for (int k = 0; k < nn; ++k) sum += std::sqrt(d2[k]);
      scale = cfg.scale_factor * sum / nn;
    }
    scale = std::clamp(scale, cfg.min_scale, cfg.max_scale);
    GaussianParticle p;
    p.center = points[i];
    p.log_scale = Vec3::Constant(std::log(scale));
    p.opacity_logit = logit(cfg.opacity);
    p.amplitude = mode == RenderMode::Gdgs ? Color::Zero() : colors[i];
    scene.particles.push_back(p);
  }
  return scene;
}

BenchConfig default_bench_config(int steps) {
  BenchConfig cfg;
  for (TrainConfig* t : {&cfg.gdgs, &cfg.classic}) {
    t->steps = steps;
    t->seed = 1;
    t->psnr_interval = 100;
    t->densify.interval_steps = 100;
    t->densify.start_step = 200;
    t->densify.stop_step = steps / 2;
    t->adam.lr.final_ratio = 0.1;
  }
  cfg.gdgs.mode = RenderMode::Gdgs;
  cfg.classic.mode = RenderMode::Classic;
  cfg.classic.loss.beta = 0.0;
  cfg.classic.densify.grad_threshold = 1e-4;
  cfg.gdgs.loss.beta = 1.0;
  cfg.gdgs.densify.grad_threshold = 2e-5;
  cfg.gdgs.densify.preserve_coverage = true;
  cfg.gdgs.densify.amplitude_prune_eps = 0.01;
  cfg.gdgs_init.opacity = 0.5;
  return cfg;
}

namespace {

BenchRun run_mode(const SyntheticSceneSpec& spec, const SyntheticDataset& data, const std::vector<TrainView>& train_views,
                  const std::vector<int>& heldout, const TrainConfig& tcfg, const InitConfig& icfg, double active_eps) {
  const Color dc = mean_color(train_views);
  Scene init = initial_scene(data.seed_points, data.seed_colors, data.bounds, tcfg.mode, icfg, dc);
  BenchRun run;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    run.training = train(std::move(init), train_views, tcfg);
  } catch (const Error& e) {
    throw Error(e.kind(), std::string("benchmark (") + to_string(tcfg.mode) + " mode): " + e.what());
  }
  const auto t1 = std::chrono::steady_clock::now();
  const Scene& scene = run.training.scene;

  double psnr_sum = 0.0, active_sum = 0.0;
  for (int h : heldout) {
    const Camera& cam = data.cameras[h];
    FieldImage img = render(scene, cam, tcfg.mode, tcfg.render);
    psnr_sum += psnr(img, data.images[h]);
    const FieldImage field = tcfg.mode == RenderMode::Gdgs ? render_laplacian(scene, cam, tcfg.render) : img;
    active_sum += active_pixel_set(field, active_eps).fraction;
    run.heldout_renders.push_back(std::move(img));
  }
  run.row.scene = spec.name;
  run.row.mode = to_string(tcfg.mode);
  run.row.steps = tcfg.steps;
  run.row.heldout_psnr = psnr_sum / static_cast<double>(heldout.size());
  run.row.particles = static_cast<int>(scene.particles.size());
  run.row.active_fraction = active_sum / static_cast<double>(heldout.size());
  run.row.train_seconds = std::chrono::duration<double>(t1 - t0).count();
  return run;
}

}  // namespace

BenchResult run_benchmark(const SyntheticSceneSpec& spec, const BenchConfig& cfg) {
  spec.validate();
  if (spec.holdout.size() < 2) throw Error(ErrorKind::Spec, "benchmark needs at least two held-out views");
  BenchResult result;
  result.dataset = generate(spec);
  const auto& data = result.dataset;

  // Training views are copied out so the held-out images are never reachable
  // from the training loop.
  std::vector<TrainView> train_views;
  for (int i = 0; i < static_cast<int>(data.cameras.size()); ++i) {
    if (std::find(spec.holdout.begin(), spec.holdout.end(), i) != spec.holdout.end()) continue;
    train_views.push_back({data.cameras[i], data.images[i]});
  }
  if (cfg.run_gdgs) {
    result.runs.push_back(run_mode(spec, data, train_views, spec.holdout, cfg.gdgs, cfg.gdgs_init, cfg.active_eps));
  }
  if (cfg.run_classic) {
    result.runs.push_back(
        run_mode(spec, data, train_views, spec.holdout, cfg.classic, cfg.classic_init, cfg.active_eps));
  }
  return result;
}

std::string bench_to_csv(const std::vector<BenchRow>& rows) {
  std::ostringstream os;
  os.precision(10);
  os << "# " << kBenchFormat << "\n";
  os << "scene,mode,steps,heldout_psnr_db,particles,active_fraction\n";
  for (const auto& r : rows) {
    os << r.scene << ',' << r.mode << ',' << r.steps << ',' << r.heldout_psnr << ',' << r.particles << ','
       << r.active_fraction << '\n';
  }
  const auto& ref = kReferenceBanana;
  os << ref.dataset << "-reference,3dgs," << ref.steps << ',' << ref.psnr_3dgs << ',' << ref.particles_3dgs << ",\n";
  os << ref.dataset << "-reference,gdgs," << ref.steps << ',' << ref.psnr_gdgs << ',' << ref.particles_gdgs << ",\n";
  return os.str();
}

}  // namespace gdgs
