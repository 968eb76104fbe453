#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include "gdgs/image_loss.hpp"
#include "gdgs/renderer.hpp"

namespace {

struct Fixture {
  gdgs::Scene scene;
  gdgs::Camera camera;
  gdgs::FieldImage target;
};

// Particles scattered in front of a camera at the origin looking down +z.
Fixture make_fixture(int particles, int size) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  Fixture f;
  f.camera.width = f.camera.height = size;
  f.camera.fx = f.camera.fy = size;
  f.camera.cx = f.camera.cy = 0.5 * (size - 1);
  f.scene.bounds = {gdgs::Vec3(-2, -2, 1), gdgs::Vec3(2, 2, 6)};
  for (int i = 0; i < particles; ++i) {
    gdgs::GaussianParticle p;
    p.center = gdgs::Vec3(0.4 * uni(rng), 0.4 * uni(rng), 3.0 + uni(rng));
    p.rotation = gdgs::Vec4(1.0, 0.3 * uni(rng), 0.3 * uni(rng), 0.3 * uni(rng)).normalized();
    p.log_scale = gdgs::Vec3::Constant(std::log(0.02)) + 0.5 * gdgs::Vec3(uni(rng), uni(rng), uni(rng));
    p.amplitude = gdgs::Color(uni(rng), uni(rng), uni(rng));
    p.opacity_logit = uni(rng);
    f.scene.particles.push_back(p);
  }
  f.target = gdgs::FieldImage(size, size, 3, 0.5);
  return f;
}

void BM_RenderClassic(benchmark::State& state) {
  const auto f = make_fixture(static_cast<int>(state.range(0)), 128);
  for (auto _ : state) benchmark::DoNotOptimize(gdgs::render_3dgs(f.scene, f.camera));
}
BENCHMARK(BM_RenderClassic)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_RenderGdgs(benchmark::State& state) {
  const auto f = make_fixture(static_cast<int>(state.range(0)), 128);
  for (auto _ : state) benchmark::DoNotOptimize(gdgs::render_gdgs(f.scene, f.camera));
}
BENCHMARK(BM_RenderGdgs)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);

void BM_BackwardGdgs(benchmark::State& state) {
  const auto f = make_fixture(static_cast<int>(state.range(0)), 128);
  const gdgs::LossConfig loss;
  for (auto _ : state) {
    benchmark::DoNotOptimize(gdgs::render_backward(f.scene, f.camera, f.target, gdgs::RenderMode::Gdgs, loss));
  }
}
BENCHMARK(BM_BackwardGdgs)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_Ssim(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  gdgs::FieldImage a(n, n, 3, 0.4), b(n, n, 3, 0.6);
  gdgs::FieldImage grad;
  for (auto _ : state) benchmark::DoNotOptimize(gdgs::ssim(a, b, {}, &grad));
}
BENCHMARK(BM_Ssim)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

}  // namespace
