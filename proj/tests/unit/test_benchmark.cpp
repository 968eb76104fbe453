#include <gtest/gtest.h>

#include <sstream>

#include "gdgs/benchmark.hpp"
#include "gdgs/error.hpp"

using namespace gdgs;

namespace {

SyntheticSceneSpec tiny_spec() {
  SyntheticSceneSpec s = piecewise_constant_spec();
  s.width = s.height = 32;
  s.supersample = 1;
  s.seed_points = 150;
  return s;
}

}  // namespace

TEST(InitialScene, ScalesFromNeighborDistances) {
  const std::vector<Vec3> pts{Vec3(0, 0, 0), Vec3(0.1, 0, 0), Vec3(0, 0.2, 0)};
  const std::vector<Color> cols(3, Color(0.1, 0.2, 0.3));
  InitConfig cfg;
  cfg.neighbors = 1;
  const Scene g = initial_scene(pts, cols, Aabb{}, RenderMode::Gdgs, cfg, Color::Constant(0.5));
  ASSERT_EQ(g.particles.size(), 3u);
  EXPECT_NEAR(g.particles[0].scale()[0], 0.1, 1e-12);
  EXPECT_NEAR(g.particles[2].scale()[0], 0.2, 1e-12);
  EXPECT_EQ(g.particles[0].amplitude, Color::Zero());
  EXPECT_NEAR(g.particles[0].opacity(), cfg.opacity, 1e-12);
  EXPECT_EQ(g.dc_model, Color::Constant(0.5));
  const Scene c = initial_scene(pts, cols, Aabb{}, RenderMode::Classic, cfg, Color::Zero());
  EXPECT_EQ(c.particles[1].amplitude, cols[1]);
}

TEST(InitialScene, RejectsBadInput) {
  EXPECT_THROW(initial_scene({}, {}, Aabb{}, RenderMode::Gdgs, {}, Color::Zero()), Error);
  EXPECT_THROW(initial_scene({Vec3::Zero()}, {}, Aabb{}, RenderMode::Gdgs, {}, Color::Zero()), Error);
}

TEST(Benchmark, SmallRunIsDeterministicAndWellFormed) {
  BenchConfig cfg = default_bench_config(40);
  cfg.gdgs.densify.start_step = 20;
  cfg.classic.densify.start_step = 20;
  cfg.gdgs.densify.interval_steps = cfg.classic.densify.interval_steps = 20;
  const BenchResult a = run_benchmark(tiny_spec(), cfg);
  const BenchResult b = run_benchmark(tiny_spec(), cfg);
  ASSERT_EQ(a.runs.size(), 2u);
  EXPECT_EQ(a.runs[0].row.mode, "gdgs");
  EXPECT_EQ(a.runs[1].row.mode, "3dgs");
  for (std::size_t i = 0; i < 2; ++i) {
    const BenchRow& r = a.runs[i].row;
    EXPECT_EQ(r.scene, "blocks");
    EXPECT_EQ(r.steps, 40);
    EXPECT_GT(r.heldout_psnr, 5.0);
    EXPECT_GT(r.particles, 0);
    EXPECT_GE(r.active_fraction, 0.0);
    EXPECT_LE(r.active_fraction, 1.0);
    EXPECT_EQ(a.runs[i].heldout_renders.size(), tiny_spec().holdout.size());
    EXPECT_EQ(r.heldout_psnr, b.runs[i].row.heldout_psnr);
    EXPECT_EQ(r.particles, b.runs[i].row.particles);
  }
  std::vector<BenchRow> rows{a.runs[0].row, a.runs[1].row};
  std::vector<BenchRow> rows_b{b.runs[0].row, b.runs[1].row};
  EXPECT_EQ(bench_to_csv(rows), bench_to_csv(rows_b));
}

TEST(Benchmark, CsvIsVersionedAndCarriesReferenceRows) {
  BenchRow r;
  r.scene = "blocks";
  r.mode = "gdgs";
  r.steps = 100;
  r.heldout_psnr = 30.5;
  r.particles = 42;
  r.active_fraction = 0.25;
  const std::string csv = bench_to_csv({r});
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, std::string("# ") + kBenchFormat);
  std::getline(in, line);
  EXPECT_EQ(line, "scene,mode,steps,heldout_psnr_db,particles,active_fraction");
  std::getline(in, line);
  EXPECT_EQ(line.rfind("blocks,gdgs,100,30.5", 0), 0u) << line;
  EXPECT_NE(csv.find("banana"), std::string::npos);
  EXPECT_NE(csv.find("41.7"), std::string::npos);
  EXPECT_NE(csv.find("42.8"), std::string::npos);
}
