#pragma once

#include <string>
#include <vector>

#include "gdgs/scene.hpp"
#include "gdgs/synthetic.hpp"
#include "gdgs/trainer.hpp"

namespace gdgs {

inline constexpr const char* kBenchFormat = "gdgs-bench-v1";

/// Published full-scale results, kept for context in reports. They are not
/// reproducible at the scale of the bundled synthetic scenes.
struct ReferenceRow {
  const char* dataset;
  double psnr_3dgs;
  double psnr_gdgs;
  double particles_3dgs;
  double particles_gdgs;
  int steps;
};
inline constexpr ReferenceRow kReferenceBanana{"banana", 41.7, 42.8, 357e3, 3e3, 10000};

struct InitConfig {
  /// Initial isotropic scale is the mean distance to this many nearest seed
  /// points, times scale_factor, clamped to [min_scale, max_scale].
  int neighbors = 3;
  double scale_factor = 1.0;
  double min_scale = 1e-3;
  double max_scale = 1.0;
  double opacity = 0.1;
};

/// Particles at the seed points. Gdgs particles start with zero Laplacian
/// amplitude; Classic particles take the seed colors. dc_model is the mean
/// color of the training images.
Scene initial_scene(const std::vector<Vec3>& points, const std::vector<Color>& colors, const Aabb& bounds,
                    RenderMode mode, const InitConfig& cfg, const Color& dc);

struct BenchConfig {
  TrainConfig gdgs;
  TrainConfig classic;
  InitConfig gdgs_init;
  InitConfig classic_init;
  double active_eps = 1e-4;
  bool run_gdgs = true;
  bool run_classic = true;
};

/// Settings used by the bundled benchmark for a given step budget.
BenchConfig default_bench_config(int steps);

struct BenchRow {
  std::string scene;
  std::string mode;
  int steps = 0;
  double heldout_psnr = 0.0;  // mean over held-out views, dB
  int particles = 0;
  /// Mean active-pixel fraction over held-out views of the splatted field:
  /// the Laplacian field for gdgs, the color pass for 3dgs.
  double active_fraction = 0.0;
  double train_seconds = 0.0;  // not written to CSV
};

struct BenchRun {
  BenchRow row;
  TrainResult training;
  std::vector<FieldImage> heldout_renders;
};

struct BenchResult {
  SyntheticDataset dataset;
  std::vector<BenchRun> runs;  // gdgs first, then 3dgs (when enabled)
};

/// Generates the dataset, trains each enabled mode on the non-held-out views
/// with the same step budget and evaluates on the held-out views only.
BenchResult run_benchmark(const SyntheticSceneSpec& spec, const BenchConfig& cfg);

/// Versioned CSV: a "# gdgs-bench-v1" line, a header, one row per run and the
/// published reference rows.
std::string bench_to_csv(const std::vector<BenchRow>& rows);

}  // namespace gdgs
