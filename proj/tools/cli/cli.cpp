#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iomanip>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "gdgs/benchmark.hpp"
#include "gdgs/error.hpp"
#include "gdgs/gradcheck.hpp"
#include "gdgs/image_io.hpp"
#include "gdgs/parallel.hpp"
#include "gdgs/poisson.hpp"
#include "gdgs/renderer.hpp"
#include "gdgs/scene_io.hpp"
#include "gdgs/sparsity.hpp"
#include "gdgs/synthetic.hpp"
#include "gdgs/trainer.hpp"

namespace gdgs::cli {
namespace {

namespace fs = std::filesystem;

/// Thrown for settings rejected by the CLI itself before any module runs.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(10) << v;
  return os.str();
}

std::vector<double> parse_doubles(const std::string& text, const std::string& flag) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size() || !std::isfinite(v)) {
      throw ConfigError("--" + flag + ": '" + item + "' is not a finite number");
    }
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError("--" + flag + " needs at least one value");
  return out;
}

std::string view_name(int i) {
  std::ostringstream os;
  os << "view_" << std::setw(3) << std::setfill('0') << i << ".png";
  return os.str();
}

struct Common {
  int threads = 0;
  bool print_config = false;
  std::string config;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--threads", c.threads, "Worker threads (0 uses every hardware thread)")
      ->envname("GDGS_THREADS")
      ->check(CLI::NonNegativeNumber);
  sub->add_option("--config", c.config, "Flat key=value file; command-line flags take precedence");
  sub->add_flag("--print-config", c.print_config,
                "Print the merged settings as a config file and exit without running");
}

void apply_threads(const Common& c) {
  int n = c.threads;
  if (n == 0) n = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  set_thread_count(n);
}

bool is_internal_option(const CLI::Option* opt) {
  const auto& names = opt->get_lnames();
  if (names.empty()) return true;
  return names[0] == "help" || names[0] == "config" || names[0] == "print-config";
}

std::string render_config(const CLI::App* sub) {
  std::ostringstream os;
  for (const CLI::Option* opt : sub->get_options()) {
    if (is_internal_option(opt)) continue;
    const std::string& key = opt->get_lnames()[0];
    if (opt->get_expected_min() == 0) {
      os << key << '=' << (opt->as<bool>() ? "true" : "false") << '\n';
      continue;
    }
    std::string value;
    if (opt->count() > 0) {
      value = opt->results().back();
    } else {
      value = opt->get_default_str();
      if (value.empty()) continue;
    }
    os << key << '=' << value << '\n';
  }
  return os.str();
}

/// key=value lines; blank lines and lines starting with '#' are skipped.
std::vector<std::pair<std::string, std::string>> read_config_file(const std::string& path) {
  const std::string text = read_text_file(path);
  std::vector<std::pair<std::string, std::string>> out;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string();
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  };
  while (std::getline(is, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw Error(ErrorKind::Parse, path + ":" + std::to_string(lineno) + ": expected key=value");
    }
    out.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return out;
}

/// Returns the value of --config in args, if present.
std::string find_config_path(const std::vector<std::string>& args) {
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) return args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) return args[i].substr(9);
  }
  return {};
}

// ---------------------------------------------------------------------------

struct InitArgs {
  std::string spec, out, mode = "gdgs";
  std::uint64_t seed = 0;
  bool seed_given = false;
  double opacity = 0.0, scale_factor = 1.0;
};

int cmd_init(const InitArgs& a, std::ostream& out) {
  SyntheticSceneSpec spec = load_synth_spec(a.spec);
  if (a.seed_given) spec.seed = a.seed;
  spec.validate();
  const RenderMode mode = render_mode_from_string(a.mode);
  const BenchConfig defaults = default_bench_config(1000);
  InitConfig icfg = mode == RenderMode::Gdgs ? defaults.gdgs_init : defaults.classic_init;
  if (a.opacity > 0.0) icfg.opacity = a.opacity;
  icfg.scale_factor = a.scale_factor;

  const SyntheticDataset data = generate(spec);
  std::vector<TrainView> train_views;
  std::vector<CameraEntry> train_cams, heldout_cams;
  for (int i = 0; i < static_cast<int>(data.cameras.size()); ++i) {
    const bool held = std::find(spec.holdout.begin(), spec.holdout.end(), i) != spec.holdout.end();
    (held ? heldout_cams : train_cams).push_back({data.cameras[i], view_name(i)});
    if (!held) train_views.push_back({data.cameras[i], data.images[i]});
  }
  const Scene scene = initial_scene(data.seed_points, data.seed_colors, data.bounds, mode, icfg,
                                    train_views.empty() ? Color::Zero() : mean_color(train_views));

  const fs::path dir(a.out);
  fs::create_directories(dir / "images");
  for (std::size_t i = 0; i < data.images.size(); ++i) write_png(dir / "images" / view_name(static_cast<int>(i)), data.images[i]);
  save_cameras(dir / "cameras.txt", train_cams);
  save_cameras(dir / "heldout_cameras.txt", heldout_cams);
  save_scene(dir / "scene.txt", scene);
  out << "event=init scene=" << spec.name << " mode=" << a.mode << " particles=" << scene.particles.size()
      << " train_views=" << train_cams.size() << " heldout_views=" << heldout_cams.size() << " out=" << dir.string()
      << '\n';
  return kOk;
}

struct TrainArgs {
  std::string scene, cameras, images_dir, out, mode = "gdgs";
  int steps = 1000;
  double lambda = 0.2, beta = 1.0;
  std::uint64_t seed = 1;
  int checkpoint_every = 0;
  int log_every = 100;
  bool no_densify = false;
};

int cmd_train(const TrainArgs& a, std::ostream& out) {
  const RenderMode mode = render_mode_from_string(a.mode);
  const BenchConfig defaults = default_bench_config(a.steps);
  TrainConfig cfg = mode == RenderMode::Gdgs ? defaults.gdgs : defaults.classic;
  cfg.mode = mode;
  cfg.steps = a.steps;
  cfg.loss.lambda = a.lambda;
  cfg.loss.beta = mode == RenderMode::Gdgs ? a.beta : 0.0;
  cfg.seed = a.seed;
  cfg.densify_enabled = !a.no_densify;
  cfg.checkpoint_interval = a.checkpoint_every;
  cfg.validate();

  Scene scene = load_scene(a.scene);
  const auto entries = load_cameras(a.cameras);
  std::vector<TrainView> views;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (!entries[i].image) {
      throw Error(ErrorKind::InvalidArgument, "camera " + std::to_string(i) + " has no image file");
    }
    TrainView v{entries[i].camera, read_png(fs::path(a.images_dir) / *entries[i].image)};
    if (v.image.width() != v.camera.width || v.image.height() != v.camera.height) {
      throw Error(ErrorKind::ShapeMismatch, "image " + *entries[i].image + " does not match its camera size");
    }
    views.push_back(std::move(v));
  }

  const fs::path dir(a.out);
  fs::create_directories(dir);
  if (a.checkpoint_every > 0) {
    fs::create_directories(dir / "checkpoints");
    cfg.checkpoint = [&dir](int step, const Scene& s) {
      std::ostringstream name;
      name << "scene_step_" << std::setw(6) << std::setfill('0') << step << ".txt";
      save_scene(dir / "checkpoints" / name.str(), s);
    };
  }

  const TrainResult result = train(std::move(scene), views, cfg);
  for (const auto& row : result.metrics) {
    if (a.log_every <= 0 || row.step % a.log_every != 0) continue;
    out << "event=train step=" << row.step << " loss=" << fmt(row.loss)
        << " psnr=" << (std::isnan(row.psnr) ? std::string("nan") : fmt(row.psnr))
        << " particles=" << row.particle_count << '\n';
  }
  for (const auto& w : result.warnings) out << "event=warning message=\"" << w << "\"\n";
  write_file_atomic(dir / "metrics.csv", metrics_to_csv(result.metrics));
  save_scene(dir / "scene.txt", result.scene);
  out << "event=train_done steps=" << a.steps << " particles=" << result.scene.particles.size()
      << " final_loss=" << (result.metrics.empty() ? std::string("nan") : fmt(result.metrics.back().loss)) << '\n';
  return kOk;
}

SolverKind solver_from_string(const std::string& name) {
  return name == "spectral" ? SolverKind::Spectral : SolverKind::Multigrid;
}

struct RenderArgs {
  std::string scene, cameras, out, mode = "gdgs", solver = "multigrid";
  int view = 0;
};

int cmd_render(const RenderArgs& a, std::ostream& out) {
  const Scene scene = load_scene(a.scene);
  const auto entries = load_cameras(a.cameras);
  if (a.view < 0 || a.view >= static_cast<int>(entries.size())) {
    throw Error(ErrorKind::InvalidArgument,
                "--view " + std::to_string(a.view) + " is out of range (" + std::to_string(entries.size()) + " cameras)");
  }
  const Camera& cam = entries[a.view].camera;
  RenderOptions opts;
  opts.solver.kind = solver_from_string(a.solver);

  FieldImage img;
  PreviewMapping mapping = PreviewMapping::unit_range();
  std::string extra;
  if (a.mode == "laplacian") {
    img = render_laplacian(scene, cam, opts);
    mapping = PreviewMapping::signed_field();
    extra = " active_fraction=" + fmt(active_pixel_set(img, 1e-4).fraction);
  } else {
    img = render(scene, cam, render_mode_from_string(a.mode), opts);
  }
  const fs::path prefix(a.out);
  if (prefix.has_parent_path()) fs::create_directories(prefix.parent_path());
  fs::path png = prefix, pfm = prefix;
  png += ".png";
  pfm += ".pfm";
  write_pfm(pfm, img);
  write_png(png, img, mapping);
  out << "event=render view=" << a.view << " mode=" << a.mode << " width=" << img.width()
      << " height=" << img.height() << extra << " png=" << png.string() << " pfm=" << pfm.string() << '\n';
  return kOk;
}

struct SolveArgs {
  std::string input, out, solver = "multigrid", dc = "0";
  double tol = 1e-8;
  int max_cycles = 50;
};

int cmd_solve(const SolveArgs& a, std::ostream& out) {
  MultigridOptions mg;
  mg.tol = a.tol;
  mg.max_cycles = a.max_cycles;
  const std::vector<double> dc = parse_doubles(a.dc, "dc");
  const std::string ext = fs::path(a.out).extension().string();
  if (ext != ".pfm" && ext != ".png") throw ConfigError("--out must end in .pfm or .png");

  PoissonProblem problem;
  problem.rhs = read_pfm(a.input);
  const int channels = problem.rhs.channels();
  if (dc.size() != 1 && static_cast<int>(dc.size()) != channels) {
    throw ConfigError("--dc needs 1 or " + std::to_string(channels) + " values");
  }
  problem.dc_value = dc.size() == 1 ? std::vector<double>(channels, dc[0]) : dc;

  SolverOptions opts;
  opts.kind = solver_from_string(a.solver);
  opts.multigrid = mg;
  SolveReport report;
  const FieldImage c = solve_poisson(problem, opts, &report);

  if (fs::path(a.out).has_parent_path()) fs::create_directories(fs::path(a.out).parent_path());
  if (ext == ".pfm") {
    write_pfm(a.out, c);
  } else {
    write_png(a.out, c);
  }
  out << "event=solve solver=" << a.solver << " width=" << c.width() << " height=" << c.height()
      << " cycles=" << report.cycles << " residual_inf=" << fmt(report.residual_inf)
      << " relative_residual=" << (report.residual_history.empty() ? std::string("0") : fmt(report.residual_history.back()))
      << " rhs_mean_removed=" << fmt(report.rhs_mean_removed) << '\n';
  return kOk;
}

struct SparsityArgs {
  std::string input, out, thresholds = "0,0.001,0.002,0.003,0.004,0.005";
  bool mle = false;
};

int cmd_sparsity(const SparsityArgs& a, std::ostream& out) {
  const std::vector<double> ts = parse_doubles(a.thresholds, "thresholds");
  for (double t : ts) {
    if (t < 0.0) throw ConfigError("--thresholds must be non-negative");
  }
  std::vector<fs::path> files;
  if (fs::is_directory(a.input)) {
    for (const auto& e : fs::directory_iterator(a.input)) {
      std::string ext = e.path().extension().string();
      std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char ch) { return std::tolower(ch); });
      if (e.is_regular_file() && ext == ".png") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw Error(ErrorKind::Io, "no .png files in " + a.input);
  } else {
    files.push_back(a.input);
  }

  std::ostringstream csv;
  csv << std::setprecision(10);
  csv << "file,channel,gamma_intensity,gamma_laplacian,t,nonzero_fraction,mse\n";
  for (const auto& file : files) {
    const FieldImage im = read_png(file);
    FieldImage im255 = im;
    for (double& v : im255.data()) v *= 255.0;
    const DomainComparison cmp = compare_domains(im255, a.mle);
    const auto sweep = sparsity_sweep(im, ts);
    const std::string name = file.filename().string();
    for (const auto& w : cmp.warnings) out << "event=warning file=" << name << " message=\"" << w << "\"\n";
    for (int ch = 0; ch < im.channels(); ++ch) {
      const double gi = cmp.intensity[ch].gamma, gl = cmp.laplacian[ch].gamma;
      out << "event=sparsity file=" << name << " channel=" << ch << " gamma_intensity=" << fmt(gi)
          << " gamma_laplacian=" << fmt(gl) << '\n';
      for (const auto& r : sweep) {
        if (r.channel != ch) continue;
        csv << name << ',' << ch << ',' << gi << ',' << gl << ',' << r.t << ',' << r.nonzero_fraction << ','
            << r.mse << '\n';
      }
    }
  }
  if (fs::path(a.out).has_parent_path()) fs::create_directories(fs::path(a.out).parent_path());
  write_file_atomic(a.out, csv.str());
  out << "event=sparsity_done files=" << files.size() << " thresholds=" << ts.size() << " out=" << a.out << '\n';
  return kOk;
}

struct GradcheckArgs {
  std::uint64_t seed = 7;
  std::string mode = "gdgs";
  double tolerance = 1e-3;
  int particles = 3, size = 32;
};

int cmd_gradcheck(const GradcheckArgs& a, std::ostream& out) {
  GradcheckConfig cfg;
  cfg.seed = a.seed;
  cfg.mode = render_mode_from_string(a.mode);
  cfg.tolerance = a.tolerance;
  cfg.particles = a.particles;
  cfg.image_size = a.size;
  const GradcheckReport report = run_gradcheck(cfg);
  for (const auto& g : report.groups) {
    out << "event=gradcheck group=" << g.name << " max_rel_error=" << fmt(g.max_rel_error)
        << " checked=" << g.checked << " ok=" << (g.max_rel_error <= cfg.tolerance ? "true" : "false") << '\n';
  }
  out << "event=gradcheck_done passed=" << (report.passed ? "true" : "false") << '\n';
  return report.passed ? kOk : kCheckFailed;
}

struct BenchArgs {
  std::string spec, out, modes = "gdgs,3dgs";
  int steps = 2000;
  std::uint64_t seed = 1;
};

int cmd_bench(const BenchArgs& a, std::ostream& out) {
  const SyntheticSceneSpec spec = load_synth_spec(a.spec);
  BenchConfig cfg = default_bench_config(a.steps);
  cfg.gdgs.seed = cfg.classic.seed = a.seed;
  cfg.run_gdgs = cfg.run_classic = false;
  std::stringstream ss(a.modes);
  std::string m;
  while (std::getline(ss, m, ',')) {
    const RenderMode mode = render_mode_from_string(m);
    (mode == RenderMode::Gdgs ? cfg.run_gdgs : cfg.run_classic) = true;
  }
  cfg.gdgs.validate();
  cfg.classic.validate();

  const BenchResult result = run_benchmark(spec, cfg);
  const fs::path dir(a.out);
  fs::create_directories(dir / "images");
  fs::create_directories(dir / "renders");
  std::vector<CameraEntry> cams;
  for (std::size_t i = 0; i < result.dataset.cameras.size(); ++i) {
    const std::string name = view_name(static_cast<int>(i));
    write_png(dir / "images" / name, result.dataset.images[i]);
    cams.push_back({result.dataset.cameras[i], name});
  }
  save_cameras(dir / "cameras.txt", cams);
  std::vector<BenchRow> rows;
  for (const auto& run : result.runs) {
    rows.push_back(run.row);
    for (std::size_t k = 0; k < run.heldout_renders.size(); ++k) {
      write_png(dir / "renders" / (run.row.mode + "_" + view_name(spec.holdout[k])), run.heldout_renders[k]);
    }
    save_scene(dir / ("scene_" + run.row.mode + ".txt"), run.training.scene);
    out << "event=bench scene=" << run.row.scene << " mode=" << run.row.mode << " steps=" << run.row.steps
        << " heldout_psnr=" << fmt(run.row.heldout_psnr) << " particles=" << run.row.particles
        << " active_fraction=" << fmt(run.row.active_fraction) << " seconds=" << fmt(run.row.train_seconds) << '\n';
  }
  write_file_atomic(dir / "results.csv", bench_to_csv(rows));
  return kOk;
}

// ---------------------------------------------------------------------------

std::string quote(const std::string& s) {
  std::string q;
  for (char ch : s) {
    if (ch == '"' || ch == '\\') q += '\\';
    q += ch == '\n' ? ' ' : ch;
  }
  return '"' + q + '"';
}

void print_error(std::ostream& err, const std::string& category, const std::string& message) {
  err << "error category=" << category << " message=" << quote(message) << '\n';
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Io: return kIo;
    case ErrorKind::Parse: return kParse;
    case ErrorKind::NonConvergence:
    case ErrorKind::NumericalDegeneracy: return kNumerical;
    case ErrorKind::ContractViolation: return kInternal;
    case ErrorKind::InvalidArgument:
    case ErrorKind::InvalidParticle:
    case ErrorKind::ShapeMismatch:
    case ErrorKind::Spec: return kInvalidConfig;
  }
  return kInternal;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Gradient-domain Gaussian splatting toolkit", "gdgs"};
  app.require_subcommand(1, 1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast)->always_capture_default();

  const std::vector<std::string> modes{"gdgs", "3dgs"};
  const std::vector<std::string> solvers{"spectral", "multigrid"};

  Common common;

  InitArgs init;
  auto* s_init = app.add_subcommand("init", "Render a synthetic scene spec and write training data plus an initial scene");
  s_init->add_option("--spec", init.spec, "Synthetic scene spec (JSON)")->required();
  s_init->add_option("--out", init.out, "Output directory")->required();
  s_init->add_option("--mode", init.mode, "Particle parameterization")->check(CLI::IsMember(modes));
  auto* init_seed = s_init->add_option("--seed", init.seed, "Overrides the seed stored in the scene spec");
  s_init->add_option("--opacity", init.opacity, "Initial opacity in (0, 1); 0 keeps the mode default")
      ->check(CLI::Range(0.0, 1.0));
  s_init->add_option("--scale-factor", init.scale_factor, "Multiplier on the nearest-neighbor initial scale")
      ->check(CLI::PositiveNumber);
  add_common(s_init, common);

  TrainArgs train;
  auto* s_train = app.add_subcommand("train", "Fit a scene to posed images");
  s_train->add_option("--scene", train.scene, "Initial scene file")->required();
  s_train->add_option("--cameras", train.cameras, "Cameras file whose entries name their images")->required();
  s_train->add_option("--images-dir", train.images_dir, "Directory holding the training images")->required();
  s_train->add_option("--out", train.out, "Output directory for scene.txt, metrics.csv and checkpoints")->required();
  s_train->add_option("--steps", train.steps, "Optimization steps")->check(CLI::NonNegativeNumber);
  s_train->add_option("--mode", train.mode, "Renderer to train")->check(CLI::IsMember(modes));
  s_train->add_option("--lambda", train.lambda, "D-SSIM weight in [0, 1]");
  s_train->add_option("--beta", train.beta, "Image-gradient L1 weight (gdgs only)");
  s_train->add_option("--seed", train.seed, "Seed for view order and densification");
  s_train->add_option("--checkpoint-every", train.checkpoint_every, "Write a checkpoint scene every N steps (0 disables)")
      ->check(CLI::NonNegativeNumber);
  s_train->add_option("--log-every", train.log_every, "Print a metrics record every N steps (0 disables)")
      ->check(CLI::NonNegativeNumber);
  s_train->add_flag("--no-densify", train.no_densify, "Disable cloning, splitting and pruning");
  add_common(s_train, common);

  RenderArgs rend;
  auto* s_render = app.add_subcommand("render", "Render one camera view to PNG and PFM");
  s_render->add_option("--scene", rend.scene, "Scene file")->required();
  s_render->add_option("--cameras", rend.cameras, "Cameras file")->required();
  s_render->add_option("--view", rend.view, "Camera index")->check(CLI::NonNegativeNumber);
  s_render->add_option("--mode", rend.mode, "gdgs, 3dgs, or laplacian for the field before the solve")
      ->check(CLI::IsMember({"gdgs", "3dgs", "laplacian"}));
  s_render->add_option("--solver", rend.solver, "Poisson solver for gdgs")->check(CLI::IsMember(solvers));
  s_render->add_option("--out", rend.out, "Output path prefix; .png and .pfm are appended")->required();
  add_common(s_render, common);

  SolveArgs solve;
  auto* s_solve = app.add_subcommand("solve", "Reconstruct an image from a Laplacian field stored as PFM");
  s_solve->add_option("--input", solve.input, "Laplacian field (PFM)")->required();
  s_solve->add_option("--out", solve.out, "Output image, .pfm or .png")->required();
  s_solve->add_option("--solver", solve.solver, "Poisson solver")->check(CLI::IsMember(solvers));
  s_solve->add_option("--tol", solve.tol, "Multigrid relative residual target")->check(CLI::PositiveNumber);
  s_solve->add_option("--dc", solve.dc, "Mean of the result: one value, or one per channel separated by commas");
  s_solve->add_option("--max-cycles", solve.max_cycles, "Multigrid V-cycle limit")->check(CLI::PositiveNumber);
  add_common(s_solve, common);

  SparsityArgs sparsity;
  auto* s_sparsity = app.add_subcommand("analyze-sparsity", "Cauchy scale fits and a Laplacian threshold sweep");
  s_sparsity->add_option("--input", sparsity.input, "PNG image or a directory of PNG images")->required();
  s_sparsity->add_option("--thresholds", sparsity.thresholds, "Comma-separated thresholds on the [0, 1] scale");
  s_sparsity->add_option("--out", sparsity.out, "Report CSV")->required();
  s_sparsity->add_flag("--mle", sparsity.mle, "Refine the scale fits by maximum likelihood");
  add_common(s_sparsity, common);

  GradcheckArgs gc;
  auto* s_gc = app.add_subcommand("gradcheck", "Compare analytic and finite-difference gradients");
  s_gc->add_option("--seed", gc.seed, "Scene seed");
  s_gc->add_option("--mode", gc.mode, "Renderer to check")->check(CLI::IsMember(modes));
  s_gc->add_option("--tolerance", gc.tolerance, "Largest accepted relative error")->check(CLI::PositiveNumber);
  s_gc->add_option("--particles", gc.particles, "Particles per scene")->check(CLI::PositiveNumber);
  s_gc->add_option("--size", gc.size, "Image side in pixels")->check(CLI::Range(8, 256));
  add_common(s_gc, common);

  BenchArgs bench;
  auto* s_bench = app.add_subcommand("bench", "Train both renderers on a synthetic scene and score held-out views");
  s_bench->add_option("--spec", bench.spec, "Synthetic scene spec (JSON)")->required();
  s_bench->add_option("--steps", bench.steps, "Optimization steps per renderer")->check(CLI::PositiveNumber);
  s_bench->add_option("--out", bench.out, "Output directory")->required();
  s_bench->add_option("--modes", bench.modes, "Comma-separated renderers to run");
  s_bench->add_option("--seed", bench.seed, "Training seed");
  add_common(s_bench, common);

  if (!args.empty() && args[0].rfind("-", 0) != 0) {
    const auto subs = app.get_subcommands({});
    if (std::none_of(subs.begin(), subs.end(), [&](const CLI::App* s) { return s->get_name() == args[0]; })) {
      print_error(err, "usage", "unknown subcommand '" + args[0] + "'");
      return kUsage;
    }
  }

  // Settings from --config are spliced in right after the subcommand name so
  // later command-line flags override them.
  std::vector<std::string> argv = args;
  try {
    const std::string config_path = find_config_path(args);
    if (!config_path.empty() && !args.empty()) {
      CLI::App* sub = nullptr;
      for (auto* s : app.get_subcommands({})) {
        if (s->get_name() == args[0]) sub = s;
      }
      if (sub) {
        std::vector<std::string> injected;
        for (const auto& [key, value] : read_config_file(config_path)) {
          const CLI::Option* opt = sub->get_option_no_throw("--" + key);
          if (!opt || is_internal_option(opt)) {
            throw ConfigError("unknown key '" + key + "' in config file " + config_path);
          }
          injected.push_back("--" + key + "=" + value);
        }
        argv.insert(argv.begin() + 1, injected.begin(), injected.end());
      }
    }
  } catch (const ConfigError& e) {
    print_error(err, "invalid-config", e.what());
    return kInvalidConfig;
  } catch (const Error& e) {
    print_error(err, to_string(e.kind()), std::string("config file: ") + e.what());
    return exit_code_for(e.kind());
  }

  try {
    std::vector<std::string> reversed(argv.rbegin(), argv.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return kOk;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e, out, err);
    return kOk;
  } catch (const CLI::ParseError& e) {
    print_error(err, "usage", e.what());
    return kUsage;
  }

  CLI::App* active = app.get_subcommands().front();
  if (common.print_config) {
    out << render_config(active);
    return kOk;
  }
  init.seed_given = init_seed->count() > 0;

  try {
    apply_threads(common);
    const std::string name = active->get_name();
    if (name == "init") return cmd_init(init, out);
    if (name == "train") return cmd_train(train, out);
    if (name == "render") return cmd_render(rend, out);
    if (name == "solve") return cmd_solve(solve, out);
    if (name == "analyze-sparsity") return cmd_sparsity(sparsity, out);
    if (name == "gradcheck") return cmd_gradcheck(gc, out);
    if (name == "bench") return cmd_bench(bench, out);
    print_error(err, "usage", "unhandled subcommand " + name);
    return kUsage;
  } catch (const ConfigError& e) {
    print_error(err, "invalid-config", e.what());
    return kInvalidConfig;
  } catch (const Error& e) {
    print_error(err, to_string(e.kind()), e.what());
    return exit_code_for(e.kind());
  } catch (const fs::filesystem_error& e) {
    print_error(err, "io", e.what());
    return kIo;
  } catch (const std::exception& e) {
    print_error(err, "internal", e.what());
    return kInternal;
  }
}

}  // namespace gdgs::cli
