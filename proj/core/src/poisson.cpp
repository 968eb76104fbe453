#include "gdgs/poisson.hpp"

#include <fftw3.h>

#include <Eigen/Core>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <numeric>
#include <span>
#include <string>

#include "gdgs/error.hpp"
#include "gdgs/parallel.hpp"

namespace gdgs {
namespace {

std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

double dc_for_channel(const PoissonProblem& problem, int c) {
  if (problem.dc_value.empty()) return 0.0;
  if (problem.dc_value.size() != static_cast<std::size_t>(problem.rhs.channels())) {
    throw Error(ErrorKind::InvalidArgument, "dc_value must have one entry per channel");
  }
  return problem.dc_value[c];
}

void check_problem(const PoissonProblem& problem) {
  if (problem.rhs.empty()) throw Error(ErrorKind::InvalidArgument, "Poisson rhs is empty");
  if (!problem.rhs.all_finite()) throw Error(ErrorKind::InvalidArgument, "Poisson rhs contains non-finite values");
  for (double v : problem.dc_value) {
    if (!std::isfinite(v)) throw Error(ErrorKind::InvalidArgument, "dc_value must be finite");
  }
}

/// Subtracts the mean in place and returns it.
double remove_mean(std::span<double> v) {
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  for (double& x : v) x -= mean;
  return mean;
}

double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

void finish_report(SolveReport* report, const FieldImage& solution, const FieldImage& rhs_projected) {
  if (!report) return;
  const FieldImage lap = discrete_laplacian(solution);
  report->residual_inf = max_abs_difference(lap, rhs_projected);
}

// ---------------------------------------------------------------------------
// Multigrid hierarchy on a cell-centered grid. Each level stores the inverse
// squared spacings so semi-coarsened levels keep a consistent operator.

struct Level {
  int h = 0, w = 0;
  double ix2 = 1.0, iy2 = 1.0;
  bool coarsened_x = false, coarsened_y = false;  // relative to the finer level
  std::vector<double> u, f, r;
};

struct Taps {
  int idx[2];
  double wt[2];
  int n;
};

/// Bilinear prolongation weights along one axis for fine index i.
inline Taps axis_taps(int i, bool coarsened, int n_coarse) {
  if (!coarsened) return {{i, 0}, {1.0, 0.0}, 1};
  const int c = i / 2;
  const int other = (i % 2 == 0) ? c - 1 : c + 1;
  const int o = std::clamp(other, 0, n_coarse - 1);
  if (o == c) return {{c, 0}, {1.0, 0.0}, 1};
  return {{c, o}, {0.75, 0.25}, 2};
}

/// Neighbor sum (weighted by inverse squared spacing) and diagonal of the
/// Neumann operator at one cell.
double apply_operator_at(const Level& L, const double* u, int y, int x, double& diag) {
  const std::size_t i = static_cast<std::size_t>(y) * L.w + x;
  double nb = 0.0;
  diag = 0.0;
  if (x > 0) { nb += u[i - 1] * L.ix2; diag += L.ix2; }
  if (x + 1 < L.w) { nb += u[i + 1] * L.ix2; diag += L.ix2; }
  if (y > 0) { nb += u[i - L.w] * L.iy2; diag += L.iy2; }
  if (y + 1 < L.h) { nb += u[i + L.w] * L.iy2; diag += L.iy2; }
  return nb;
}

/// Gauss-Seidel update of the cells of one color in row y.
void relax_row(Level& L, int y, int color) {
  double* u = L.u.data();
  const double* f = L.f.data();
  const int w = L.w;
  auto edge = [&](int x) {
    double diag;
    const double nb = apply_operator_at(L, u, y, x, diag);
    const std::size_t i = static_cast<std::size_t>(y) * w + x;
    u[i] = (nb - f[i]) / diag;
  };
  const int first = (y + color) % 2;
  if (y == 0 || y + 1 == L.h || w < 3) {
    for (int x = first; x < w; x += 2) edge(x);
    return;
  }
  if (first == 0) edge(0);
  const double inv_diag = 1.0 / (2.0 * L.ix2 + 2.0 * L.iy2);
  double* row = u + static_cast<std::size_t>(y) * w;
  const double* up = row - w;
  const double* dn = row + w;
  const double* fr = f + static_cast<std::size_t>(y) * w;
  for (int x = first == 0 ? 2 : 1; x + 1 < w; x += 2) {
    row[x] = ((row[x - 1] + row[x + 1]) * L.ix2 + (up[x] + dn[x]) * L.iy2 - fr[x]) * inv_diag;
  }
  if ((w - 1 - first) % 2 == 0) edge(w - 1);
}

void smooth_red_black(Level& L, int sweeps) {
  // Black cells of row y - 1 see only red neighbors, all final once row y is
  // red-relaxed, so both colors are handled in one pass over memory.
  for (int s = 0; s < sweeps; ++s) {
    for (int y = 0; y < L.h; ++y) {
      relax_row(L, y, 0);
      if (y > 0) relax_row(L, y - 1, 1);
    }
    relax_row(L, L.h - 1, 1);
  }
}

void compute_residual(Level& L) {
  const double* u = L.u.data();
  const int w = L.w;
  const double diag_in = 2.0 * L.ix2 + 2.0 * L.iy2;
  for (int y = 0; y < L.h; ++y) {
    auto edge = [&](int x) {
      double diag;
      const double nb = apply_operator_at(L, u, y, x, diag);
      const std::size_t i = static_cast<std::size_t>(y) * w + x;
      L.r[i] = L.f[i] - (nb - diag * u[i]);
    };
    if (y == 0 || y + 1 == L.h || w < 3) {
      for (int x = 0; x < w; ++x) edge(x);
      continue;
    }
    edge(0);
    const std::size_t o = static_cast<std::size_t>(y) * w;
    const double* row = u + o;
    const double* up = row - w;
    const double* dn = row + w;
    const double* f = L.f.data() + o;
    double* r = L.r.data() + o;
    for (int x = 1; x + 1 < w; ++x) {
      r[x] = f[x] - ((row[x - 1] + row[x + 1]) * L.ix2 + (up[x] + dn[x]) * L.iy2 - diag_in * row[x]);
    }
    edge(w - 1);
  }
}

void restrict_residual(const Level& fine, Level& coarse) {
  std::fill(coarse.f.begin(), coarse.f.end(), 0.0);
  const double scale = (coarse.coarsened_x ? 0.5 : 1.0) * (coarse.coarsened_y ? 0.5 : 1.0);
  for (int y = 0; y < fine.h; ++y) {
    const Taps ty = axis_taps(y, coarse.coarsened_y, coarse.h);
    for (int x = 0; x < fine.w; ++x) {
      const Taps tx = axis_taps(x, coarse.coarsened_x, coarse.w);
      const double r = fine.r[static_cast<std::size_t>(y) * fine.w + x] * scale;
      for (int a = 0; a < ty.n; ++a)
        for (int b = 0; b < tx.n; ++b)
          coarse.f[static_cast<std::size_t>(ty.idx[a]) * coarse.w + tx.idx[b]] += ty.wt[a] * tx.wt[b] * r;
    }
  }
}

void prolong_add(const Level& coarse, Level& fine) {
  for (int y = 0; y < fine.h; ++y) {
    const Taps ty = axis_taps(y, coarse.coarsened_y, coarse.h);
    for (int x = 0; x < fine.w; ++x) {
      const Taps tx = axis_taps(x, coarse.coarsened_x, coarse.w);
      double e = 0.0;
      for (int a = 0; a < ty.n; ++a)
        for (int b = 0; b < tx.n; ++b)
          e += ty.wt[a] * tx.wt[b] * coarse.u[static_cast<std::size_t>(ty.idx[a]) * coarse.w + tx.idx[b]];
      fine.u[static_cast<std::size_t>(y) * fine.w + x] += e;
    }
  }
}

class MultigridHierarchy {
 public:
  MultigridHierarchy(int h, int w, const MultigridOptions& opt) : opt_(opt) {
    Level top;
    top.h = h;
    top.w = w;
    levels_.push_back(top);
    const int cs = std::max(2, opt.coarsest_size);
    for (;;) {
      const Level& prev = levels_.back();
      Level next;
      // A dimension is only coarsened while its spacing does not exceed the
      // other one, which keeps point smoothing effective.
      next.coarsened_y = prev.h > cs && prev.iy2 >= prev.ix2;
      next.coarsened_x = prev.w > cs && prev.ix2 >= prev.iy2;
      if (!next.coarsened_x && !next.coarsened_y) break;
      next.h = next.coarsened_y ? (prev.h + 1) / 2 : prev.h;
      next.w = next.coarsened_x ? (prev.w + 1) / 2 : prev.w;
      next.iy2 = prev.iy2 / (next.coarsened_y ? 4.0 : 1.0);
      next.ix2 = prev.ix2 / (next.coarsened_x ? 4.0 : 1.0);
      levels_.push_back(next);
    }
    for (auto& L : levels_) {
      const std::size_t n = static_cast<std::size_t>(L.h) * L.w;
      L.u.assign(n, 0.0);
      L.f.assign(n, 0.0);
      L.r.assign(n, 0.0);
    }
    factor_coarsest();
  }

  Level& top() { return levels_.front(); }

  void vcycle(std::size_t l) {
    Level& L = levels_[l];
    if (l + 1 == levels_.size()) {
      solve_coarsest(L);
      return;
    }
    smooth_red_black(L, opt_.pre_smooth);
    compute_residual(L);
    Level& C = levels_[l + 1];
    restrict_residual(L, C);
    remove_mean(C.f);
    std::fill(C.u.begin(), C.u.end(), 0.0);
    vcycle(l + 1);
    prolong_add(C, L);
    smooth_red_black(L, opt_.post_smooth);
  }

 private:
  void factor_coarsest() {
    const Level& L = levels_.back();
    const int n = L.h * L.w;
    // -A with the first unknown pinned is SPD; for a zero-mean rhs the pinned
    // system reproduces a solution of the singular Neumann problem exactly.
    std::vector<Eigen::Triplet<double>> entries;
    entries.reserve(static_cast<std::size_t>(n) * 5 + 1);
    for (int y = 0; y < L.h; ++y) {
      for (int x = 0; x < L.w; ++x) {
        const int i = y * L.w + x;
        double diag = 0.0;
        auto couple = [&](int j, double wgt) {
          entries.emplace_back(i, j, -wgt);
          diag += wgt;
        };
        if (x > 0) couple(i - 1, L.ix2);
        if (x + 1 < L.w) couple(i + 1, L.ix2);
        if (y > 0) couple(i - L.w, L.iy2);
        if (y + 1 < L.h) couple(i + L.w, L.iy2);
        entries.emplace_back(i, i, diag);
      }
    }
    entries.emplace_back(0, 0, 1.0);
    Eigen::SparseMatrix<double> m(n, n);
    m.setFromTriplets(entries.begin(), entries.end());
    coarse_solver_.compute(m);
    if (coarse_solver_.info() != Eigen::Success) {
      throw Error(ErrorKind::NumericalDegeneracy, "coarsest multigrid level factorization failed");
    }
  }

  void solve_coarsest(Level& L) {
    const Eigen::Map<const Eigen::VectorXd> f(L.f.data(), static_cast<Eigen::Index>(L.f.size()));
    const Eigen::VectorXd x = coarse_solver_.solve(-f);
    const double mean = x.mean();
    for (Eigen::Index i = 0; i < x.size(); ++i) L.u[static_cast<std::size_t>(i)] = x[i] - mean;
  }

  MultigridOptions opt_;
  std::vector<Level> levels_;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> coarse_solver_;
};

}  // namespace

FieldImage discrete_laplacian(const FieldImage& img) {
  FieldImage out(img.height(), img.width(), img.channels());
  const int h = img.height(), w = img.width();
  for (int y = 0; y < h; ++y) {
    const int ym = std::max(y - 1, 0), yp = std::min(y + 1, h - 1);
    for (int x = 0; x < w; ++x) {
      const int xm = std::max(x - 1, 0), xp = std::min(x + 1, w - 1);
      for (int c = 0; c < img.channels(); ++c) {
        out.at(y, x, c) = img.at(y, xp, c) + img.at(y, xm, c) + img.at(yp, x, c) + img.at(ym, x, c) -
                          4.0 * img.at(y, x, c);
      }
    }
  }
  return out;
}

FieldImage solve_spectral(const PoissonProblem& problem, SolveReport* report) {
  check_problem(problem);
  const FieldImage& rhs = problem.rhs;
  const int h = rhs.height(), w = rhs.width();
  const std::size_t n = rhs.pixel_count();
  FieldImage solution(h, w, rhs.channels());
  FieldImage projected(h, w, rhs.channels());
  double mean_removed = 0.0;

  std::vector<double> eig_y(h), eig_x(w);
  for (int k = 0; k < h; ++k) eig_y[k] = 2.0 * std::cos(std::numbers::pi * k / h) - 2.0;
  for (int k = 0; k < w; ++k) eig_x[k] = 2.0 * std::cos(std::numbers::pi * k / w) - 2.0;

  double* buffer = fftw_alloc_real(n);
  if (!buffer) throw Error(ErrorKind::NumericalDegeneracy, "FFTW allocation failed");
  fftw_plan forward, inverse;
  {
    std::lock_guard lock(fftw_planner_mutex());
    forward = fftw_plan_r2r_2d(h, w, buffer, buffer, FFTW_REDFT10, FFTW_REDFT10, FFTW_ESTIMATE);
    inverse = fftw_plan_r2r_2d(h, w, buffer, buffer, FFTW_REDFT01, FFTW_REDFT01, FFTW_ESTIMATE);
  }
  const double norm = 1.0 / (4.0 * h * w);
  for (int c = 0; c < rhs.channels(); ++c) {
    std::vector<double> plane = rhs.channel_plane(c);
    mean_removed = std::max(mean_removed, std::abs(remove_mean(plane)));
    projected.set_channel_plane(c, plane);
    std::copy(plane.begin(), plane.end(), buffer);
    fftw_execute(forward);
    for (int ky = 0; ky < h; ++ky) {
      for (int kx = 0; kx < w; ++kx) {
        const std::size_t i = static_cast<std::size_t>(ky) * w + kx;
        const double lambda = eig_y[ky] + eig_x[kx];
        buffer[i] = (ky == 0 && kx == 0) ? 0.0 : buffer[i] / lambda * norm;
      }
    }
    fftw_execute(inverse);
    const double dc = dc_for_channel(problem, c);
    for (std::size_t i = 0; i < n; ++i) plane[i] = buffer[i] + dc;
    solution.set_channel_plane(c, plane);
  }
  {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(forward);
    fftw_destroy_plan(inverse);
  }
  fftw_free(buffer);

  if (report) {
    *report = SolveReport{};
    report->cycles = 0;
    report->rhs_mean_removed = mean_removed;
    finish_report(report, solution, projected);
  }
  return solution;
}

FieldImage solve_multigrid(const PoissonProblem& problem, const MultigridOptions& options,
                           SolveReport* report) {
  check_problem(problem);
  const FieldImage& rhs = problem.rhs;
  if (rhs.height() < 4 || rhs.width() < 4) {
    throw Error(ErrorKind::InvalidArgument, "multigrid requires H, W >= 4");
  }
  if (!(options.tol > 0.0) || options.max_cycles < 1) {
    throw Error(ErrorKind::InvalidArgument, "multigrid needs tol > 0 and max_cycles >= 1");
  }
  const int channels = rhs.channels();
  FieldImage solution(rhs.height(), rhs.width(), channels);
  FieldImage projected(rhs.height(), rhs.width(), channels);
  std::vector<std::vector<double>> histories(channels);
  std::vector<double> means(channels, 0.0);
  std::vector<std::string> failures(channels);

  parallel_for(static_cast<std::size_t>(channels), [&](std::size_t ch) {
    const int c = static_cast<int>(ch);
    MultigridHierarchy mg(rhs.height(), rhs.width(), options);
    Level& top = mg.top();
    top.f = rhs.channel_plane(c);
    means[c] = remove_mean(top.f);
    const double f_norm = norm2(top.f);
    auto& history = histories[c];
    bool converged = false;
    for (int cycle = 0; cycle < options.max_cycles; ++cycle) {
      mg.vcycle(0);
      remove_mean(top.u);
      compute_residual(top);
      const double rel = f_norm > 0.0 ? norm2(top.r) / f_norm : norm2(top.r);
      history.push_back(rel);
      if (!std::isfinite(rel)) break;
      if (rel <= options.tol) {
        converged = true;
        break;
      }
    }
    if (!converged) {
      failures[c] = "channel " + std::to_string(c) + " did not reach tol";
      return;
    }
    const double dc = dc_for_channel(problem, c);
    for (double& v : top.u) v += dc;
    solution.set_channel_plane(c, top.u);
    projected.set_channel_plane(c, top.f);
  });

  for (int c = 0; c < channels; ++c) {
    if (!failures[c].empty()) {
      throw NonConvergenceError("multigrid: " + failures[c] + " within " +
                                    std::to_string(options.max_cycles) + " cycles",
                                histories[c]);
    }
  }
  if (report) {
    *report = SolveReport{};
    for (int c = 0; c < channels; ++c) {
      report->cycles = std::max<int>(report->cycles, static_cast<int>(histories[c].size()));
      report->rhs_mean_removed = std::max(report->rhs_mean_removed, std::abs(means[c]));
    }
    report->residual_history.assign(report->cycles, 0.0);
    for (int c = 0; c < channels; ++c)
      for (std::size_t i = 0; i < histories[c].size(); ++i)
        report->residual_history[i] = std::max(report->residual_history[i], histories[c][i]);
    finish_report(report, solution, projected);
  }
  return solution;
}

FieldImage solve_poisson(const PoissonProblem& problem, const SolverOptions& options,
                         SolveReport* report) {
  switch (options.kind) {
    case SolverKind::Spectral: return solve_spectral(problem, report);
    case SolverKind::Multigrid: return solve_multigrid(problem, options.multigrid, report);
  }
  throw Error(ErrorKind::InvalidArgument, "unknown solver kind");
}

double loss_laplacian_domain(const FieldImage& c, const FieldImage& rhs) {
  require_same_shape(c, rhs, "loss_laplacian_domain");
  const FieldImage lap = discrete_laplacian(c);
  double sum = 0.0;
  for (std::size_t i = 0; i < lap.size(); ++i) {
    const double d = lap.data()[i] - rhs.data()[i];
    sum += d * d;
  }
  return 0.5 * sum;
}

double loss_variational(const FieldImage& c, const FieldImage& rhs) {
  require_same_shape(c, rhs, "loss_variational");
  double sum = 0.0;
  for (int y = 0; y < c.height(); ++y) {
    for (int x = 0; x < c.width(); ++x) {
      for (int ch = 0; ch < c.channels(); ++ch) {
        const double v = c.at(y, x, ch);
        const double gx = x + 1 < c.width() ? c.at(y, x + 1, ch) - v : 0.0;
        const double gy = y + 1 < c.height() ? c.at(y + 1, x, ch) - v : 0.0;
        sum += 0.5 * (gx * gx + gy * gy) + v * rhs.at(y, x, ch);
      }
    }
  }
  return sum;
}

double loss_hybrid(const FieldImage& c, const FieldImage& rhs, double theta) {
  if (!(theta >= 0.0 && theta <= 1.0)) throw Error(ErrorKind::InvalidArgument, "theta must lie in [0, 1]");
  return theta * loss_laplacian_domain(c, rhs) + (1.0 - theta) * loss_variational(c, rhs);
}

}  // namespace gdgs
