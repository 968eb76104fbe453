#pragma once

#include <vector>

#include "gdgs/field_image.hpp"

namespace gdgs {

/// 5-point Laplacian with mirrored boundary samples (f(-1) = f(0)), i.e. the
/// homogeneous Neumann operator on a cell-centered grid.
FieldImage discrete_laplacian(const FieldImage& img);

enum class Boundary { Neumann };

/// Delta c = rhs with zero-flux boundary. The solution is unique up to a
/// constant per channel; dc_value fixes the channel mean.
struct PoissonProblem {
  FieldImage rhs;
  std::vector<double> dc_value;  // one per channel; empty means all zero
  Boundary boundary = Boundary::Neumann;
};

struct SolveReport {
  int cycles = 0;
  /// Relative residual ||rhs - Delta c||_2 / ||rhs||_2 after each cycle
  /// (multigrid only).
  std::vector<double> residual_history;
  /// ||rhs_projected - Delta c||_inf over all channels.
  double residual_inf = 0.0;
  /// Largest per-channel mean removed from rhs to make it compatible.
  double rhs_mean_removed = 0.0;
};

/// Exact solve through the cosine-basis diagonalization of the Neumann
/// Laplacian. The per-channel mean of rhs is removed first.
FieldImage solve_spectral(const PoissonProblem& problem, SolveReport* report = nullptr);

struct MultigridOptions {
  double tol = 1e-8;
  int max_cycles = 50;
  int pre_smooth = 2;
  int post_smooth = 2;
  /// A side is no longer halved once it is at most this size.
  int coarsest_size = 8;
};

/// V-cycles with red-black Gauss-Seidel smoothing, full-weighting
/// restriction and bilinear prolongation on a cell-centered hierarchy; the
/// coarsest level is solved directly. Requires H, W >= 4. Throws
/// NonConvergenceError if tol is not reached within max_cycles.
FieldImage solve_multigrid(const PoissonProblem& problem, const MultigridOptions& options,
                           SolveReport* report = nullptr);

enum class SolverKind { Spectral, Multigrid };

struct SolverOptions {
  SolverKind kind = SolverKind::Multigrid;
  MultigridOptions multigrid;
};

FieldImage solve_poisson(const PoissonProblem& problem, const SolverOptions& options,
                         SolveReport* report = nullptr);

/// 1/2 ||Delta c - rhs||^2 over all pixels and channels.
double loss_laplacian_domain(const FieldImage& c, const FieldImage& rhs);

/// sum 1/2 |grad c|^2 + c * rhs with forward differences (zero across the
/// boundary). Its stationary points satisfy Delta c = rhs.
double loss_variational(const FieldImage& c, const FieldImage& rhs);

/// theta * laplacian-domain + (1 - theta) * variational, theta in [0, 1].
double loss_hybrid(const FieldImage& c, const FieldImage& rhs, double theta);

}  // namespace gdgs
