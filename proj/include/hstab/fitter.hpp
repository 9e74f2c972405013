#pragma once

// Bubble-decomposition fitting: minimize the distance functional
//   G(lambda_1, t_1, ..., lambda_m, t_m) = || u - sum_k (g_k U) ||_{D1}^2
// over on-axis gauges by Gauss-Newton in (log lambda_k, t_k), plus the
// deficit functional || L u + |u|^{p-1} u ||_{D-1} and their quotient
// against the dimension-dependent stability regime.

#include <string>
#include <vector>

#include "hstab/axi_grid.hpp"
#include "hstab/pde_solver.hpp"

namespace hstab {

struct FitOptions {
  // stop when every orthogonality residual (rho, Z_k^a)_{D1} is below
  // tol_factor * ||u||_{D1}
  double tol_factor = 1e-6;
  int max_iterations = 60;
  int max_backtracks = 30;
  double ridge = 1e-10;  // added to the Gram diagonal
};

struct FitIteration {
  int iter = 0;
  double distance = 0.0;      // ||u - sigma||_{D1} after the step
  double max_residual = 0.0;  // max_k,a |(rho, Z_k^a)_{D1}| after the step
  double step = 0.0;          // accepted line-search fraction
};

struct FitResult {
  std::vector<Gauge> gauges;
  double distance = 0.0;          // ||rho||_{D1} at the fitted parameters
  std::vector<double> residuals;  // (rho, Z_k^a)_{D1}, a = vertical then dilation, per bubble
  double deficit = 0.0;           // || L u + |u|^{p-1} u ||_{D-1}
  double eps = 0.0;               // interaction parameter of the fitted family
  std::vector<FitIteration> trace;
  bool converged = false;
  bool collision = false;  // an iterate left the weak-interaction regime (eps > 0.5)
};

// Gauss-Newton descent of G from the supplied on-axis initial gauges. The
// Jacobian columns are the exact parameter derivatives
//   d sigma / d log lambda_k = Z_k^{dilation},
//   d sigma / d t_k          = lambda_k^2 Z_k^{vertical},
// so a stationary point is exactly the orthogonality system of the
// decomposition. Backtracking keeps the distance non-increasing; if an
// iterate's interaction parameter exceeds 0.5 the fit stops with the
// collision flag set (out of the weak-interaction regime, not trusted).
// The solver must be built on u's grid; it supplies the D^{-1} norm of the
// deficit. Non-convergence is reported through `converged`, not thrown.
FitResult fit_bubbles(const GridFn& u, int m, const std::vector<Gauge>& init,
                      const PoissonSolver& S, const FitOptions& opt = {});

// || L u + |u|^{p-1} u ||_{D-1} with the discrete sub-Laplacian
double deficit(const GridFn& u, const PoissonSolver& S);

// Same functional for u = sigma + rho with the bubble part applied in closed
// form: L sigma = -sum_k (g_k U)^p exactly, only rho goes through the
// discrete operator. Removes the bubble discretization floor, which
// otherwise swamps the genuine deficit of well-separated families.
double deficit_split(const BubbleConfig& config, const GridFn& rho, const PoissonSolver& S);

// right side of the stability comparison at deficit gamma: gamma for n = 1,
// gamma |log gamma|^{1/2} for n = 2, gamma^{(n+2)/(2n)} for n >= 3
double regime_function(const Dim& dim, double gamma);

struct QuotientResult {
  double distance = 0.0;
  double deficit = 0.0;
  double quotient = 0.0;  // distance / regime_function(deficit)
  FitResult fit;
};

// fit, then compare the distance against the regime function of the deficit
QuotientResult stability_quotient(const GridFn& u, int m, const std::vector<Gauge>& init,
                                  const PoissonSolver& S, const FitOptions& opt = {});

}  // namespace hstab
