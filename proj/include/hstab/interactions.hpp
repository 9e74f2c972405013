#pragma once

// Interaction integrals between bubbles on H^n: deterministic 2-D reduced
// quadrature over (|z|, t) for t-axis configurations, a Monte Carlo
// estimator for the nonlocal double integral defining the squared dual
// norm, a certified duality lower bound through an explicit cutoff, and
// log-log slope fitting against predicted exponents.

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "hstab/bubble.hpp"
#include "hstab/dimension.hpp"
#include "hstab/group.hpp"
#include "hstab/mc.hpp"

namespace hstab {

struct QuadResult {
  double value = 0.0;
  double err_estimate = 0.0;  // relative, observed under panel refinement
};

// Panel breakpoints on [lo, hi]: geometric ladders (first rung scale/2,
// ratio growth) away from each {center, scale}, merged with the ends.
std::vector<double> graded_breaks(double lo, double hi,
                                  const std::vector<std::array<double, 2>>& centers_scales,
                                  double growth = 1.7);

// integral of F(r, t) omega_{2n-1} r^{2n-1} dr dt on the panel product,
// Gauss-Legendre nodes per panel; panels are bisected until two passes agree
// to rel_tol. Throws NumericsError when refinement stalls.
QuadResult quad2d_axi(const Dim& dim, const std::function<double(double, double)>& F,
                      std::vector<double> r_breaks, std::vector<double> t_breaks,
                      double rel_tol = 1e-2, int gl_order = 8);

// integral of U^alpha over H^n by the same panel machinery (tail beyond the
// truncated box is included in err_estimate); requires alpha (Q-2) > Q + 1/2
double single_power_integral(double alpha, const Dim& dim, double rel_tol = 1e-3);

// integral of U_1^alpha U_2^beta for two t-axis gauges, alpha + beta equal to
// the critical exponent 2Q/(Q-2), both positive
QuadResult pair_integral(double alpha, double beta, const Gauge& g1, const Gauge& g2,
                         const Dim& dim, double rel_tol = 1e-2);

// convenience form: first bubble standard, second gauge (lambda, (0, t0))
QuadResult pair_integral(double alpha, double beta, double lambda, double t0, const Dim& dim,
                         double rel_tol = 1e-2);

struct LeadingConstant {
  double computed = 0.0;
  double predicted = 0.0;
  double err_estimate = 0.0;
};

// alpha > beta > 0, alpha + beta = 2Q/(Q-2): quadrature value of
// int U^alpha (g U)^beta against its closed-form leading term
//   (int U^alpha) * ((g U)(0))^beta
//     = c_alpha c0^beta lambda^{beta(Q-2)/2} / [(1+lambda^2|z0|^2)^2
//        + lambda^4 t0^2]^{beta(Q-2)/4};
// the ratio computed/predicted tends to 1 as the interaction weakens.
LeadingConstant pair_leading_constant(double alpha, double beta, double lambda, double t0,
                                      const Dim& dim);

// ratio of int U^{p-1} (g U) Z^{2n+2} to int U^p (g U) for g = (lambda,
// (0, t_sep)), lambda <= 1, with Z^{2n+2} the dilation mode of the standard
// bubble; tends to -(Q-2)^2 / (2(Q+2)) as the interaction weakens
double zmode_ratio(double lambda, double t_sep, const Dim& dim);

// integral of |(U_1+U_2)^p - U_1^p - U_2^p|^{2Q/(Q+2)} for a two-bubble
// t-axis configuration
QuadResult f_lp_norm(const BubbleConfig& config, double rel_tol = 1e-2);

struct KernelMcOptions {
  long samples = 400000;
  std::uint64_t seed = 11;
  double max_rel_std_error = 0.03;  // throws NumericsError above this
  double rho_min = 1e-3;
  double rho_max = 1e3;
};

// Monte Carlo value of c_q * double integral of
//   P(xi) P(eta) |eta^{-1} o xi|^{2-Q},   P = U_1 U_2:
// the squared dual norm of the bubble product through the convolution
// kernel, with c_q the calibrated fundamental-solution constant. Pairs mix
// independent draws from the two cores with a displacement component whose
// radial law cancels the kernel singularity at xi = eta.
McEstimate kernel_double_norm(const BubbleConfig& config, double c_q,
                              const KernelMcOptions& opt = {});

struct PairingBound {
  double value = 0.0;     // pairing / eta_norm <= dual norm of f, by duality
  double eta_norm = 0.0;  // energy norm of the cutoff
  double pairing = 0.0;   // int f eta
};

// radial C^2 cutoff eta equal to 1 inside hnorm <= 1/(4 sqrt(eps)) and 0
// outside hnorm >= 1/(2 sqrt(eps)), eps taken from the two-bubble t-axis
// configuration (first bubble near the origin); returns the certified
// lower bound int f eta / ||eta|| together with its factors
PairingBound pairing_lower_bound(const BubbleConfig& config);

// max over k of |int f Z_k - p sum_{i != k} int U_k^{p-1} U_i Z_k| divided
// by eps^{(Q-2)/2}, Z_k the dilation mode of bubble k; tends to 0 as the
// interaction weakens
double expansion_check(const BubbleConfig& config);

struct ScalingPoint {
  double eps = 0.0;
  double value = 0.0;
  double err_estimate = 0.0;
};

struct ScalingReport {
  std::string quantity;
  std::vector<ScalingPoint> points;
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;   // rms residual of log(value) about the fit
  double log_q = 0.0;      // chosen |log eps|^q correction, q in {0, 1/2, 1}
  double predicted = 0.0;  // exponent the slope is judged against
  double tolerance = 0.0;
  char sense = '=';        // '=': |slope-pred| <= tol, '>': slope >= pred-tol, '<': slope <= pred+tol
  bool pass = false;
};

// least squares of log(value) = intercept + slope log(eps) + q log|log eps|
// with q picked from {0, 1/2, 1}; a nonzero q is chosen only when it at
// least halves the residual. Requires >= 4 positive points spanning >= 1.5
// decades in eps; throws std::invalid_argument otherwise.
ScalingReport fit_slope(std::vector<ScalingPoint> points);
ScalingReport fit_slope(std::vector<ScalingPoint> points, std::string quantity, double predicted,
                        double tolerance, char sense = '=');

}  // namespace hstab
