#pragma once

// The extremal bubble on H^n,
//   U(z, t) = c0 / ((1 + |z|^2)^2 + t^2)^{(Q-2)/4},
// its gauge orbit, first derivatives, the tangent modes Z^a of the gauge
// action, and the pointwise nonlinearities built from sums of bubbles.
// The normalization c0 is not hard-coded: it is calibrated at startup so
// that  Delta_{H^n} U + U^p = 0  holds, and cached per dimension.

#include <Eigen/Dense>
#include <vector>

#include "hstab/dimension.hpp"
#include "hstab/group.hpp"

namespace hstab {

struct CalibrationResult {
  double c0 = 0.0;        // rho^{(Q-2)/4}
  double rho_mean = 0.0;  // mean of -Delta w / w^p over the probe points
  double rel_spread = 0.0;
  int points = 0;
};

// Calibrate c0 by finite differences of the unnormalized profile along the
// horizontal vector fields. Throws NumericsError if -Delta w / w^p is not
// constant across probes (relative spread > 1e-6).
CalibrationResult calibrate_c0(const Dim& dim);

// calibrated constant, cached per n (thread-safe)
double bubble_c0(const Dim& dim);

// (1 + |z|^2)^2 + t^2 evaluated from |z|^2 and t
inline double quartic_denom(double z_sq, double t) {
  double a = 1.0 + z_sq;
  return a * a + t * t;
}

inline double eval_U(const Dim& dim, const HPoint& xi) {
  return bubble_c0(dim) * std::pow(quartic_denom(xi.z_sq(), xi.t), -0.25 * (dim.Q() - 2));
}

// (g.U)(xi) = lambda^{(Q-2)/2} U(gauge_apply(g, xi))
inline double eval_gauge_U(const Dim& dim, const Gauge& g, const HPoint& xi) {
  return std::pow(g.lambda, 0.5 * (dim.Q() - 2)) * eval_U(dim, gauge_apply(g, xi));
}

// Tangent modes of the gauge action at the identity gauge.
// a in [1, 2n] : translation in x_a / y_{a-n};  a = 2n+1 : translation in t;
// a = 2n+2    : dilation mode (Q-2)/2 U + TU.
double eval_Z_base(const Dim& dim, int a, const HPoint& xi);

// transported mode (g.Z^a)(xi) = lambda^{(Q-2)/2} Z^a(gauge_apply(g, xi))
inline double eval_Z(const Dim& dim, int a, const Gauge& g, const HPoint& xi) {
  return std::pow(g.lambda, 0.5 * (dim.Q() - 2)) * eval_Z_base(dim, a, gauge_apply(g, xi));
}

// horizontal gradient (X_1 U, ..., X_{2n} U) at the identity gauge
Eigen::VectorXd eval_XU_base(const Dim& dim, const HPoint& xi);

// X(g.U)(xi) = lambda^{Q/2} (XU)(gauge_apply(g, xi))
inline Eigen::VectorXd eval_XU(const Dim& dim, const Gauge& g, const HPoint& xi) {
  return std::pow(g.lambda, 0.5 * dim.Q()) * eval_XU_base(dim, gauge_apply(g, xi));
}

// generator of dilations T = sum (x_j dx_j + y_j dy_j) + 2t dt applied to U;
// TU/U -> -(Q-2) at infinity
double eval_TU(const Dim& dim, const HPoint& xi);

// |u|^{p-1} u
inline double signed_pow(double u, double p) {
  if (u == 0.0) return 0.0;
  return std::copysign(std::pow(std::abs(u), p), u);
}

// --- axisymmetric fast path -------------------------------------------------
// For gauges centered on the t-axis every quantity above depends on (|z|, t)
// only; these evaluate without building HPoints.

inline bool on_axis(const Gauge& g) {
  return g.xi.x.isZero(0.0) && g.xi.y.isZero(0.0);
}

// U under an on-axis gauge (lambda, (0, t0)) evaluated at (r, t)
inline double eval_gauge_U_axi(const Dim& dim, double c0, double lambda, double t0, double r,
                               double t) {
  double lr = lambda * r;
  double lt = lambda * lambda * (t - t0);
  return c0 * std::pow(lambda, 0.5 * (dim.Q() - 2)) *
         std::pow(quartic_denom(lr * lr, lt), -0.25 * (dim.Q() - 2));
}

// axisymmetric tangent modes (a = 2n+1 or 2n+2) under an on-axis gauge
double eval_Z_axi(const Dim& dim, int a, double lambda, double t0, double r, double t);

// --- multi-bubble configuration ---------------------------------------------

struct BubbleConfig {
  Dim dim;
  std::vector<Gauge> gauges;

  BubbleConfig(Dim d, std::vector<Gauge> gs) : dim(d), gauges(std::move(gs)) {}

  bool all_on_axis() const {
    for (const auto& g : gauges)
      if (!on_axis(g)) return false;
    return true;
  }

  double max_eps() const {
    double m = 0.0;
    for (std::size_t i = 0; i < gauges.size(); ++i)
      for (std::size_t j = i + 1; j < gauges.size(); ++j)
        m = std::max(m, eps_pair(gauges[i], gauges[j]));
    return m;
  }

  double sigma(const HPoint& xi) const {
    double s = 0.0;
    for (const auto& g : gauges) s += eval_gauge_U(dim, g, xi);
    return s;
  }

  double sigma_axi(double r, double t) const;  // requires all_on_axis()

  // interaction forcing f = (sum U_i)^p - sum U_i^p; nonnegative
  double f(const HPoint& xi) const;
  double f_axi(double r, double t) const;
};

// quadratic-and-higher remainder of the nonlinearity around sigma:
//   N(rho) = |sigma+rho|^{p-1}(sigma+rho) - sigma^p - p sigma^{p-1} rho
inline double eval_N(double p, double sigma, double rho) {
  return signed_pow(sigma + rho, p) - std::pow(sigma, p) - p * std::pow(sigma, p - 1.0) * rho;
}

}  // namespace hstab
