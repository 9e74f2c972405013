#pragma once

// Heisenberg group H^n: points xi = (z, t) with z = x + iy in C^n, the group
// law, anisotropic dilations, the homogeneous gauge norm, and the conformal
// gauge transformations (scale + left translation) acting on points.

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include "hstab/dimension.hpp"

namespace hstab {

struct HPoint {
  Eigen::VectorXd x, y;  // Re z, Im z
  double t = 0.0;

  HPoint() = default;
  HPoint(Eigen::VectorXd x_, Eigen::VectorXd y_, double t_)
      : x(std::move(x_)), y(std::move(y_)), t(t_) {
    if (x.size() != y.size()) throw std::invalid_argument("HPoint: x/y size mismatch");
  }

  int n() const { return static_cast<int>(x.size()); }
  double z_sq() const { return x.squaredNorm() + y.squaredNorm(); }

  static HPoint origin(int n) {
    return HPoint(Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n), 0.0);
  }
};

// a o b: z = z_a + z_b, t = t_a + t_b + 2 Im(z_a . conj(z_b)).
inline HPoint compose(const HPoint& a, const HPoint& b) {
  double twist = 2.0 * (a.y.dot(b.x) - a.x.dot(b.y));
  return HPoint(a.x + b.x, a.y + b.y, a.t + b.t + twist);
}

inline HPoint inverse(const HPoint& a) { return HPoint(-a.x, -a.y, -a.t); }

// delta_mu(z, t) = (mu z, mu^2 t)
inline HPoint dilate(double mu, const HPoint& a) {
  return HPoint(mu * a.x, mu * a.y, mu * mu * a.t);
}

// |xi| = (|z|^4 + t^2)^{1/4}
inline double hnorm(const HPoint& a) {
  double zs = a.z_sq();
  return std::pow(zs * zs + a.t * a.t, 0.25);
}

// left-invariant distance d(a, b) = |b^{-1} o a|
inline double hdist(const HPoint& a, const HPoint& b) {
  return hnorm(compose(inverse(b), a));
}

// Conformal gauge g = (lambda, xi): acts on points by
//   phi_g(a) = delta_lambda(xi^{-1} o a),
// and on functions by (g.u)(a) = lambda^{(Q-2)/2} u(phi_g(a)).
struct Gauge {
  double lambda = 1.0;
  HPoint xi;

  Gauge() = default;
  Gauge(double l, HPoint c) : lambda(l), xi(std::move(c)) {
    if (!(l > 0.0)) throw std::invalid_argument("Gauge: lambda must be positive");
  }

  static Gauge identity(int n) { return Gauge(1.0, HPoint::origin(n)); }
};

inline HPoint gauge_apply(const Gauge& g, const HPoint& a) {
  return dilate(g.lambda, compose(inverse(g.xi), a));
}

// Composition matching operator order: the point action of the composite is
//   phi_{compose(g1,g2)} = phi_{g2} after phi_{g1}.
inline Gauge gauge_compose(const Gauge& g1, const Gauge& g2) {
  return Gauge(g1.lambda * g2.lambda, compose(g1.xi, dilate(1.0 / g1.lambda, g2.xi)));
}

inline Gauge gauge_inverse(const Gauge& g) {
  return Gauge(1.0 / g.lambda, dilate(g.lambda, inverse(g.xi)));
}

// Relative gauge g_i^{-1} g_j = (lambda_j / lambda_i, delta_{lambda_i}(xi_i^{-1} o xi_j)).
inline Gauge gauge_relative(const Gauge& gi, const Gauge& gj) {
  return gauge_compose(gauge_inverse(gi), gj);
}

// Interaction parameter eps_{ij} = min{ li/lj, lj/li, 1/(li lj d(xi_i, xi_j)^2) }.
// Invariant under a common gauge; symmetric; equals 1 for identical gauges.
inline double eps_pair(const Gauge& gi, const Gauge& gj) {
  double a = gi.lambda / gj.lambda;
  double b = gj.lambda / gi.lambda;
  double d = hdist(gi.xi, gj.xi);
  double m = std::min(a, b);
  if (d > 0.0) m = std::min(m, 1.0 / (gi.lambda * gj.lambda * d * d));
  return m;
}

}  // namespace hstab
