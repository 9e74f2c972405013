#pragma once

// Finite-difference derivatives along the horizontal vector fields
//   X_j     = d/dx_j + 2 y_j d/dt,
//   X_{j+n} = d/dy_j - 2 x_j d/dt.
// Left-invariant fields flow by right translation, and the flows are straight
// lines in coordinates, so directional derivatives reduce to 1-D stencils
// along xi o (s e_i). These serve as independent oracles for every closed-form
// derivative in the bubble module.

#include <functional>

#include "hstab/group.hpp"

namespace hstab {

using RealField = std::function<double(const HPoint&)>;

// xi o (s e_i) where e_i is the i-th horizontal coordinate direction, i in [0, 2n)
inline HPoint horizontal_flow(const HPoint& xi, int i, double s) {
  int n = xi.n();
  HPoint step = HPoint::origin(n);
  if (i < n)
    step.x[i] = s;
  else
    step.y[i - n] = s;
  return compose(xi, step);
}

// fourth-order 5-point second derivative along the flow of X_i
inline double x_second_fd(const RealField& F, const HPoint& xi, int i, double h) {
  double f0 = F(xi);
  double fp1 = F(horizontal_flow(xi, i, h));
  double fm1 = F(horizontal_flow(xi, i, -h));
  double fp2 = F(horizontal_flow(xi, i, 2.0 * h));
  double fm2 = F(horizontal_flow(xi, i, -2.0 * h));
  return (-fp2 + 16.0 * fp1 - 30.0 * f0 + 16.0 * fm1 - fm2) / (12.0 * h * h);
}

// fourth-order central first derivative along the flow of X_i
inline double x_first_fd(const RealField& F, const HPoint& xi, int i, double h) {
  double fp1 = F(horizontal_flow(xi, i, h));
  double fm1 = F(horizontal_flow(xi, i, -h));
  double fp2 = F(horizontal_flow(xi, i, 2.0 * h));
  double fm2 = F(horizontal_flow(xi, i, -2.0 * h));
  return (fm2 - 8.0 * fm1 + 8.0 * fp1 - fp2) / (12.0 * h);
}

// sub-Laplacian sum_i X_i^2 by finite differences; one Richardson level
// (h, h/2) upgrades the 5-point stencil to sixth order
inline double sublap_fd(const RealField& F, const HPoint& xi, double h, bool richardson = true) {
  int m = 2 * xi.n();
  double acc = 0.0;
  for (int i = 0; i < m; ++i) {
    double dh = x_second_fd(F, xi, i, h);
    if (richardson) {
      double dh2 = x_second_fd(F, xi, i, 0.5 * h);
      acc += (16.0 * dh2 - dh) / 15.0;
    } else {
      acc += dh;
    }
  }
  return acc;
}

// step scaled to the local scale of bubble-type profiles (they vary on the
// scale of the distance from the core)
inline double adaptive_step(const HPoint& xi, double h0 = 0.01) {
  return h0 * (1.0 + hnorm(xi));
}

}  // namespace hstab
