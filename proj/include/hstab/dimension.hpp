#pragma once

// Dimension bookkeeping for the Heisenberg group H^n = C^n x R.

#include <cmath>
#include <stdexcept>

namespace hstab {

struct Dim {
  int n = 1;

  explicit Dim(int n_) : n(n_) {
    if (n_ < 1) throw std::invalid_argument("Dim: n must be >= 1");
  }

  // homogeneous dimension
  int Q() const { return 2 * n + 2; }

  // exponent of the critical semilinear equation, p = (Q+2)/(Q-2)
  double p() const { return double(Q() + 2) / double(Q() - 2); }

  // critical Sobolev exponent 2Q/(Q-2); equals p+1
  double crit() const { return 2.0 * double(Q()) / double(Q() - 2); }

  // surface area of the unit sphere S^{2n-1} in C^n: 2 pi^n / (n-1)!
  double sphere_area() const {
    double v = 2.0;
    for (int k = 1; k <= n; ++k) v *= M_PI;
    for (int k = 1; k <= n - 1; ++k) v /= double(k);
    return v;
  }

  // Haar volume of the box {0 <= |z| <= R} x {t_lo <= t <= t_hi}
  double box_volume(double R, double t_lo, double t_hi) const {
    return sphere_area() * std::pow(R, 2 * n) / double(2 * n) * (t_hi - t_lo);
  }
};

}  // namespace hstab
