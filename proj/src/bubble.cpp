#include "hstab/bubble.hpp"

#include <array>
#include <map>
#include <mutex>

#include "hstab/errors.hpp"
#include "hstab/fd.hpp"

namespace hstab {

namespace {

// unnormalized profile w = ((1+|z|^2)^2 + t^2)^{-(Q-2)/4}
double profile_w(const Dim& dim, const HPoint& xi) {
  return std::pow(quartic_denom(xi.z_sq(), xi.t), -0.25 * (dim.Q() - 2));
}

// deterministic probe points spread over a moderate region
std::vector<HPoint> probe_points(int n) {
  std::vector<HPoint> pts;
  std::array<double, 8> xs = {0.0, 0.3, -0.5, 0.9, 0.2, -1.1, 0.6, -0.25};
  std::array<double, 8> ys = {0.0, -0.2, 0.4, 0.1, -0.8, 0.5, 1.2, -0.6};
  std::array<double, 8> ts = {0.0, 0.7, -0.3, 1.5, -2.1, 0.05, -0.9, 2.4};
  for (int k = 0; k < 8; ++k) {
    HPoint p = HPoint::origin(n);
    for (int j = 0; j < n; ++j) {
      p.x[j] = xs[(k + j) % 8];
      p.y[j] = ys[(k + 2 * j + 1) % 8];
    }
    p.t = ts[k];
    pts.push_back(p);
  }
  return pts;
}

}  // namespace

CalibrationResult calibrate_c0(const Dim& dim) {
  const double p = dim.p();
  RealField w = [&](const HPoint& xi) { return profile_w(dim, xi); };

  auto pts = probe_points(dim.n);
  double lo = 0.0, hi = 0.0, sum = 0.0;
  for (std::size_t k = 0; k < pts.size(); ++k) {
    double h = adaptive_step(pts[k], 0.02);
    double lap = sublap_fd(w, pts[k], h, /*richardson=*/true);
    double rho = -lap / std::pow(w(pts[k]), p);
    if (k == 0) {
      lo = hi = rho;
    } else {
      lo = std::min(lo, rho);
      hi = std::max(hi, rho);
    }
    sum += rho;
  }
  CalibrationResult res;
  res.points = static_cast<int>(pts.size());
  res.rho_mean = sum / double(res.points);
  res.rel_spread = (hi - lo) / res.rho_mean;
  if (!(res.rho_mean > 0.0) || res.rel_spread > 1e-6)
    throw NumericsError("calibrate_c0: -Delta w / w^p is not constant (spread " +
                        std::to_string(res.rel_spread) + ")");
  res.c0 = std::pow(res.rho_mean, 0.25 * (dim.Q() - 2));
  return res;
}

double bubble_c0(const Dim& dim) {
  static std::mutex mu;
  static std::map<int, double> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(dim.n);
  if (it != cache.end()) return it->second;
  double c0 = calibrate_c0(dim).c0;
  cache.emplace(dim.n, c0);
  return c0;
}

double eval_Z_base(const Dim& dim, int a, const HPoint& xi) {
  const int n = dim.n;
  const int Q = dim.Q();
  if (a < 1 || a > 2 * n + 2) throw std::invalid_argument("eval_Z_base: mode index out of range");
  double zs = xi.z_sq();
  double rho4 = quartic_denom(zs, xi.t);
  double pref = bubble_c0(dim) * std::pow(rho4, -0.25 * (Q + 2));
  double one_zs = 1.0 + zs;
  if (a <= n) {
    int j = a - 1;
    return (Q - 2) * pref * (xi.x[j] * one_zs - xi.y[j] * xi.t);
  }
  if (a <= 2 * n) {
    int j = a - n - 1;
    return (Q - 2) * pref * (xi.y[j] * one_zs + xi.x[j] * xi.t);
  }
  if (a == 2 * n + 1) return 0.5 * (Q - 2) * pref * xi.t;
  // dilation mode: (Q-2)/2 U + TU = (Q-2)/2 c0 rho4^{-(Q+2)/4} (1 - |z|^4 - t^2)
  return 0.5 * (Q - 2) * pref * (1.0 - zs * zs - xi.t * xi.t);
}

double eval_Z_axi(const Dim& dim, int a, double lambda, double t0, double r, double t) {
  const int n = dim.n;
  const int Q = dim.Q();
  if (a != 2 * n + 1 && a != 2 * n + 2)
    throw std::invalid_argument("eval_Z_axi: only the t-translation and dilation modes are axisymmetric");
  double lr = lambda * r;
  double lt = lambda * lambda * (t - t0);
  double zs = lr * lr;
  double rho4 = quartic_denom(zs, lt);
  double pref = bubble_c0(dim) * std::pow(rho4, -0.25 * (Q + 2));
  double base = (a == 2 * n + 1) ? 0.5 * (Q - 2) * pref * lt
                                 : 0.5 * (Q - 2) * pref * (1.0 - zs * zs - lt * lt);
  return std::pow(lambda, 0.5 * (Q - 2)) * base;
}

Eigen::VectorXd eval_XU_base(const Dim& dim, const HPoint& xi) {
  const int n = dim.n;
  const int Q = dim.Q();
  double zs = xi.z_sq();
  double rho4 = quartic_denom(zs, xi.t);
  double U = bubble_c0(dim) * std::pow(rho4, -0.25 * (Q - 2));
  double fac = -double(Q - 2) * U / rho4;
  double one_zs = 1.0 + zs;
  Eigen::VectorXd g(2 * n);
  for (int j = 0; j < n; ++j) {
    g[j] = fac * (xi.x[j] * one_zs + xi.y[j] * xi.t);
    g[j + n] = fac * (xi.y[j] * one_zs - xi.x[j] * xi.t);
  }
  return g;
}

double eval_TU(const Dim& dim, const HPoint& xi) {
  const int Q = dim.Q();
  double zs = xi.z_sq();
  double rho4 = quartic_denom(zs, xi.t);
  double U = bubble_c0(dim) * std::pow(rho4, -0.25 * (Q - 2));
  return -double(Q - 2) * (zs * (1.0 + zs) + xi.t * xi.t) / rho4 * U;
}

double BubbleConfig::sigma_axi(double r, double t) const {
  double c0 = bubble_c0(dim);
  double s = 0.0;
  for (const auto& g : gauges) s += eval_gauge_U_axi(dim, c0, g.lambda, g.xi.t, r, t);
  return s;
}

double BubbleConfig::f(const HPoint& xi) const {
  const double p = dim.p();
  double s = 0.0, sp = 0.0;
  for (const auto& g : gauges) {
    double u = eval_gauge_U(dim, g, xi);
    s += u;
    sp += std::pow(u, p);
  }
  return std::pow(s, p) - sp;
}

double BubbleConfig::f_axi(double r, double t) const {
  const double p = dim.p();
  double c0 = bubble_c0(dim);
  double s = 0.0, sp = 0.0;
  for (const auto& g : gauges) {
    double u = eval_gauge_U_axi(dim, c0, g.lambda, g.xi.t, r, t);
    s += u;
    sp += std::pow(u, p);
  }
  return std::pow(s, p) - sp;
}

}  // namespace hstab
