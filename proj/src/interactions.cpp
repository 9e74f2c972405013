#include "hstab/interactions.hpp"

#include <algorithm>
#include <cmath>

#include "hstab/errors.hpp"

namespace hstab {

namespace {

struct GlRule {
  std::vector<double> x, w;
};

// nodes and weights of the k-point Gauss-Legendre rule on [-1, 1]
GlRule gl_rule(int k) {
  GlRule rule;
  rule.x.assign(k, 0.0);
  rule.w.assign(k, 0.0);
  for (int i = 0; i < (k + 1) / 2; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (k + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int j = 2; j <= k; ++j) {
        double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      pp = k * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    rule.x[i] = -x;
    rule.x[k - 1 - i] = x;
    rule.w[i] = rule.w[k - 1 - i] = 2.0 / ((1.0 - x * x) * pp * pp);
  }
  return rule;
}

std::vector<double> bisect_panels(const std::vector<double>& b) {
  std::vector<double> out;
  out.reserve(2 * b.size());
  for (std::size_t i = 0; i + 1 < b.size(); ++i) {
    out.push_back(b[i]);
    out.push_back(0.5 * (b[i] + b[i + 1]));
  }
  out.push_back(b.back());
  return out;
}

// panel nodes and weights, the r-direction carrying omega r^{2n-1}
struct NodeLine {
  std::vector<double> x, w;
};

NodeLine line_nodes(const std::vector<double>& breaks, const GlRule& gl) {
  NodeLine line;
  line.x.reserve((breaks.size() - 1) * gl.x.size());
  line.w.reserve(line.x.capacity());
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    double h = 0.5 * (breaks[i + 1] - breaks[i]);
    double c = 0.5 * (breaks[i + 1] + breaks[i]);
    if (!(h > 0.0)) continue;
    for (std::size_t j = 0; j < gl.x.size(); ++j) {
      line.x.push_back(c + h * gl.x[j]);
      line.w.push_back(h * gl.w[j]);
    }
  }
  return line;
}

double quad_pass(const Dim& dim, const std::function<double(double, double)>& F,
                 const std::vector<double>& rb, const std::vector<double>& tb, const GlRule& gl) {
  NodeLine rline = line_nodes(rb, gl);
  NodeLine tline = line_nodes(tb, gl);
  const double omega = dim.sphere_area();
  const int m = 2 * dim.n - 1;
  double total = 0.0;
  for (std::size_t i = 0; i < rline.x.size(); ++i) {
    double r = rline.x[i];
    double wr = omega * rline.w[i] * std::pow(r, m);
    double row = 0.0;
    for (std::size_t j = 0; j < tline.x.size(); ++j) row += tline.w[j] * F(r, tline.x[j]);
    total += wr * row;
  }
  return total;
}

// padded (r, t) panel sets adapted to the cores of a t-axis configuration
struct AxiDomain {
  std::vector<double> rb, tb;
};

AxiDomain bubble_domain(const std::vector<Gauge>& gauges, double pad) {
  double D = 1.0, t_lo = 0.0, t_hi = 0.0;
  std::vector<std::array<double, 2>> rc, tc;
  for (const Gauge& g : gauges) {
    double s = 1.0 / g.lambda;
    double t0 = g.xi.t;
    D = std::max({D, s, hnorm(g.xi)});
    t_lo = std::min(t_lo, t0);
    t_hi = std::max(t_hi, t0);
    rc.push_back({0.0, s});
    tc.push_back({t0, s * s});
  }
  double R = pad * D;
  AxiDomain dom;
  dom.rb = graded_breaks(0.0, R, rc);
  dom.tb = graded_breaks(t_lo - R * R, t_hi + R * R, tc);
  return dom;
}

void require_axis(const std::vector<Gauge>& gauges) {
  for (const Gauge& g : gauges)
    if (!on_axis(g)) throw std::invalid_argument("configuration must lie on the t-axis");
}

constexpr double kPairPad = 25.0;

}  // namespace

std::vector<double> graded_breaks(double lo, double hi,
                                  const std::vector<std::array<double, 2>>& centers_scales,
                                  double growth) {
  if (!(hi > lo)) throw std::invalid_argument("graded_breaks: empty interval");
  if (!(growth > 1.0)) throw std::invalid_argument("graded_breaks: growth must exceed 1");
  std::vector<double> pts = {lo, hi};
  double span = hi - lo;
  for (const auto& cs : centers_scales) {
    double c = cs[0], s = cs[1];
    if (!(s > 0.0)) throw std::invalid_argument("graded_breaks: scale must be positive");
    if (c > lo && c < hi) pts.push_back(c);
    for (int sgn : {-1, 1}) {
      double off = 0.0, step = 0.5 * s;
      while (off < 2.0 * span) {
        off += step;
        step *= growth;
        double x = c + sgn * off;
        if (x <= lo || x >= hi) break;
        pts.push_back(x);
      }
    }
  }
  std::sort(pts.begin(), pts.end());
  std::vector<double> out;
  double min_sep = 1e-12 * span;
  for (double x : pts)
    if (out.empty() || x - out.back() > min_sep) out.push_back(x);
  if (out.back() < hi) out.push_back(hi);
  out.back() = hi;
  return out;
}

QuadResult quad2d_axi(const Dim& dim, const std::function<double(double, double)>& F,
                      std::vector<double> r_breaks, std::vector<double> t_breaks, double rel_tol,
                      int gl_order) {
  if (r_breaks.size() < 2 || t_breaks.size() < 2)
    throw std::invalid_argument("quad2d_axi: need at least one panel per direction");
  if (gl_order < 2 || gl_order > 32) throw std::invalid_argument("quad2d_axi: bad rule order");
  GlRule gl = gl_rule(gl_order);
  double prev = quad_pass(dim, F, r_breaks, t_breaks, gl);
  for (int level = 0; level < 3; ++level) {
    r_breaks = bisect_panels(r_breaks);
    t_breaks = bisect_panels(t_breaks);
    double cur = quad_pass(dim, F, r_breaks, t_breaks, gl);
    double err = std::abs(cur - prev) / std::max(std::abs(cur), 1e-300);
    if (err <= rel_tol) return {cur, err};
    prev = cur;
  }
  throw NumericsError("quad2d_axi: panel refinement did not stabilize");
}

double single_power_integral(double alpha, const Dim& dim, double rel_tol) {
  double tail_exp = alpha * (dim.Q() - 2) - dim.Q();
  if (!(tail_exp > 0.5))
    throw std::invalid_argument("single_power_integral: power decays too slowly");
  // truncation radius with tail below the requested tolerance
  double pad = std::min(1e5, std::max(50.0, std::pow(0.1 * rel_tol, -1.0 / tail_exp)));
  AxiDomain dom = bubble_domain({Gauge::identity(dim.n)}, pad);
  double c0 = bubble_c0(dim);
  double e = -0.25 * (dim.Q() - 2) * alpha;
  auto F = [&](double r, double t) { return std::pow(c0, alpha) * std::pow(quartic_denom(r * r, t), e); };
  return quad2d_axi(dim, F, dom.rb, dom.tb, rel_tol).value;
}

QuadResult pair_integral(double alpha, double beta, const Gauge& g1, const Gauge& g2,
                         const Dim& dim, double rel_tol) {
  if (!(alpha > 0.0) || !(beta > 0.0))
    throw std::invalid_argument("pair_integral: exponents must be positive");
  if (std::abs(alpha + beta - dim.crit()) > 1e-9)
    throw std::invalid_argument("pair_integral: exponents must sum to 2Q/(Q-2)");
  require_axis({g1, g2});
  const double c0 = bubble_c0(dim);
  AxiDomain dom = bubble_domain({g1, g2}, kPairPad);
  auto F = [&, c0](double r, double t) {
    double u1 = eval_gauge_U_axi(dim, c0, g1.lambda, g1.xi.t, r, t);
    double u2 = eval_gauge_U_axi(dim, c0, g2.lambda, g2.xi.t, r, t);
    return std::pow(u1, alpha) * std::pow(u2, beta);
  };
  return quad2d_axi(dim, F, dom.rb, dom.tb, rel_tol);
}

QuadResult pair_integral(double alpha, double beta, double lambda, double t0, const Dim& dim,
                         double rel_tol) {
  HPoint c = HPoint::origin(dim.n);
  c.t = t0;
  return pair_integral(alpha, beta, Gauge::identity(dim.n), Gauge(lambda, c), dim, rel_tol);
}

LeadingConstant pair_leading_constant(double alpha, double beta, double lambda, double t0,
                                      const Dim& dim) {
  if (!(alpha > beta))
    throw std::invalid_argument("pair_leading_constant: needs alpha > beta");
  QuadResult full = pair_integral(alpha, beta, lambda, t0, dim, 1e-3);
  double c_alpha = single_power_integral(alpha, dim, 1e-4);
  HPoint c = HPoint::origin(dim.n);
  c.t = t0;
  double at_center = eval_gauge_U(dim, Gauge(lambda, c), HPoint::origin(dim.n));
  LeadingConstant out;
  out.computed = full.value;
  out.predicted = c_alpha * std::pow(at_center, beta);
  out.err_estimate = full.err_estimate + 1e-4;
  return out;
}

double zmode_ratio(double lambda, double t_sep, const Dim& dim) {
  if (!(lambda > 0.0) || lambda > 1.0)
    throw std::invalid_argument("zmode_ratio: needs 0 < lambda <= 1");
  const double c0 = bubble_c0(dim);
  const double p = dim.p();
  const int a_dil = 2 * dim.n + 2;
  HPoint c = HPoint::origin(dim.n);
  c.t = t_sep;
  Gauge g2(lambda, c);
  AxiDomain dom = bubble_domain({Gauge::identity(dim.n), g2}, kPairPad);
  auto num_F = [&](double r, double t) {
    double u = eval_gauge_U_axi(dim, c0, 1.0, 0.0, r, t);
    double ui = eval_gauge_U_axi(dim, c0, lambda, t_sep, r, t);
    return std::pow(u, p - 1.0) * ui * eval_Z_axi(dim, a_dil, 1.0, 0.0, r, t);
  };
  auto den_F = [&](double r, double t) {
    double u = eval_gauge_U_axi(dim, c0, 1.0, 0.0, r, t);
    double ui = eval_gauge_U_axi(dim, c0, lambda, t_sep, r, t);
    return std::pow(u, p) * ui;
  };
  QuadResult num = quad2d_axi(dim, num_F, dom.rb, dom.tb, 1e-3);
  QuadResult den = quad2d_axi(dim, den_F, dom.rb, dom.tb, 1e-3);
  return num.value / den.value;
}

QuadResult f_lp_norm(const BubbleConfig& config, double rel_tol) {
  if (config.gauges.size() != 2) throw std::invalid_argument("f_lp_norm: needs two bubbles");
  require_axis(config.gauges);
  const Dim& dim = config.dim;
  const double e = 2.0 * dim.Q() / (dim.Q() + 2.0);
  AxiDomain dom = bubble_domain(config.gauges, kPairPad);
  auto F = [&](double r, double t) { return std::pow(std::abs(config.f_axi(r, t)), e); };
  return quad2d_axi(dim, F, dom.rb, dom.tb, rel_tol);
}

McEstimate kernel_double_norm(const BubbleConfig& config, double c_q, const KernelMcOptions& opt) {
  if (config.gauges.size() != 2)
    throw std::invalid_argument("kernel_double_norm: needs two bubbles");
  if (!(c_q > 0.0)) throw std::invalid_argument("kernel_double_norm: kernel constant");
  if (opt.samples < 1000) throw std::invalid_argument("kernel_double_norm: sample budget");
  const Dim& dim = config.dim;
  const Gauge& g1 = config.gauges[0];
  const Gauge& g2 = config.gauges[1];
  const int Q = dim.Q();

  HMixtureSampler M(dim,
                    {{g1.xi, 1.0 / g1.lambda, 0.5}, {g2.xi, 1.0 / g2.lambda, 0.5}}, opt.rho_min,
                    opt.rho_max);
  double d12 = hdist(g1.xi, g2.xi);
  double smax = 4.0 * std::max({1.0, d12, 1.0 / g1.lambda, 1.0 / g2.lambda});
  const double amass = angular_mass(dim);
  // displacement radius with linear density on (0, smax]: the resulting
  // pair density cancels the kernel singularity exactly
  auto disp_pdf = [&](double s) {
    if (!(s > 0.0) || s >= smax) return 0.0;
    return (2.0 * s / (smax * smax)) / (amass * std::pow(s, Q - 1));
  };
  auto P = [&](const HPoint& xi) {
    return eval_gauge_U(dim, g1, xi) * eval_gauge_U(dim, g2, xi);
  };

  Rng rng(opt.seed);
  double sum = 0.0, sumsq = 0.0;
  for (long k = 0; k < opt.samples; ++k) {
    HPoint xi = M.draw(rng);
    HPoint eta;
    if (rng.uniform() < 0.5) {
      eta = M.draw(rng);
    } else {
      double s = smax * std::sqrt(rng.uniform());
      eta = compose(xi, dilate(s, draw_unit_sphere(dim, rng)));
      if (rng.uniform() < 0.5) std::swap(xi, eta);
    }
    double d = hdist(xi, eta);
    if (!(d > 0.0)) continue;
    double q = 0.5 * M.pdf(xi) * M.pdf(eta) +
               0.25 * (M.pdf(xi) + M.pdf(eta)) * disp_pdf(d);
    if (!(q > 0.0)) continue;
    double X = P(xi) * P(eta) * std::pow(d, 2 - Q) / q;
    sum += X;
    sumsq += X * X;
  }
  McEstimate est;
  est.samples = opt.samples;
  est.value = c_q * sum / opt.samples;
  double mean = sum / opt.samples;
  double var = std::max(0.0, sumsq / opt.samples - mean * mean);
  est.std_error = c_q * std::sqrt(var / opt.samples);
  if (est.std_error > opt.max_rel_std_error * std::abs(est.value))
    throw NumericsError("kernel_double_norm: relative standard error " +
                        std::to_string(est.std_error / std::abs(est.value)));
  return est;
}

PairingBound pairing_lower_bound(const BubbleConfig& config) {
  if (config.gauges.size() != 2)
    throw std::invalid_argument("pairing_lower_bound: needs two bubbles");
  require_axis(config.gauges);
  const Dim& dim = config.dim;
  double eps = eps_pair(config.gauges[0], config.gauges[1]);
  double a = 0.25 / std::sqrt(eps);
  double b = 0.5 / std::sqrt(eps);
  // C^2 radial profile: 1 inside a, quintic step down to 0 at b
  auto S = [a, b](double rho) {
    if (rho <= a) return 1.0;
    if (rho >= b) return 0.0;
    double s = (rho - a) / (b - a);
    return 1.0 - s * s * s * (10.0 + s * (-15.0 + 6.0 * s));
  };
  auto Sp = [a, b](double rho) {
    if (rho <= a || rho >= b) return 0.0;
    double s = (rho - a) / (b - a);
    return -30.0 * s * s * (1.0 - s) * (1.0 - s) / (b - a);
  };
  std::vector<std::array<double, 2>> rc = {{0.0, 1.0}, {a, 0.1 * (b - a)}, {b, 0.1 * (b - a)}};
  std::vector<std::array<double, 2>> tc = {{0.0, 1.0},
                                           {a * a, 0.1 * (b - a) * (b - a)},
                                           {-a * a, 0.1 * (b - a) * (b - a)}};
  std::vector<double> rb = graded_breaks(0.0, b, rc);
  std::vector<double> tb = graded_breaks(-b * b, b * b, tc);
  auto hn = [](double r, double t) { return std::pow(r * r * r * r + t * t, 0.25); };
  auto pairing_F = [&](double r, double t) { return config.f_axi(r, t) * S(hn(r, t)); };
  auto energy_F = [&](double r, double t) {
    double rho = hn(r, t);
    if (rho <= 0.0) return 0.0;
    double d = Sp(rho) * r / rho;
    return d * d;
  };
  PairingBound out;
  out.pairing = quad2d_axi(dim, pairing_F, rb, tb, 5e-3).value;
  out.eta_norm = std::sqrt(quad2d_axi(dim, energy_F, rb, tb, 5e-3).value);
  out.value = out.pairing / out.eta_norm;
  return out;
}

double expansion_check(const BubbleConfig& config) {
  require_axis(config.gauges);
  const Dim& dim = config.dim;
  const double c0 = bubble_c0(dim);
  const double p = dim.p();
  const int a_dil = 2 * dim.n + 2;
  const std::size_t m = config.gauges.size();
  if (m < 2) return 0.0;
  double eps = config.max_eps();
  double scale = std::pow(eps, 0.5 * (dim.Q() - 2));
  AxiDomain dom = bubble_domain(config.gauges, kPairPad);
  double worst = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    const Gauge& gk = config.gauges[k];
    auto Zk = [&](double r, double t) {
      return eval_Z_axi(dim, a_dil, gk.lambda, gk.xi.t, r, t);
    };
    auto lhs_F = [&](double r, double t) { return config.f_axi(r, t) * Zk(r, t); };
    double lhs = quad2d_axi(dim, lhs_F, dom.rb, dom.tb, 1e-3).value;
    double rhs = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      if (i == k) continue;
      const Gauge& gi = config.gauges[i];
      auto cross_F = [&](double r, double t) {
        double uk = eval_gauge_U_axi(dim, c0, gk.lambda, gk.xi.t, r, t);
        double ui = eval_gauge_U_axi(dim, c0, gi.lambda, gi.xi.t, r, t);
        return std::pow(uk, p - 1.0) * ui * Zk(r, t);
      };
      rhs += quad2d_axi(dim, cross_F, dom.rb, dom.tb, 1e-3).value;
    }
    worst = std::max(worst, std::abs(lhs - p * rhs) / scale);
  }
  return worst;
}

ScalingReport fit_slope(std::vector<ScalingPoint> points) {
  if (points.size() < 4) throw std::invalid_argument("fit_slope: needs at least 4 points");
  double emin = 1e300, emax = 0.0;
  for (const auto& pt : points) {
    if (!(pt.eps > 0.0) || !(pt.value > 0.0))
      throw std::invalid_argument("fit_slope: eps and value must be positive");
    emin = std::min(emin, pt.eps);
    emax = std::max(emax, pt.eps);
  }
  if (std::log10(emax / emin) < 1.5 - 1e-9)
    throw std::invalid_argument("fit_slope: points must span 1.5 decades");

  ScalingReport rep;
  rep.points = points;
  double best_sse = 0.0, base_sse = 0.0;
  for (double q : {0.0, 0.5, 1.0}) {
    // regress log v - q log|log eps| on {1, log eps}
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double N = double(points.size());
    for (const auto& pt : points) {
      double x = std::log(pt.eps);
      double y = std::log(pt.value) - q * std::log(std::abs(std::log(pt.eps)));
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    double det = N * sxx - sx * sx;
    double slope = (N * sxy - sx * sy) / det;
    double icept = (sy - slope * sx) / N;
    double sse = 0.0;
    for (const auto& pt : points) {
      double x = std::log(pt.eps);
      double y = std::log(pt.value) - q * std::log(std::abs(std::log(pt.eps)));
      double res = y - icept - slope * x;
      sse += res * res;
    }
    if (q == 0.0) {
      base_sse = sse;
      best_sse = sse;
      rep.slope = slope;
      rep.intercept = icept;
      rep.log_q = 0.0;
    } else if (sse < 0.5 * base_sse && sse < best_sse) {
      best_sse = sse;
      rep.slope = slope;
      rep.intercept = icept;
      rep.log_q = q;
    }
  }
  rep.residual = std::sqrt(best_sse / double(points.size()));
  return rep;
}

ScalingReport fit_slope(std::vector<ScalingPoint> points, std::string quantity, double predicted,
                        double tolerance, char sense) {
  ScalingReport rep = fit_slope(std::move(points));
  rep.quantity = std::move(quantity);
  rep.predicted = predicted;
  rep.tolerance = tolerance;
  rep.sense = sense;
  switch (sense) {
    case '=':
      rep.pass = std::abs(rep.slope - predicted) <= tolerance;
      break;
    case '>':
      rep.pass = rep.slope >= predicted - tolerance;
      break;
    case '<':
      rep.pass = rep.slope <= predicted + tolerance;
      break;
    default:
      throw std::invalid_argument("fit_slope: sense must be one of =, >, <");
  }
  return rep;
}

}  // namespace hstab
