#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "hstab/interactions.hpp"
#include "hstab/mc.hpp"
#include "hstab/pde_solver.hpp"

using namespace hstab;

namespace {

BubbleConfig two_on_axis(const Dim& dim, double lambda2, double t2) {
  HPoint c = HPoint::origin(dim.n);
  c.t = t2;
  return BubbleConfig(dim, {Gauge::identity(dim.n), Gauge(lambda2, c)});
}

}  // namespace

TEST_CASE("coincident bubbles reproduce the closed-form critical mass") {
  Dim d1(1);
  // alpha + beta = 4 and both gauges equal: the integral is the full critical
  // mass 4 pi^2, independent of the (alpha, beta) split
  auto a = pair_integral(3.0, 1.0, 1.0, 0.0, d1, 1e-3);
  auto b = pair_integral(2.5, 1.5, 1.0, 0.0, d1, 1e-3);
  const double mass = 4.0 * M_PI * M_PI;
  CHECK(std::abs(a.value - mass) / mass < 2e-5);
  CHECK(std::abs(b.value - a.value) / mass < 1e-9);

  const double single = single_power_integral(3.0, d1, 1e-5);
  CHECK(std::abs(single - 16.0 * M_PI) / (16.0 * M_PI) < 1e-4);
}

TEST_CASE("pair integral is invariant under a common gauge change") {
  Dim d1(1);
  HPoint c = HPoint::origin(1);
  c.t = -6.0;
  Gauge g1 = Gauge::identity(1);
  Gauge g2(1.4, c);

  HPoint hc = HPoint::origin(1);
  hc.t = 0.7;
  Gauge h(2.0, hc);

  auto base = pair_integral(3.0, 1.0, g1, g2, d1, 1e-3);
  auto moved = pair_integral(3.0, 1.0, gauge_compose(h, g1), gauge_compose(h, g2), d1, 1e-3);
  CHECK(std::abs(moved.value - base.value) / base.value < 5e-3);
}

TEST_CASE("cross term of two separating bubbles scales like the pair parameter") {
  Dim d1(1);
  std::vector<ScalingPoint> pts;
  for (double eps : {1e-1, 5e-2, 2e-2, 1e-2, 5e-3, 2e-3, 1e-3}) {
    auto q = pair_integral(3.0, 1.0, 1.0, -1.0 / eps, d1, 1e-3);
    pts.push_back({eps, q.value, q.err_estimate});
  }
  auto rep = fit_slope(pts, "pair(3,1)", 1.0, 0.05);
  CHECK(rep.pass);
  CHECK(rep.slope == doctest::Approx(1.0).epsilon(0.05));
  CHECK(rep.log_q == 0.0);
}

TEST_CASE("quadrature pair integral agrees with a Monte Carlo estimate") {
  Dim d1(1);
  const double t0 = -20.0;
  auto quad = pair_integral(3.0, 1.0, 1.0, t0, d1, 1e-3);

  HPoint c = HPoint::origin(1);
  c.t = t0;
  HMixtureSampler S(d1, {{HPoint::origin(1), 1.0, 0.5}, {c, 1.0, 0.5}});
  Rng rng(42);
  auto mc = mc_integral(
      [&](const HPoint& xi) {
        double u = eval_U(d1, xi);
        double v = eval_gauge_U(d1, Gauge(1.0, c), xi);
        return u * u * u * v;
      },
      S, rng, 400000);
  CHECK(std::abs(mc.value - quad.value) < std::max(4.0 * mc.std_error, 0.02 * quad.value));
}

TEST_CASE("separated pair integral approaches its predicted leading constant") {
  Dim d1(1);
  // widening separation at fixed scales
  double prev = 1e9;
  for (double eps : {1e-1, 1e-2, 1e-3}) {
    auto lc = pair_leading_constant(3.0, 1.0, 1.0, -1.0 / eps, d1);
    double dev = std::abs(lc.computed / lc.predicted - 1.0);
    CHECK(dev < prev);
    prev = dev;
  }
  CHECK(prev < 0.01);

  // shrinking second bubble at fixed separation
  auto lc = pair_leading_constant(3.0, 1.0, 1e-3, 3.0, d1);
  CHECK(std::abs(lc.computed / lc.predicted - 1.0) < 0.01);
}

TEST_CASE("dilation-mode cross ratio approaches the dimensional limit") {
  Dim d1(1), d2(2);
  const double lim1 = -1.0 / 3.0;  // -(Q-2)^2 / (2(Q+2)) at Q = 4
  const double lim2 = -1.0;        // at Q = 6

  double prev = 1e9;
  for (double eps : {1e-1, 1e-2, 1e-3}) {
    double dev = std::abs(zmode_ratio(1.0, 1.0 / eps, d1) - lim1);
    CHECK(dev < prev);
    prev = dev;
  }
  CHECK(prev < 0.005);

  prev = 1e9;
  for (double eps : {1e-1, 1e-2, 1e-3}) {
    double dev = std::abs(zmode_ratio(1.0, 1.0 / eps, d2) - lim2);
    CHECK(dev < prev);
    prev = dev;
  }
  CHECK(prev < 0.005);

  // the limit does not depend on the common scale
  CHECK(zmode_ratio(0.5, 1e3, d1) == doctest::Approx(lim1).epsilon(0.01));

  CHECK_THROWS_AS(zmode_ratio(1.5, 10.0, d1), std::invalid_argument);
}

TEST_CASE("coincident nonlinear remainder matches its closed form") {
  Dim d3(3);
  // two equal bubbles on top of each other: f = ((2U)^p - 2U^p) pointwise,
  // so the L^{2Q/(Q+2)} mass is (2^p - 2)^{2Q/(Q+2)} times the critical mass
  BubbleConfig cfg(d3, {Gauge::identity(3), Gauge::identity(3)});
  auto v = f_lp_norm(cfg, 1e-3);
  const double p = d3.p();
  const double e = 2.0 * d3.Q() / (d3.Q() + 2.0);
  const double expected =
      std::pow(std::pow(2.0, p) - 2.0, e) * single_power_integral(d3.crit(), d3, 1e-5);
  CHECK(v.value == doctest::Approx(expected).epsilon(1e-3));
}

TEST_CASE("nonlinear remainder mass decays at least like the half-dimension power") {
  Dim d3(3);
  std::vector<ScalingPoint> pts;
  for (double eps : {1e-1, 5e-2, 2e-2, 1e-2, 5e-3, 2e-3, 1e-3}) {
    auto q = f_lp_norm(two_on_axis(d3, 1.0, -1.0 / eps), 1e-3);
    pts.push_back({eps, q.value, q.err_estimate});
  }
  auto rep = fit_slope(pts, "remainder mass", 4.0, 0.0, '>');
  CHECK(rep.pass);
  CHECK(rep.slope >= 4.0);
  CHECK(rep.residual <= 0.1);

  // Monte Carlo cross-check at one separation
  const double eps = 0.05;
  auto cfg = two_on_axis(d3, 1.0, -1.0 / eps);
  auto quad = f_lp_norm(cfg, 1e-3);
  HPoint c = HPoint::origin(3);
  c.t = -1.0 / eps;
  HMixtureSampler S(d3, {{HPoint::origin(3), 1.0, 0.5}, {c, 1.0, 0.5}});
  Rng rng(43);
  const double e = 2.0 * d3.Q() / (d3.Q() + 2.0);
  auto mc = mc_integral([&](const HPoint& xi) { return std::pow(std::abs(cfg.f(xi)), e); }, S,
                        rng, 400000);
  CHECK(std::abs(mc.value - quad.value) < std::max(4.0 * mc.std_error, 0.05 * quad.value));
}

TEST_CASE("kernel norm is swap-symmetric and matches the Poisson route") {
  Dim d2(2);
  const double eps = 0.05;
  auto cfg = two_on_axis(d2, 1.0, -1.0 / eps);

  auto green = green_calibrate(d2);
  KernelMcOptions opt;
  opt.samples = 800000;
  opt.max_rel_std_error = 0.05;
  auto kd = kernel_double_norm(cfg, green.c_q, opt);

  // listing the gauges in the other order must not move the estimate
  HPoint c = HPoint::origin(2);
  c.t = -1.0 / eps;
  BubbleConfig swapped(d2, {Gauge(1.0, c), Gauge::identity(2)});
  KernelMcOptions opt2 = opt;
  opt2.seed = 99;
  auto kd2 = kernel_double_norm(swapped, green.c_q, opt2);
  CHECK(std::abs(kd2.value - kd.value) <= 3.0 * (kd.std_error + kd2.std_error));

  // independent route: solve the Poisson problem on a grid and square the
  // norm of the same bubble product
  auto grid = grid_for_config(cfg, 160, 10.0);
  const double c0 = bubble_c0(d2);
  GridFn uv = sample(grid, [&](double r, double t) {
    return eval_gauge_U_axi(d2, c0, 1.0, 0.0, r, t) *
           eval_gauge_U_axi(d2, c0, 1.0, -1.0 / eps, r, t);
  });
  SolverConfig scfg;
  PoissonSolver solver(grid, scfg);
  double nrm = solver.dminus1_norm(uv);
  CHECK(kd.value == doctest::Approx(nrm * nrm).epsilon(0.10));
}

TEST_CASE("cutoff pairing gives a genuine lower bound with the predicted cutoff norm decay") {
  Dim d3(3);
  std::vector<ScalingPoint> bound_pts, eta_pts;
  for (double eps : {1e-1, 5e-2, 2e-2, 1e-2, 5e-3, 2e-3}) {
    auto pb = pairing_lower_bound(two_on_axis(d3, 1.0, -1.0 / eps));
    bound_pts.push_back({eps, pb.value, 0.0});
    eta_pts.push_back({eps, pb.eta_norm, 0.0});
  }
  // the cutoff lives at scale eps^{-1/2}: its energy norm scales as eps^{(2-Q)/4}
  auto eta_rep = fit_slope(eta_pts);
  CHECK(eta_rep.slope == doctest::Approx(-1.5).epsilon(0.10));

  auto bound_rep = fit_slope(bound_pts);
  CHECK(bound_rep.slope >= 1.5);
  CHECK(bound_rep.slope <= 2.7);

  // duality: the pairing bound must sit below the actual dual norm, and not
  // vacuously so
  const double eps = 0.05;
  auto cfg = two_on_axis(d3, 1.0, -1.0 / eps);
  auto pb = pairing_lower_bound(cfg);
  auto grid = grid_for_config(cfg, 128, 10.0);
  GridFn f = sample(grid, [&](double r, double t) { return cfg.f_axi(r, t); });
  SolverConfig scfg;
  PoissonSolver solver(grid, scfg);
  double nrm = solver.dminus1_norm(f);
  CHECK(pb.value <= nrm);
  CHECK(pb.value >= 0.05 * nrm);
}

TEST_CASE("interaction expansion of the nonlinear term") {
  Dim d1(1);

  SUBCASE("a single bubble has no cross terms") {
    BubbleConfig cfg(d1, {Gauge::identity(1)});
    CHECK(expansion_check(cfg) == 0.0);
  }

  SUBCASE("two bubbles: the normalized residual decreases, the relative one vanishes") {
    double prev = 1e18;
    for (double eps : {1e-1, 1e-2, 1e-3}) {
      double v = expansion_check(two_on_axis(d1, 1.0, -1.0 / eps));
      CHECK(v < prev);
      prev = v;
    }

    // recompute both sides at the smallest separation to form the relative
    // residual, which must be under 10%
    const double eps = 1e-3;
    auto cfg = two_on_axis(d1, 1.0, -1.0 / eps);
    const double c0 = bubble_c0(d1);
    const double p = d1.p();
    const double R = 25.0 * std::sqrt(1.0 / eps);
    auto rb = graded_breaks(0.0, R, {{0.0, 1.0}});
    auto tb = graded_breaks(-1.0 / eps - R * R, R * R, {{0.0, 1.0}, {-1.0 / eps, 1.0}});
    auto lhs = quad2d_axi(
        d1, [&](double r, double t) { return cfg.f_axi(r, t) * eval_Z_axi(d1, 4, 1.0, 0.0, r, t); },
        rb, tb, 1e-3);
    auto rhs = quad2d_axi(
        d1,
        [&](double r, double t) {
          double uk = eval_gauge_U_axi(d1, c0, 1.0, 0.0, r, t);
          double ui = eval_gauge_U_axi(d1, c0, 1.0, -1.0 / eps, r, t);
          return std::pow(uk, p - 1.0) * ui * eval_Z_axi(d1, 4, 1.0, 0.0, r, t);
        },
        rb, tb, 1e-3);
    CHECK(std::abs(lhs.value - p * rhs.value) / std::abs(p * rhs.value) < 0.1);
  }

  SUBCASE("three bubbles") {
    auto make = [&](double eps) {
      HPoint up = HPoint::origin(1), dn = HPoint::origin(1);
      up.t = 1.0 / eps;
      dn.t = -1.0 / eps;
      return BubbleConfig(d1, {Gauge::identity(1), Gauge(1.0, up), Gauge(1.0, dn)});
    };
    CHECK(expansion_check(make(1e-3)) < expansion_check(make(1e-1)));
  }
}

TEST_CASE("slope fitting") {
  auto synth = [](double C, double power, double logq, double wiggle) {
    std::vector<ScalingPoint> pts;
    int k = 0;
    for (double eps : {1e-1, 5e-2, 2e-2, 1e-2, 5e-3, 2e-3, 1e-3}) {
      double v = C * std::pow(eps, power) * std::pow(std::abs(std::log(eps)), logq);
      v *= 1.0 + wiggle * std::sin(1.0 + 2.0 * k++);
      pts.push_back({eps, v, 0.0});
    }
    return pts;
  };

  SUBCASE("exact power law is recovered to machine precision") {
    auto rep = fit_slope(synth(3.7, 2.0, 0.0, 0.0));
    CHECK(rep.slope == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(rep.log_q == 0.0);
    CHECK(rep.residual < 1e-12);
  }

  SUBCASE("logarithmic correction is detected") {
    auto rep = fit_slope(synth(3.7, 2.0, 1.0, 0.0));
    CHECK(rep.log_q == 1.0);
    CHECK(rep.slope == doctest::Approx(2.0).epsilon(1e-6));
  }

  SUBCASE("one percent noise moves the slope by at most two percent") {
    auto rep = fit_slope(synth(3.7, 2.0, 0.0, 0.01));
    CHECK(rep.slope == doctest::Approx(2.0).epsilon(0.02));
  }

  SUBCASE("verdict senses") {
    auto pts = synth(1.0, 2.0, 0.0, 0.0);
    CHECK(fit_slope(pts, "q", 2.0, 0.05).pass);
    CHECK(fit_slope(pts, "q", 1.5, 0.0, '>').pass);
    CHECK(fit_slope(pts, "q", 2.5, 0.0, '<').pass);
    CHECK_FALSE(fit_slope(pts, "q", 2.5, 0.0, '>').pass);
    CHECK_THROWS_AS(fit_slope(pts, "q", 2.0, 0.05, 'x'), std::invalid_argument);
  }

  SUBCASE("input validation") {
    auto pts = synth(1.0, 2.0, 0.0, 0.0);
    std::vector<ScalingPoint> three(pts.begin(), pts.begin() + 3);
    CHECK_THROWS_AS(fit_slope(three), std::invalid_argument);

    auto bad = pts;
    bad[2].value = -bad[2].value;
    CHECK_THROWS_AS(fit_slope(bad), std::invalid_argument);

    std::vector<ScalingPoint> narrow = {{1e-1, 1.0, 0.0}, {8e-2, 1.0, 0.0}, {6e-2, 1.0, 0.0},
                                        {5e-2, 1.0, 0.0}};
    CHECK_THROWS_AS(fit_slope(narrow), std::invalid_argument);
  }
}

TEST_CASE("translation-mode integrals vanish by parity") {
  Dim d1(1);
  // integrand (gauge bubble)^p times its first translation mode is exactly
  // odd under z -> -z, a group rotation that fixes on-axis mixtures
  HPoint c = HPoint::origin(1);
  c.t = 5.0;
  Gauge g(0.8, c);
  const double pexp = d1.p();

  HMixtureSampler S(d1, {{HPoint::origin(1), 1.0, 0.6}, {c, 1.25, 0.4}});
  Rng rng(7);
  auto F = [&](const HPoint& xi) {
    double v = eval_gauge_U(d1, g, xi);
    return std::pow(v, pexp) * eval_Z(d1, 1, g, xi);
  };

  double anti = 0.0, scale = 0.0;
  const int n_draws = 20000;
  for (int i = 0; i < n_draws; ++i) {
    HPoint xi = S.draw(rng);
    HPoint ref = xi;
    ref.x = -ref.x;
    ref.y = -ref.y;
    double w = 0.5 * (F(xi) + F(ref)) / S.pdf(xi);
    anti += w / n_draws;
    scale += std::abs(F(xi) / S.pdf(xi)) / n_draws;
  }
  CHECK(std::abs(anti) <= 1e-12 * scale);

  Rng rng2(8);
  auto plain = mc_integral(F, S, rng2, 40000);
  CHECK(std::abs(plain.value) <= 4.0 * plain.std_error);
}
