#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "hstab/axi_grid.hpp"
#include "hstab/bubble.hpp"
#include "hstab/errors.hpp"
#include "hstab/pde_solver.hpp"
#include "hstab/rng.hpp"

using namespace hstab;

namespace {

BubbleConfig one_bubble(int n, double lambda = 1.0, double t0 = 0.0) {
  Gauge g = Gauge::identity(n);
  g.lambda = lambda;
  g.xi.t = t0;
  return BubbleConfig{Dim(n), {g}};
}

BubbleConfig two_bubbles(int n, double eps) {
  // unit-scale bubble at the origin plus one at vertical distance 1/eps
  Gauge a = Gauge::identity(n);
  Gauge b = Gauge::identity(n);
  b.xi.t = 1.0 / eps;
  return BubbleConfig{Dim(n), {a, b}};
}

GridFn sample_bubble(const AxiGrid& g, const BubbleConfig& c) {
  return sample(g, [&](double r, double t) { return c.sigma_axi(r, t); });
}

GridFn random_smooth(const AxiGrid& g, Rng& rng) {
  // a few randomly placed anisotropic bumps, compactly concentrated
  struct Bump {
    double r0, t0, sr, st, amp;
  };
  std::vector<Bump> bumps;
  for (int k = 0; k < 4; ++k)
    bumps.push_back({rng.uniform(0.2, 2.0), rng.uniform(-3.0, 3.0), rng.uniform(0.3, 1.0),
                     rng.uniform(0.5, 2.0), rng.uniform(-1.0, 1.0)});
  return sample(g, [bumps](double r, double t) {
    double s = 0.0;
    for (const auto& b : bumps) {
      double dr = (r - b.r0) / b.sr, dtt = (t - b.t0) / b.st;
      s += b.amp * std::exp(-dr * dr - dtt * dtt);
    }
    return s;
  });
}

}  // namespace

TEST_CASE("discrete operator is positive definite on random vectors") {
  AxiGrid g = grid_for_config(one_bubble(1), 48, 8.0);
  PoissonSolver S(g);
  Rng rng(11);
  for (int k = 0; k < 100; ++k) {
    Eigen::VectorXd x(S.n_interior());
    for (int d = 0; d < x.size(); ++d) x[d] = rng.normal();
    CHECK(S.a_inner(x, x) > 0.0);
  }
}

TEST_CASE("solve is linear and zero maps to zero") {
  AxiGrid g = grid_for_config(one_bubble(1), 64, 8.0);
  PoissonSolver S(g);
  Rng rng(5);
  GridFn f = random_smooth(g, rng), h = random_smooth(g, rng);
  GridFn zero(g);
  CHECK(l2_norm(S.solve(zero)) == 0.0);

  GridFn comb(g);
  comb.v = 2.0 * f.v + 3.0 * h.v;
  GridFn s1 = S.solve(comb);
  GridFn s2(g);
  s2.v = 2.0 * S.solve(f).v + 3.0 * S.solve(h).v;
  CHECK((s1.v - s2.v).norm() <= 1e-9 * s1.v.norm());
}

TEST_CASE("backends agree") {
  AxiGrid g = grid_for_config(one_bubble(1), 48, 8.0);
  PoissonSolver direct(g);
  SolverConfig cc;
  cc.backend = SolverConfig::Backend::cg;
  PoissonSolver iterative(g, cc);
  Rng rng(7);
  GridFn f = random_smooth(g, rng);
  GridFn a = direct.solve(f), b = iterative.solve(f);
  CHECK((a.v - b.v).norm() <= 1e-7 * (a.v.norm() + 1e-30));
}

TEST_CASE("solver config validation") {
  AxiGrid g = grid_for_config(one_bubble(1), 24, 6.0);
  SolverConfig bad;
  bad.cg_tolerance = 1e-3;  // outside (0, 1e-4]
  CHECK_THROWS_AS(PoissonSolver(g, bad), NumericsError);
}

TEST_CASE("bubble is recovered from its own nonlinearity") {
  // -L U = U^p on the whole space; on the truncated box the gap is the
  // harmonic extension of the boundary tail. Measured where it matters: in
  // the energy norm and in L2 against the linearization weight U^{p-1}.
  Dim dim(1);
  BubbleConfig c = one_bubble(1);
  AxiGrid g = grid_for_config(c, 256, 30.0);
  PoissonSolver S(g);

  GridFn u = sample_bubble(g, c);
  GridFn up(g);
  up.v = u.v.array().pow(dim.p());
  GridFn sol = S.solve(up);

  GridFn diff(g);
  diff.v = sol.v - u.v;
  double rel_energy = d1_norm(diff) / d1_norm(u);
  CAPTURE(rel_energy);
  CHECK(rel_energy < 0.02);

  double num = 0.0, den = 0.0;
  for (int i = 0; i < g.nr(); ++i)
    for (int j = 0; j < g.nt(); ++j) {
      double w = g.wr[i] * g.wt[j] * std::pow(u.at(i, j), dim.p() - 1.0);
      num += w * diff.at(i, j) * diff.at(i, j);
      den += w * u.at(i, j) * u.at(i, j);
    }
  double rel_core = std::sqrt(num / den);
  CAPTURE(rel_core);
  CHECK(rel_core < 0.02);
}

TEST_CASE("dual norm of the bubble nonlinearity hits its closed form") {
  // ||U^p||_{D^{-1}} = ||U||_{D1} = sqrt(int U^{p+1}) = 2 pi at n = 1
  BubbleConfig c = one_bubble(1);
  AxiGrid g = grid_for_config(c, 256, 30.0);
  PoissonSolver S(g);
  GridFn u = sample_bubble(g, c);
  GridFn up(g);
  up.v = u.v.array().pow(Dim(1).p());
  double val = S.dminus1_norm(up);
  CHECK(val == doctest::Approx(2.0 * M_PI).epsilon(0.02));
}

TEST_CASE("dual norm is a norm and obeys duality") {
  AxiGrid g = grid_for_config(one_bubble(1), 96, 10.0);
  PoissonSolver S(g);
  Rng rng(23);
  GridFn f = random_smooth(g, rng), h = random_smooth(g, rng);

  GridFn zero(g);
  CHECK(S.dminus1_norm(zero) == 0.0);

  GridFn f3(g);
  f3.v = -3.0 * f.v;
  CHECK(S.dminus1_norm(f3) == doctest::Approx(3.0 * S.dminus1_norm(f)).epsilon(1e-10));

  GridFn sum(g);
  sum.v = f.v + h.v;
  CHECK(S.dminus1_norm(sum) <= S.dminus1_norm(f) + S.dminus1_norm(h) + 1e-10);

  // |int f g| <= ||f||_{D^{-1}} ||g||_{D^1}, sharp at g = solve(f)
  double fd = S.dminus1_norm(f);
  for (int k = 0; k < 20; ++k) {
    GridFn gfn = random_smooth(g, rng);
    GridFn prod(g);
    prod.v = f.v.cwiseProduct(gfn.v);
    // pairing only sees interior values (g is extended by its boundary data,
    // f decays); restrict both to interior for an exact discrete statement
    double pair = S.restrict_interior(f).cwiseProduct(S.weights()).dot(S.restrict_interior(gfn));
    double bound = fd * std::sqrt(S.a_inner(S.restrict_interior(gfn), S.restrict_interior(gfn)));
    CHECK(std::abs(pair) <= bound * (1.0 + 1e-8));
  }
  GridFn opt = S.solve(f);
  double pair = S.restrict_interior(f).cwiseProduct(S.weights()).dot(S.restrict_interior(opt));
  double bound = fd * std::sqrt(S.a_inner(S.restrict_interior(opt), S.restrict_interior(opt)));
  CHECK(pair / bound >= 0.99);
}

TEST_CASE("dual norm is invariant under gauge transport of the source") {
  // v(xi) = lambda^{(Q+2)/2} f(gauge point action) has the same dual norm;
  // checked on the bubble nonlinearity with a pure dilation, each evaluated
  // on its own adapted box
  for (double lam : {2.0, 0.5}) {
    Dim dim(1);
    BubbleConfig cbase = one_bubble(1);
    BubbleConfig cdil = one_bubble(1, lam);
    AxiGrid g1 = grid_for_config(cbase, 192, 30.0);
    AxiGrid g2 = grid_for_config(cdil, 192, 30.0);
    PoissonSolver S1(g1), S2(g2);
    GridFn u1 = sample_bubble(g1, cbase);
    GridFn up1(g1);
    up1.v = u1.v.array().pow(dim.p());
    GridFn u2 = sample_bubble(g2, cdil);
    GridFn up2(g2);
    up2.v = u2.v.array().pow(dim.p());
    double n1 = S1.dminus1_norm(up1), n2 = S2.dminus1_norm(up2);
    CHECK(n2 == doctest::Approx(n1).epsilon(0.03));
  }
}

TEST_CASE("mode basis is orthonormal and projection behaves") {
  BubbleConfig c = two_bubbles(2, 0.1);
  AxiGrid g = grid_for_config(c, 128, 10.0);
  PoissonSolver S(g);
  ModeBasis basis = ModeBasis::axisymmetric(S, c);
  CHECK(basis.size() == 4);
  CHECK(basis.gram_defect <= 1e-8);

  // basis elements project to zero
  for (const auto& e : basis.vecs) {
    Eigen::VectorXd pe = project_off(S, e, basis);
    CHECK(S.a_norm(pe) <= 1e-8);
  }

  Rng rng(31);
  GridFn u = random_smooth(g, rng);
  Eigen::VectorXd x = S.restrict_interior(u);
  Eigen::VectorXd px = project_off(S, x, basis);
  Eigen::VectorXd ppx = project_off(S, px, basis);
  CHECK((ppx - px).norm() <= 1e-10 * px.norm());

  // Pythagoras in the energy metric
  double full = S.a_inner(x, x);
  double kept = S.a_inner(px, px);
  double removed = full - S.a_inner(x, px);  // = ||P_F x||^2 by symmetry
  CHECK(kept + removed == doctest::Approx(full).epsilon(1e-8));
}

TEST_CASE("single bubble has zero remainder") {
  BubbleConfig c = one_bubble(2);
  AxiGrid g = grid_for_config(c, 96, 8.0);
  PoissonSolver S(g);
  ModeBasis basis = ModeBasis::axisymmetric(S, c);
  RhoResult res = solve_rho(c, S, basis);
  CHECK(res.converged);
  CHECK(res.lead_norm <= 1e-10);
  CHECK(res.rho_norm <= 1e-10);
}

TEST_CASE("remainder solve converges and stays orthogonal") {
  BubbleConfig c = two_bubbles(2, 0.05);
  AxiGrid g = grid_for_config(c, 144, 8.0);
  PoissonSolver S(g);
  ModeBasis basis = ModeBasis::axisymmetric(S, c);
  RhoResult res = solve_rho(c, S, basis);
  CHECK(res.converged);
  CHECK(res.ortho_residual <= 1e-6);
  CHECK(res.rho_norm > 0.0);
  // the remainder tracks the linear prediction up to the uniform-invertibility
  // constant of id - P K (measured ~0.2-0.35 as a coercivity bound, so the
  // amplification stays under ~1/mu); grid-converged values sit near 3 here
  CAPTURE(res.rho_norm);
  CAPTURE(res.lead_norm);
  CHECK(res.rho_norm / res.lead_norm > 1.0);
  CHECK(res.rho_norm / res.lead_norm < 3.5);
  // nonlinear correction is a contraction
  CHECK(res.contraction < 1.0);
}

TEST_CASE("coercivity: projection removes the near-kernel") {
  BubbleConfig c = one_bubble(2);
  AxiGrid g = grid_for_config(c, 96, 8.0);
  PoissonSolver S(g);
  ModeBasis basis = ModeBasis::axisymmetric(S, c);

  CoercivityResult proj = coercivity_estimate(c, S, basis);
  CHECK(proj.converged);
  CHECK(proj.mu_min > 0.05);

  CoercivityResult unproj = coercivity_estimate(c, S, ModeBasis::none());
  CAPTURE(proj.mu_min);
  CAPTURE(unproj.mu_min);
  CHECK(proj.mu_min >= 10.0 * unproj.mu_min);
}

TEST_CASE("fundamental-solution calibration is internally consistent") {
  GreenOptions opt;
  opt.samples = 200000;
  GreenResult a = green_calibrate(Dim(1), opt);
  CHECK(a.spread <= 0.02);
  CHECK(a.c_q > 0.0);

  GreenOptions big = opt;
  big.samples = 2 * opt.samples;
  big.seed = opt.seed + 1;
  GreenResult b = green_calibrate(Dim(1), big);
  CHECK(b.c_q == doctest::Approx(a.c_q).epsilon(0.02));
}
