#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "hstab/axi_grid.hpp"
#include "hstab/bubble.hpp"
#include "hstab/dimension.hpp"
#include "hstab/errors.hpp"

using namespace hstab;

namespace {

BubbleConfig one_bubble(int n) {
  BubbleConfig c{Dim(n), {Gauge::identity(n)}};
  return c;
}

double max_interior_abs(const GridFn& u) {
  const AxiGrid& g = *u.grid;
  double m = 0.0;
  for (int i = 0; i + 1 < g.nr(); ++i)
    for (int j = 1; j + 1 < g.nt(); ++j) m = std::max(m, std::abs(u.at(i, j)));
  return m;
}

}  // namespace

TEST_CASE("total weight matches the closed-form box volume") {
  for (int n : {1, 2, 3}) {
    Dim dim(n);
    GridSpec spec;
    spec.nr = 40;
    spec.nt = 40;
    spec.R = 7.5;
    spec.t_lo = -12.0;
    spec.t_hi = 20.0;
    AxiGrid g = build_grid(dim, spec);
    double exact = dim.box_volume(spec.R, spec.t_lo, spec.t_hi);
    CHECK(g.volume() == doctest::Approx(exact).epsilon(1e-12));
    CHECK(g.R() == doctest::Approx(spec.R).epsilon(1e-14));
    CHECK(g.t[0] == spec.t_lo);
    CHECK(g.t[g.nt() - 1] == spec.t_hi);
  }
}

TEST_CASE("node counts stay near the requested resolution") {
  GridSpec spec;
  spec.nr = 96;
  spec.nt = 96;
  spec.t_centers = {-1.0, 2.0};
  spec.h0_t = {1.0 / 24.0, 1.0 / 96.0};
  AxiGrid g = build_grid(Dim(2), spec);
  CHECK(g.nr() == 96);
  CHECK(g.nt() >= 96);
  CHECK(g.nt() <= 2 * 96);
  // centers are grid nodes
  for (double c : spec.t_centers) {
    bool found = false;
    for (int j = 0; j < g.nt(); ++j)
      if (std::abs(g.t[j] - c) < 1e-12) found = true;
    CHECK(found);
  }
}

TEST_CASE("discrete operator annihilates constants and linear t exactly") {
  for (int n : {1, 2}) {
    GridSpec spec;
    spec.nr = 32;
    spec.nt = 32;
    spec.R = 5.0;
    spec.t_lo = -9.0;
    spec.t_hi = 9.0;
    AxiGrid g = build_grid(Dim(n), spec);

    GridFn ones = sample(g, [](double, double) { return 1.0; });
    GridFn lin = sample(g, [](double, double t) { return 3.0 - 2.0 * t; });
    // scale of the operator applied to a generic smooth function, for contrast
    GridFn bump = sample(g, [](double r, double t) { return std::exp(-r * r - 0.1 * t * t); });

    CHECK(max_interior_abs(apply_sublap(ones)) <= 1e-13);
    CHECK(max_interior_abs(apply_sublap(lin)) <= 1e-10);
    CHECK(max_interior_abs(apply_sublap(bump)) > 1e-2);
  }
}

TEST_CASE("sampled bubble satisfies the discrete equation to grid accuracy") {
  for (int n : {1, 2}) {
    Dim dim(n);
    double c0 = bubble_c0(dim);
    AxiGrid g = grid_for_config(one_bubble(n), 256, 8.0);

    GridFn u = sample(g, [&](double r, double t) {
      return eval_gauge_U_axi(dim, c0, 1.0, 0.0, r, t);
    });
    GridFn lu = apply_sublap(u);

    // weighted-L2 relative residual of L u + u^p over interior nodes
    double num = 0.0, den = 0.0;
    for (int i = 0; i + 1 < g.nr(); ++i)
      for (int j = 1; j + 1 < g.nt(); ++j) {
        double w = g.wr[i] * g.wt[j];
        double up = std::pow(u.at(i, j), dim.p());
        double res = lu.at(i, j) + up;
        num += w * res * res;
        den += w * up * up;
      }
    double rel = std::sqrt(num / den);
    CAPTURE(n);
    CAPTURE(rel);
    CHECK(rel < 0.02);
  }
}

TEST_CASE("integrate reproduces closed-form bubble integrals") {
  // n = 1: int U^4 = (int U^{p+1}) has the closed value 4 pi^2, and
  // int U^3 = 16 pi; both follow from the explicit profile
  Dim dim(1);
  double c0 = bubble_c0(dim);
  AxiGrid g = grid_for_config(one_bubble(1), 384, 60.0);
  GridFn u = sample(g, [&](double r, double t) {
    return eval_gauge_U_axi(dim, c0, 1.0, 0.0, r, t);
  });
  GridFn u3 = u, u4 = u;
  u3.v = u.v.array().pow(3.0);
  u4.v = u.v.array().pow(4.0);
  CHECK(integrate(u4) == doctest::Approx(4.0 * M_PI * M_PI).epsilon(0.005));
  CHECK(integrate(u3) == doctest::Approx(16.0 * M_PI).epsilon(0.01));
}

TEST_CASE("energy inner product agrees with its two closed-form routes") {
  // route 1: int |XU|^2 = int U^{p+1} (multiply the equation by U, integrate
  // by parts); route 2: the edge-sum bilinear form
  for (int n : {1, 2}) {
    Dim dim(n);
    double c0 = bubble_c0(dim);
    AxiGrid g = grid_for_config(one_bubble(n), 256, 30.0);
    GridFn u = sample(g, [&](double r, double t) {
      return eval_gauge_U_axi(dim, c0, 1.0, 0.0, r, t);
    });
    GridFn up1 = u;
    up1.v = u.v.array().pow(dim.p() + 1.0);
    double route_edges = d1_inner(u, u);
    double route_integral = integrate(up1);
    CAPTURE(n);
    CHECK(route_edges == doctest::Approx(route_integral).epsilon(0.02));
  }
}

TEST_CASE("energy pairing of bubble with vertical mode via the equation") {
  // -L Z = p U^{p-1} Z, so d1_inner(U, Z) should match p int U^p Z
  Dim dim(1);
  double c0 = bubble_c0(dim);
  AxiGrid g = grid_for_config(one_bubble(1), 256, 30.0);
  int a_t = 2 * dim.n + 1;
  GridFn u = sample(g, [&](double r, double t) {
    return eval_gauge_U_axi(dim, c0, 1.0, 0.0, r, t);
  });
  GridFn z = sample(g, [&](double r, double t) {
    return eval_Z_axi(dim, a_t, 1.0, 0.0, r, t);
  });
  GridFn rhs = u;
  for (int k = 0; k < rhs.v.size(); ++k)
    rhs.v[k] = dim.p() * std::pow(u.v[k], dim.p() - 1.0) * z.v[k];
  double lhs = d1_inner(u, z);
  double rr = integrate(rhs);
  // both sides are near zero relative to the energies involved; compare on
  // the scale of d1_norm(u) * d1_norm(z)
  double scale = d1_norm(u) * d1_norm(z);
  CHECK(std::abs(lhs - rr) <= 0.02 * scale);
}

TEST_CASE("residual decreases under refinement") {
  Dim dim(1);
  double c0 = bubble_c0(dim);
  auto rel_res = [&](int res) {
    AxiGrid g = grid_for_config(one_bubble(1), res, 8.0);
    GridFn u = sample(g, [&](double r, double t) {
      return eval_gauge_U_axi(dim, c0, 1.0, 0.0, r, t);
    });
    GridFn lu = apply_sublap(u);
    double num = 0.0, den = 0.0;
    for (int i = 0; i + 1 < g.nr(); ++i)
      for (int j = 1; j + 1 < g.nt(); ++j) {
        double w = g.wr[i] * g.wt[j];
        double up = std::pow(u.at(i, j), dim.p());
        num += w * (lu.at(i, j) + up) * (lu.at(i, j) + up);
        den += w * up * up;
      }
    return std::sqrt(num / den);
  };
  double coarse = rel_res(64), fine = rel_res(192);
  CAPTURE(coarse);
  CAPTURE(fine);
  CHECK(fine < 0.6 * coarse);
}

TEST_CASE("grid file round trip and validation") {
  Dim dim(2);
  GridSpec spec;
  spec.nr = 24;
  spec.nt = 24;
  spec.R = 4.0;
  spec.t_lo = -8.0;
  spec.t_hi = 8.0;
  AxiGrid g = build_grid(dim, spec);
  GridFn u = sample(g, [](double r, double t) { return std::sin(r) * std::cos(0.3 * t); });

  std::string path = "tmp_roundtrip.hgf";
  save_gridfn(path, u);
  LoadedGridFn back = load_gridfn(path);
  CHECK(back.dim.n == 2);
  CHECK(back.grid->nr() == g.nr());
  CHECK(back.grid->nt() == g.nt());
  CHECK((back.fn.v - u.v).cwiseAbs().maxCoeff() == 0.0);
  CHECK((back.grid->r - g.r).cwiseAbs().maxCoeff() == 0.0);

  // corrupt magic must be rejected
  {
    std::ofstream os("tmp_badmagic.hgf", std::ios::binary);
    os.write("XGF1", 4);
    uint32_t h[3] = {2, 24, 24};
    os.write(reinterpret_cast<const char*>(h), 12);
  }
  CHECK_THROWS_AS(load_gridfn("tmp_badmagic.hgf"), IoError);
  CHECK_THROWS_AS(load_gridfn("tmp_missing_file.hgf"), IoError);
  std::remove(path.c_str());
  std::remove("tmp_badmagic.hgf");
}

TEST_CASE("grid constructor rejects malformed nodes") {
  Dim dim(1);
  Eigen::VectorXd good_r(4), good_t(4);
  good_r << 0.1, 0.5, 1.0, 2.0;
  good_t << -1.0, 0.0, 0.5, 1.0;
  CHECK_NOTHROW(AxiGrid(dim, good_r, good_t));

  Eigen::VectorXd bad_r = good_r;
  bad_r[0] = -0.1;
  CHECK_THROWS_AS(AxiGrid(dim, bad_r, good_t), NumericsError);
  Eigen::VectorXd unsorted_t = good_t;
  std::swap(unsorted_t[1], unsorted_t[2]);
  CHECK_THROWS_AS(AxiGrid(dim, good_r, unsorted_t), NumericsError);
}
