#include "hstab/fitter.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "hstab/errors.hpp"

namespace hstab {

namespace {

GridFn sample_sigma(const AxiGrid& g, double c0, const std::vector<Gauge>& gauges) {
  GridFn out(g);
  for (int i = 0; i < g.nr(); ++i)
    for (int j = 0; j < g.nt(); ++j) {
      double acc = 0.0;
      for (const Gauge& gg : gauges)
        acc += eval_gauge_U_axi(g.dim, c0, gg.lambda, gg.xi.t, g.r[i], g.t[j]);
      out.at(i, j) = acc;
    }
  return out;
}

GridFn sample_mode(const AxiGrid& g, int a, const Gauge& gg) {
  GridFn out(g);
  for (int i = 0; i < g.nr(); ++i)
    for (int j = 0; j < g.nt(); ++j)
      out.at(i, j) = eval_Z_axi(g.dim, a, gg.lambda, gg.xi.t, g.r[i], g.t[j]);
  return out;
}

GridFn subtract(const GridFn& u, const GridFn& v) {
  GridFn out(*u.grid);
  out.v = u.v - v.v;
  return out;
}

double family_eps(const Dim& dim, const std::vector<Gauge>& gauges) {
  if (gauges.size() < 2) return 0.0;
  return BubbleConfig(dim, gauges).max_eps();
}

void validate_fit_inputs(const GridFn& u, int m, const std::vector<Gauge>& init,
                         const PoissonSolver& S) {
  if (!u.grid) throw std::invalid_argument("fit_bubbles: input has no grid");
  if (&S.grid() != u.grid) throw std::invalid_argument("fit_bubbles: solver grid mismatch");
  if (m < 1) throw std::invalid_argument("fit_bubbles: need at least one bubble");
  if (static_cast<int>(init.size()) != m)
    throw std::invalid_argument("fit_bubbles: initial gauge count != m");
  for (const Gauge& g : init) {
    if (!(g.lambda > 0.0)) throw std::invalid_argument("fit_bubbles: nonpositive scale");
    if (!on_axis(g)) throw std::invalid_argument("fit_bubbles: initial gauges must be on the t-axis");
  }
}

}  // namespace

FitResult fit_bubbles(const GridFn& u, int m, const std::vector<Gauge>& init,
                      const PoissonSolver& S, const FitOptions& opt) {
  validate_fit_inputs(u, m, init, S);
  const AxiGrid& grid = *u.grid;
  const Dim& dim = grid.dim;
  const double c0 = bubble_c0(dim);
  const int n_par = 2 * m;
  const int a_vert = 2 * dim.n + 1, a_dil = 2 * dim.n + 2;
  const double tol = opt.tol_factor * d1_norm(u);

  FitResult res;
  res.gauges = init;

  GridFn sigma = sample_sigma(grid, c0, res.gauges);
  GridFn rho = subtract(u, sigma);
  double dist = d1_norm(rho);

  for (int iter = 0; iter < opt.max_iterations; ++iter) {
    if (family_eps(dim, res.gauges) > 0.5) {
      res.collision = true;
      break;
    }

    // plain transported modes per bubble: vertical translation, then dilation
    std::vector<GridFn> modes;
    modes.reserve(n_par);
    for (const Gauge& g : res.gauges) {
      modes.push_back(sample_mode(grid, a_vert, g));
      modes.push_back(sample_mode(grid, a_dil, g));
    }
    double max_res = 0.0;
    Eigen::VectorXd inner(n_par);
    for (int a = 0; a < n_par; ++a) {
      inner[a] = d1_inner(rho, modes[a]);
      max_res = std::max(max_res, std::abs(inner[a]));
    }

    if (max_res <= tol) {
      res.converged = true;
      res.trace.push_back({iter, dist, max_res, 0.0});
      break;
    }

    // Jacobian columns: d sigma / d t_k = lambda_k^2 * Z_vert,
    // d sigma / d log lambda_k = Z_dil
    Eigen::VectorXd scale(n_par);
    for (int k = 0; k < m; ++k) {
      scale[2 * k] = res.gauges[k].lambda * res.gauges[k].lambda;
      scale[2 * k + 1] = 1.0;
    }
    Eigen::MatrixXd gram(n_par, n_par);
    Eigen::VectorXd rhs(n_par);
    for (int a = 0; a < n_par; ++a) {
      rhs[a] = scale[a] * inner[a];
      for (int b = 0; b <= a; ++b) {
        gram(a, b) = scale[a] * scale[b] * d1_inner(modes[a], modes[b]);
        gram(b, a) = gram(a, b);
      }
    }
    gram.diagonal().array() += opt.ridge;
    Eigen::VectorXd delta = gram.ldlt().solve(rhs);

    // backtracking: the distance never increases
    double step = 1.0;
    bool accepted = false;
    for (int bt = 0; bt < opt.max_backtracks; ++bt, step *= 0.5) {
      std::vector<Gauge> trial = res.gauges;
      for (int k = 0; k < m; ++k) {
        trial[k].xi.t += step * delta[2 * k];
        trial[k].lambda *= std::exp(step * delta[2 * k + 1]);
      }
      GridFn trial_sigma = sample_sigma(grid, c0, trial);
      GridFn trial_rho = subtract(u, trial_sigma);
      double trial_dist = d1_norm(trial_rho);
      if (trial_dist < dist) {
        res.gauges = std::move(trial);
        sigma = std::move(trial_sigma);
        rho = std::move(trial_rho);
        dist = trial_dist;
        accepted = true;
        break;
      }
    }
    res.trace.push_back({iter, dist, max_res, accepted ? step : 0.0});
    if (!accepted) break;  // stalled at the line-search floor
  }

  // final report at the returned parameters
  res.residuals.resize(n_par);
  double max_res = 0.0;
  for (int k = 0; k < m; ++k) {
    GridFn zv = sample_mode(grid, a_vert, res.gauges[k]);
    GridFn zd = sample_mode(grid, a_dil, res.gauges[k]);
    res.residuals[2 * k] = d1_inner(rho, zv);
    res.residuals[2 * k + 1] = d1_inner(rho, zd);
    max_res = std::max({max_res, std::abs(res.residuals[2 * k]),
                        std::abs(res.residuals[2 * k + 1])});
  }
  if (!res.collision) res.converged = max_res <= tol;
  res.distance = dist;
  res.eps = family_eps(dim, res.gauges);
  res.deficit = deficit(u, S);
  return res;
}

double deficit(const GridFn& u, const PoissonSolver& S) {
  if (!u.grid) throw std::invalid_argument("deficit: input has no grid");
  if (&S.grid() != u.grid) throw std::invalid_argument("deficit: solver grid mismatch");
  const double p = u.grid->dim.p();
  GridFn h = apply_sublap(u);
  for (int i = 0; i < h.v.size(); ++i) h.v[i] += signed_pow(u.v[i], p);
  return S.dminus1_norm(h);
}

double deficit_split(const BubbleConfig& config, const GridFn& rho, const PoissonSolver& S) {
  if (!rho.grid) throw std::invalid_argument("deficit_split: remainder has no grid");
  if (&S.grid() != rho.grid) throw std::invalid_argument("deficit_split: solver grid mismatch");
  if (!config.all_on_axis()) throw std::invalid_argument("deficit_split: gauges must be on-axis");
  const AxiGrid& grid = *rho.grid;
  const double p = grid.dim.p();
  // L sigma = -(sum of bubble p-th powers) in closed form; only the remainder
  // passes through the discrete operator
  GridFn h = apply_sublap(rho);
  for (int i = 0; i < grid.nr(); ++i)
    for (int j = 0; j < grid.nt(); ++j) {
      double sig = config.sigma_axi(grid.r[i], grid.t[j]);
      double fij = config.f_axi(grid.r[i], grid.t[j]);
      double upow = signed_pow(sig + rho.at(i, j), p);
      h.at(i, j) += fij - std::pow(sig, p) + upow;
    }
  return S.dminus1_norm(h);
}

double regime_function(const Dim& dim, double gamma) {
  if (!(gamma > 0.0)) return 0.0;
  if (dim.n == 1) return gamma;
  if (dim.n == 2) return gamma * std::sqrt(std::abs(std::log(gamma)));
  return std::pow(gamma, double(dim.n + 2) / double(2 * dim.n));
}

QuotientResult stability_quotient(const GridFn& u, int m, const std::vector<Gauge>& init,
                                  const PoissonSolver& S, const FitOptions& opt) {
  QuotientResult out;
  out.fit = fit_bubbles(u, m, init, S, opt);
  out.distance = out.fit.distance;
  out.deficit = out.fit.deficit;
  const double rf = regime_function(u.grid->dim, out.deficit);
  out.quotient = rf > 0.0 ? out.distance / rf : 0.0;
  return out;
}

}  // namespace hstab
