#include "hstab/pde_solver.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <cmath>

#include "hstab/errors.hpp"
#include "hstab/mc.hpp"

namespace hstab {

PoissonSolver::PoissonSolver(const AxiGrid& grid, SolverConfig cfg) : grid_(&grid), cfg_(cfg) {
  if (!(cfg_.cg_tolerance > 0.0 && cfg_.cg_tolerance <= 1e-4))
    throw NumericsError("solver tolerance outside (0, 1e-4]");

  const AxiGrid& g = *grid_;
  dof_ = Eigen::VectorXi::Constant(g.size(), -1);
  for (int i = 0; i + 1 < g.nr(); ++i)
    for (int j = 1; j + 1 < g.nt(); ++j) {
      dof_[g.idx(i, j)] = static_cast<int>(interior_.size());
      interior_.push_back(g.idx(i, j));
    }

  const int N = n_interior();
  w_.resize(N);
  for (int d = 0; d < N; ++d) {
    int i = interior_[d] / g.nt(), j = interior_[d] % g.nt();
    w_[d] = g.wr[i] * g.wt[j];
  }

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(5 * static_cast<size_t>(N));
  for (int d = 0; d < N; ++d) {
    int i = interior_[d] / g.nt(), j = interior_[d] % g.nt();
    double diag = 0.0;
    auto edge = [&](int ni, int nj, double cond) {
      diag += cond;
      int nd = dof_[g.idx(ni, nj)];
      if (nd >= 0) trips.emplace_back(d, nd, -cond);
    };
    if (i > 0) edge(i - 1, j, g.hr[i - 1] * g.wt[j]);
    edge(i + 1, j, g.hr[i] * g.wt[j]);
    edge(i, j - 1, g.ct[i] / g.dt[j - 1]);
    edge(i, j + 1, g.ct[i] / g.dt[j]);
    trips.emplace_back(d, d, diag);
  }
  A_.resize(N, N);
  A_.setFromTriplets(trips.begin(), trips.end());
  A_.makeCompressed();

  if (cfg_.backend == SolverConfig::Backend::ldlt) {
    ldlt_ = std::make_unique<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>>();
    ldlt_->compute(A_);
    if (ldlt_->info() != Eigen::Success) throw NumericsError("stiffness factorization failed");
  }
}

Eigen::VectorXd PoissonSolver::restrict_interior(const GridFn& u) const {
  Eigen::VectorXd x(n_interior());
  for (int d = 0; d < n_interior(); ++d) x[d] = u.v[interior_[d]];
  return x;
}

GridFn PoissonSolver::extend_zero(const Eigen::VectorXd& x) const {
  GridFn u(*grid_);
  for (int d = 0; d < n_interior(); ++d) u.v[interior_[d]] = x[d];
  return u;
}

Eigen::VectorXd PoissonSolver::solve_weighted(const Eigen::VectorXd& rhs) const {
  ++n_solves_;
  Eigen::VectorXd x;
  if (cfg_.backend == SolverConfig::Backend::ldlt) {
    x = ldlt_->solve(rhs);
  } else if (cfg_.preconditioner == SolverConfig::Precond::diagonal) {
    Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper> cg;
    cg.setTolerance(cfg_.cg_tolerance);
    cg.setMaxIterations(cfg_.max_iterations);
    cg.compute(A_);
    x = cg.solve(rhs);
    if (cg.info() != Eigen::Success) throw NumericsError("cg did not converge");
  } else {
    Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper,
                             Eigen::IdentityPreconditioner>
        cg;
    cg.setTolerance(cfg_.cg_tolerance);
    cg.setMaxIterations(cfg_.max_iterations);
    cg.compute(A_);
    x = cg.solve(rhs);
    if (cg.info() != Eigen::Success) throw NumericsError("cg did not converge");
  }
  double rn = rhs.norm();
  if (rn > 0.0) {
    double rel = (A_ * x - rhs).norm() / rn;
    if (rel > 1e-6) throw NumericsError("poisson solve residual " + std::to_string(rel));
  }
  return x;
}

GridFn PoissonSolver::solve(const GridFn& f) const {
  Eigen::VectorXd rhs = restrict_interior(f).cwiseProduct(w_);
  return extend_zero(solve_weighted(rhs));
}

double PoissonSolver::dminus1_norm(const GridFn& f) const {
  Eigen::VectorXd rhs = restrict_interior(f).cwiseProduct(w_);
  if (rhs.norm() == 0.0) return 0.0;
  Eigen::VectorXd x = solve_weighted(rhs);
  return std::sqrt(std::max(0.0, x.dot(rhs)));
}

double PoissonSolver::a_inner(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const {
  return x.dot(A_ * y);
}

// --- mode basis -----------------------------------------------------------------

ModeBasis ModeBasis::axisymmetric(const PoissonSolver& S, const BubbleConfig& config) {
  const AxiGrid& g = S.grid();
  if (!config.all_on_axis()) throw NumericsError("mode basis needs an on-axis configuration");

  std::vector<Eigen::VectorXd> raw;
  for (const Gauge& gauge : config.gauges)
    for (int a : {2 * config.dim.n + 1, 2 * config.dim.n + 2}) {
      GridFn z = sample(g, [&](double r, double t) {
        return eval_Z_axi(config.dim, a, gauge.lambda, gauge.xi.t, r, t);
      });
      raw.push_back(S.restrict_interior(z));
    }

  ModeBasis basis;
  for (Eigen::VectorXd v : raw) {
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& e : basis.vecs) v -= S.a_inner(v, e) * e;
    double nrm = S.a_norm(v);
    if (nrm < 1e-12) throw NumericsError("degenerate tangent mode set");
    basis.vecs.push_back(v / nrm);
  }

  for (const auto& e : basis.vecs) basis.avecs.push_back(S.apply_a(e));

  const int m = basis.size();
  for (int i = 0; i < m; ++i)
    for (int j = 0; j <= i; ++j) {
      double gij = basis.vecs[i].dot(basis.avecs[j]);
      basis.gram_defect = std::max(basis.gram_defect, std::abs(gij - (i == j ? 1.0 : 0.0)));
    }
  if (basis.gram_defect > 1e-8) throw NumericsError("mode basis orthonormalization failed");
  return basis;
}

Eigen::VectorXd project_off(const PoissonSolver& S, Eigen::VectorXd x, const ModeBasis& basis) {
  for (int k = 0; k < basis.size(); ++k) x -= basis.avecs[k].dot(x) * basis.vecs[k];
  return x;
}

GridFn project_off(const PoissonSolver& S, const GridFn& u, const ModeBasis& basis) {
  return S.extend_zero(project_off(S, S.restrict_interior(u), basis));
}

// --- GMRES in the energy metric ---------------------------------------------------

IterStats gmres_a(const PoissonSolver& S,
                  const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& op,
                  const Eigen::VectorXd& b, Eigen::VectorXd& x, const IterOptions& opt) {
  const int N = static_cast<int>(b.size());
  const int m = opt.restart;
  IterStats stats;

  double bnorm = std::sqrt(std::max(0.0, b.dot(S.apply_a(b))));
  if (bnorm == 0.0) {
    x.setZero(N);
    stats.converged = true;
    stats.rel_residual = 0.0;
    return stats;
  }
  if (x.size() != N) x = Eigen::VectorXd::Zero(N);

  std::vector<Eigen::VectorXd> V, AV;  // Arnoldi basis and its A-images
  Eigen::MatrixXd H(m + 1, m);
  Eigen::VectorXd cs(m), sn(m), gamma(m + 1);

  while (stats.iters < opt.max_iters) {
    Eigen::VectorXd r = b - op(x);
    Eigen::VectorXd Ar = S.apply_a(r);
    double beta = std::sqrt(std::max(0.0, r.dot(Ar)));
    stats.rel_residual = beta / bnorm;
    if (stats.rel_residual <= opt.tol) {
      stats.converged = true;
      return stats;
    }
    V.assign(1, r / beta);
    AV.assign(1, Ar / beta);
    H.setZero();
    gamma.setZero();
    gamma[0] = beta;
    int k = 0;
    for (; k < m && stats.iters < opt.max_iters; ++k, ++stats.iters) {
      Eigen::VectorXd w = op(V[k]);
      Eigen::VectorXd Aw = S.apply_a(w);
      // classical Gram-Schmidt, two passes, with cached A-images
      for (int pass = 0; pass < 2; ++pass) {
        for (int i = 0; i <= k; ++i) {
          double h = V[i].dot(Aw);
          if (pass == 0)
            H(i, k) = h;
          else
            H(i, k) += h;
          w -= h * V[i];
          Aw -= h * AV[i];
        }
      }
      double hk1 = std::sqrt(std::max(0.0, w.dot(Aw)));
      H(k + 1, k) = hk1;
      if (hk1 > 1e-14 * beta) {
        V.push_back(w / hk1);
        AV.push_back(Aw / hk1);
      }

      for (int i = 0; i < k; ++i) {
        double t1 = cs[i] * H(i, k) + sn[i] * H(i + 1, k);
        double t2 = -sn[i] * H(i, k) + cs[i] * H(i + 1, k);
        H(i, k) = t1;
        H(i + 1, k) = t2;
      }
      double denom = std::hypot(H(k, k), H(k + 1, k));
      cs[k] = (denom > 0) ? H(k, k) / denom : 1.0;
      sn[k] = (denom > 0) ? H(k + 1, k) / denom : 0.0;
      H(k, k) = denom;
      H(k + 1, k) = 0.0;
      gamma[k + 1] = -sn[k] * gamma[k];
      gamma[k] = cs[k] * gamma[k];
      stats.rel_residual = std::abs(gamma[k + 1]) / bnorm;
      if (stats.rel_residual <= opt.tol || hk1 <= 1e-14 * beta) {
        ++k;
        ++stats.iters;
        break;
      }
    }
    // back substitution on the k x k triangle
    Eigen::VectorXd y = Eigen::VectorXd::Zero(k);
    for (int i = k - 1; i >= 0; --i) {
      double s = gamma[i];
      for (int j = i + 1; j < k; ++j) s -= H(i, j) * y[j];
      y[i] = s / H(i, i);
    }
    for (int i = 0; i < k; ++i) x += y[i] * V[i];
    if (stats.rel_residual <= opt.tol) {
      stats.converged = true;
      return stats;
    }
  }
  return stats;
}

// --- contraction solve ---------------------------------------------------------

namespace {

struct LinearizedOp {
  const PoissonSolver& S;
  const ModeBasis& basis;
  Eigen::VectorXd kmul;  // p sigma^{p-1} per interior dof, volume-weighted

  Eigen::VectorXd apply_k(const Eigen::VectorXd& v) const {
    return S.solve_weighted(kmul.cwiseProduct(v));
  }
  Eigen::VectorXd operator()(const Eigen::VectorXd& v) const {
    return v - project_off(S, apply_k(v), basis);
  }
};

LinearizedOp make_linearized(const BubbleConfig& config, const PoissonSolver& S,
                             const ModeBasis& basis) {
  const AxiGrid& g = S.grid();
  GridFn sig = sample(g, [&](double r, double t) { return config.sigma_axi(r, t); });
  Eigen::VectorXd sv = S.restrict_interior(sig);
  double p = config.dim.p();
  Eigen::VectorXd kmul = (p * sv.array().pow(p - 1.0)).matrix();
  return LinearizedOp{S, basis, kmul.cwiseProduct(S.weights())};
}

}  // namespace

RhoResult solve_rho(const BubbleConfig& config, const PoissonSolver& S, const ModeBasis& basis,
                    const RhoOptions& opt) {
  const AxiGrid& g = S.grid();
  const double p = config.dim.p();
  LinearizedOp M = make_linearized(config, S, basis);

  GridFn sig = sample(g, [&](double r, double t) { return config.sigma_axi(r, t); });
  GridFn fgrid = sample(g, [&](double r, double t) { return config.f_axi(r, t); });
  Eigen::VectorXd sv = S.restrict_interior(sig);
  Eigen::VectorXd fv = S.restrict_interior(fgrid);

  RhoResult out;
  Eigen::VectorXd lead = project_off(S, S.solve_weighted(fv.cwiseProduct(S.weights())), basis);
  out.lead_norm = S.a_norm(lead);

  Eigen::VectorXd rho = Eigen::VectorXd::Zero(S.n_interior());
  double prev_delta = 0.0;
  for (int it = 0; it < opt.max_picard; ++it) {
    Eigen::VectorXd nl(S.n_interior());
    for (int d = 0; d < S.n_interior(); ++d) nl[d] = eval_N(p, sv[d], rho[d]);
    Eigen::VectorXd b =
        project_off(S, S.solve_weighted((fv + nl).cwiseProduct(S.weights())), basis);
    Eigen::VectorXd next = rho;  // warm start
    IterStats st = gmres_a(S, std::cref(M), b, next, opt.inner);
    out.inner_iters += st.iters;
    if (!st.converged) return out;  // converged stays false

    double delta = S.a_norm(next - rho);
    out.picard_deltas.push_back(delta);
    if (prev_delta > 0.0) out.contraction = delta / prev_delta;
    prev_delta = delta;
    rho = next;
    if (delta <= opt.picard_tol * std::max(1.0, S.a_norm(rho))) {
      out.converged = true;
      break;
    }
  }

  out.rho_norm = S.a_norm(rho);
  if (out.rho_norm > 0.0) {
    for (const auto& e : basis.vecs)
      out.ortho_residual = std::max(out.ortho_residual, std::abs(S.a_inner(rho, e)) / out.rho_norm);
  }
  out.rho = S.extend_zero(rho);
  return out;
}

// --- coercivity -----------------------------------------------------------------

CoercivityResult coercivity_estimate(const BubbleConfig& config, const PoissonSolver& S,
                                     const ModeBasis& basis, const CoercivityOptions& opt) {
  LinearizedOp M = make_linearized(config, S, basis);
  CoercivityResult out;

  // Random noise lives almost entirely where K ~ 0 and id - K ~ id; one K
  // application damps that sea and seeds the core-localized spectrum the
  // iteration is after.
  Rng rng(opt.seed);
  Eigen::VectorXd x(S.n_interior());
  for (int d = 0; d < S.n_interior(); ++d) x[d] = rng.normal();
  x = project_off(S, M.apply_k(project_off(S, x, basis)), basis);
  x /= S.a_norm(x);

  const int min_iters = 8;
  double mu_prev = 0.0;
  Eigen::VectorXd y;
  for (int it = 0; it < opt.max_power_iters; ++it) {
    ++out.power_iters;
    y = x;  // warm start along the previous direction
    IterStats st = gmres_a(S, std::cref(M), x, y, opt.inner);
    if (!st.converged) throw NumericsError("coercivity inner solve stagnated");
    y = project_off(S, y, basis);
    double ynorm = S.a_norm(y);
    if (!(ynorm > 0.0)) throw NumericsError("coercivity iteration collapsed");
    x = y / ynorm;
    double mu = S.a_inner(x, M(x));  // signed Rayleigh value
    out.mu_min = std::abs(mu);
    if (it + 1 >= min_iters &&
        std::abs(out.mu_min - mu_prev) <= opt.rel_change_tol * out.mu_min) {
      out.converged = true;
      break;
    }
    mu_prev = out.mu_min;
  }
  return out;
}

// --- fundamental-solution calibration --------------------------------------------

GreenResult green_calibrate(const Dim& dim, const GreenOptions& opt) {
  const int n = dim.n;
  const double kexp = 2.0 - dim.Q();

  std::vector<HPoint> probes;
  for (int k = 0; k < opt.probes; ++k) {
    double rho = 0.5 + 2.0 * k / std::max(1, opt.probes - 1);
    HPoint eta = HPoint::origin(n);
    if (k % 2 == 0)
      eta.x[0] = rho;
    else
      eta.t = ((k % 4 == 1) ? 1.0 : -1.0) * rho * rho;
    probes.push_back(eta);
  }

  double rmin = 1e300, rmax = -1e300, rsum = 0.0;
  for (size_t k = 0; k < probes.size(); ++k) {
    const HPoint& eta = probes[k];
    HMixtureSampler sampler(
        dim,
        {{HPoint::origin(n), 1.0, 0.7}, {eta, std::min(1.0, hnorm(eta)), 0.3}});
    Rng rng(Rng::split(opt.seed, k));
    auto F = [&](const HPoint& xi) {
      double d = hnorm(compose(inverse(eta), xi));
      return std::pow(d, kexp) * std::pow(eval_U(dim, xi), dim.p());
    };
    McEstimate est = mc_integral(F, sampler, rng, opt.samples);
    double ratio = eval_U(dim, eta) / est.value;
    rmin = std::min(rmin, ratio);
    rmax = std::max(rmax, ratio);
    rsum += ratio;
  }
  GreenResult out;
  out.c_q = rsum / probes.size();
  out.spread = (rmax - rmin) / out.c_q;
  if (out.spread > opt.spread_limit)
    throw NumericsError("fundamental-solution ratio spread " + std::to_string(out.spread));
  return out;
}

}  // namespace hstab
