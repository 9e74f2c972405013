#pragma once

// Linear algebra over an AxiGrid: the symmetric positive-definite Dirichlet
// discretization of -L, Poisson solves, the dual norm
//   ||f||_{D^{-1}}^2 = int f * (-L)^{-1} f,
// the A-orthonormal basis of axisymmetric tangent modes, the projected
// contraction solve for the remainder rho of a bubble decomposition, and the
// coercivity (smallest singular value) estimate of id - K on the orthogonal
// complement of the mode span.
//
// Interior unknowns are the nodes with ir in [0, nr-2], it in [1, nt-2] (the
// axis column carries unknowns, the Dirichlet edges do not). All inner
// products written a_inner are in the energy metric x^T A x, which equals
// d1_inner for grid functions vanishing on the Dirichlet boundary.

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <functional>
#include <memory>
#include <vector>

#include "hstab/axi_grid.hpp"
#include "hstab/bubble.hpp"
#include "hstab/rng.hpp"

namespace hstab {

struct SolverConfig {
  double cg_tolerance = 1e-10;  // relative residual
  int max_iterations = 20000;
  enum class Precond { none, diagonal } preconditioner = Precond::diagonal;
  // direct factorization is the default: the projected solves reuse it for
  // hundreds of back-substitutions
  enum class Backend { ldlt, cg } backend = Backend::ldlt;
};

class PoissonSolver {
 public:
  explicit PoissonSolver(const AxiGrid& grid, SolverConfig cfg = {});

  const AxiGrid& grid() const { return *grid_; }
  const SolverConfig& config() const { return cfg_; }
  int n_interior() const { return static_cast<int>(interior_.size()); }

  // solve -L x = f with zero Dirichlet data; boundary entries of the result are 0
  GridFn solve(const GridFn& f) const;
  double dminus1_norm(const GridFn& f) const;

  // interior-vector plumbing shared by the projected solves
  Eigen::VectorXd restrict_interior(const GridFn& u) const;
  GridFn extend_zero(const Eigen::VectorXd& x) const;
  const Eigen::VectorXd& weights() const { return w_; }  // volume weight per dof
  // solve A x = rhs where rhs is already volume-weighted
  Eigen::VectorXd solve_weighted(const Eigen::VectorXd& rhs) const;
  double a_inner(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const;
  double a_norm(const Eigen::VectorXd& x) const { return std::sqrt(std::max(0.0, a_inner(x, x))); }
  Eigen::VectorXd apply_a(const Eigen::VectorXd& x) const { return A_ * x; }

  long solves_performed() const { return n_solves_; }

 private:
  const AxiGrid* grid_;
  SolverConfig cfg_;
  std::vector<int> interior_;  // dof -> flat grid index
  Eigen::VectorXi dof_;        // flat grid index -> dof or -1
  Eigen::VectorXd w_;
  Eigen::SparseMatrix<double> A_;
  std::unique_ptr<Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>> ldlt_;
  mutable long n_solves_ = 0;
};

// --- tangent-mode basis -------------------------------------------------------

// Axisymmetric tangent modes (vertical translation a = 2n+1 and dilation
// a = 2n+2 for each bubble), A-orthonormalized. On t-axis configurations the
// remaining modes have zero axisymmetric component by angular parity, so this
// span is the whole mode space seen by axisymmetric functions.
struct ModeBasis {
  std::vector<Eigen::VectorXd> vecs;   // interior vectors, orthonormal in a_inner
  std::vector<Eigen::VectorXd> avecs;  // A * vecs[k], cached so projections are dot products
  double gram_defect = 0.0;            // max |Gram - I| recorded at build time

  static ModeBasis axisymmetric(const PoissonSolver& S, const BubbleConfig& config);
  static ModeBasis none() { return {}; }
  int size() const { return static_cast<int>(vecs.size()); }
};

Eigen::VectorXd project_off(const PoissonSolver& S, Eigen::VectorXd x, const ModeBasis& basis);
GridFn project_off(const PoissonSolver& S, const GridFn& u, const ModeBasis& basis);

// --- projected linear algebra ---------------------------------------------------

struct IterOptions {
  double tol = 1e-10;
  int restart = 120;
  int max_iters = 4000;
};

struct IterStats {
  int iters = 0;
  double rel_residual = 1.0;
  bool converged = false;
};

// GMRES in the a_inner metric for a caller-supplied operator
IterStats gmres_a(const PoissonSolver& S,
                  const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& op,
                  const Eigen::VectorXd& b, Eigen::VectorXd& x, const IterOptions& opt);

// --- contraction solve for the remainder ----------------------------------------

struct RhoOptions {
  double picard_tol = 1e-8;
  int max_picard = 40;
  IterOptions inner;
};

struct RhoResult {
  GridFn rho;
  double rho_norm = 0.0;       // ||rho||_{D1}
  double lead_norm = 0.0;      // ||P (-L)^{-1} f||_{D1}, the linear prediction
  double contraction = 0.0;    // last ratio of successive Picard increments
  double ortho_residual = 0.0; // max_k |<rho, e_k>_A| / ||rho||_A
  std::vector<double> picard_deltas;
  int inner_iters = 0;
  bool converged = false;
};

// Fixed point of  rho = (id - P K)^{-1} P (-L)^{-1} (f + N(rho))  on the
// complement of the mode span, with K v = p (-L)^{-1}(sigma^{p-1} v).
RhoResult solve_rho(const BubbleConfig& config, const PoissonSolver& S, const ModeBasis& basis,
                    const RhoOptions& opt = {});

// --- coercivity -----------------------------------------------------------------

struct CoercivityOptions {
  int max_power_iters = 60;
  double rel_change_tol = 5e-3;
  IterOptions inner{1e-8, 150, 6000};
  uint64_t seed = 2026;
};

struct CoercivityResult {
  double mu_min = 0.0;  // smallest |eigenvalue| of id - K on the chosen subspace
  int power_iters = 0;
  bool converged = false;
};

// Inverse power iteration on id - P K restricted to the complement of the
// basis span (pass ModeBasis::none() for the unprojected operator, whose
// near-kernel is the tangent-mode span itself).
CoercivityResult coercivity_estimate(const BubbleConfig& config, const PoissonSolver& S,
                                     const ModeBasis& basis, const CoercivityOptions& opt = {});

// --- fundamental-solution calibration -------------------------------------------

struct GreenOptions {
  long samples = 400000;
  int probes = 10;
  uint64_t seed = 7;
  double spread_limit = 0.05;
};

struct GreenResult {
  double c_q = 0.0;     // U(eta) = c_q * int |eta^{-1} xi|^{2-Q} U^p(xi) dxi
  double spread = 0.0;  // relative spread across probes
};

// Monte Carlo calibration of the constant in the fundamental-solution
// representation; throws NumericsError if the probe ratios disagree by more
// than spread_limit.
GreenResult green_calibrate(const Dim& dim, const GreenOptions& opt = {});

}  // namespace hstab
