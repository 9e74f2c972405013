#pragma once

// Axisymmetric reduction of H^n. Functions u = u(|z|, t) live on a tensor
// grid over (r, t) in (0, R] x [t_lo, t_hi] with graded node placement. The
// reduced sub-Laplacian
//   L u = u_rr + (2n-1)/r u_r + 4 r^2 u_tt
// is discretized in divergence form with respect to the Haar weight
// omega_{2n-1} r^{2n-1} dr dt: per-edge conductances make the discrete
// operator symmetric, annihilate constants exactly, and give the discrete
// Dirichlet energy  sum_edges g (du)^2  == int |Xu|^2 for axisymmetric u.
// The axis r = 0 is a natural (even-reflection) boundary carrying no flux;
// the outer edges r = R, t = t_lo, t = t_hi are Dirichlet-zero for solves.

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "hstab/bubble.hpp"
#include "hstab/dimension.hpp"

namespace hstab {

struct AxiGrid {
  Dim dim;
  Eigen::VectorXd r, t;    // strictly increasing nodes; r[0] > 0, r[last] = R
  Eigen::VectorXd wr, wt;  // product volume weights; wr includes the sphere area
  Eigen::VectorXd hr;      // nr-1 radial edge conductances (to be scaled by wt_j)
  Eigen::VectorXd ct;      // nr per-column t-edge coefficients (to be divided by dt_j)
  Eigen::VectorXd dt;      // nt-1 spacings

  AxiGrid(Dim d, Eigen::VectorXd r_nodes, Eigen::VectorXd t_nodes);

  int nr() const { return static_cast<int>(r.size()); }
  int nt() const { return static_cast<int>(t.size()); }
  int size() const { return nr() * nt(); }
  int idx(int i, int j) const { return i * nt() + j; }
  bool is_boundary(int i, int j) const { return i == nr() - 1 || j == 0 || j == nt() - 1; }
  double R() const { return r[nr() - 1]; }

  // total weight equals the Haar volume of the box exactly
  double volume() const { return wr.sum() * wt.sum(); }
};

struct GridFn {
  const AxiGrid* grid = nullptr;
  Eigen::VectorXd v;  // flattened, idx = i * nt + j (row-major in r)

  GridFn() = default;
  explicit GridFn(const AxiGrid& g) : grid(&g), v(Eigen::VectorXd::Zero(g.size())) {}

  double& at(int i, int j) { return v[grid->idx(i, j)]; }
  double at(int i, int j) const { return v[grid->idx(i, j)]; }
};

GridFn sample(const AxiGrid& g, const std::function<double(double, double)>& F);

// sum of W * u over all nodes: int u dxi over the box
double integrate(const GridFn& u);

// weighted L2 norm sqrt(int u^2)
double l2_norm(const GridFn& u);

// discrete int Xu . Xv (all edges, boundary values included)
double d1_inner(const GridFn& u, const GridFn& v);
inline double d1_norm(const GridFn& u) { return std::sqrt(std::max(0.0, d1_inner(u, u))); }

// pointwise reduced sub-Laplacian at interior nodes; boundary rows are 0
GridFn apply_sublap(const GridFn& u);

// max |u| on the Dirichlet boundary over max |u| overall; callers use this to
// flag configurations whose support reaches the truncation edge
double boundary_ratio(const GridFn& u);

// --- grid construction --------------------------------------------------------

struct GridSpec {
  int nr = 128;
  int nt = 128;               // interval budget in t, split across graded segments
  double R = 20.0;
  double t_lo = -400.0, t_hi = 400.0;
  std::vector<double> t_centers{0.0};  // concentration centers, strictly inside
  double h0_r = 1.0 / 24.0;            // first radial step
  std::vector<double> h0_t{1.0 / 24.0};  // first t step per center
};

AxiGrid build_grid(const Dim& dim, const GridSpec& spec);

// grid adapted to an on-axis bubble configuration: box a Heisenberg ball of
// radius box_factor * spread around the configuration, first step near each
// core equal to core_res/resolution core scales (so refinement sharpens the
// cores and the tail together)
AxiGrid grid_for_config(const BubbleConfig& config, int resolution, double box_factor,
                        double core_res = 5.0);

// --- binary grid-function files -----------------------------------------------
// magic "HGF1", then little-endian u32 n, u32 nr, u32 nt, f64 r nodes,
// f64 t nodes, f64 values row-major in r.

void save_gridfn(const std::string& path, const GridFn& u);

struct LoadedGridFn {
  Dim dim;
  std::shared_ptr<AxiGrid> grid;  // owns the reconstructed grid
  GridFn fn;
};
LoadedGridFn load_gridfn(const std::string& path);

}  // namespace hstab
