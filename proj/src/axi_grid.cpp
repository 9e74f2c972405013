#include "hstab/axi_grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <memory>

#include "hstab/errors.hpp"

namespace hstab {

namespace {

// antiderivative of s^{2n-1} (Haar radial weight)
double haar_moment(int n, double s) { return std::pow(s, 2 * n) / (2 * n); }

// antiderivative of s^{1-2n} (radial resistivity)
double resist_moment(int n, double s) {
  if (n == 1) return std::log(s);
  return std::pow(s, 2 - 2 * n) / (2 - 2 * n);
}

// antiderivative of s^{2n+1} (t-conduction weight, from the 4 r^2 coefficient)
double tcond_moment(int n, double s) { return std::pow(s, 2 * n + 2) / (2 * n + 2); }

void check_increasing(const Eigen::VectorXd& x, const char* what) {
  for (int i = 0; i + 1 < x.size(); ++i)
    if (!(x[i] < x[i + 1])) throw NumericsError(std::string(what) + " nodes not strictly increasing");
}

}  // namespace

AxiGrid::AxiGrid(Dim d, Eigen::VectorXd r_nodes, Eigen::VectorXd t_nodes)
    : dim(d), r(std::move(r_nodes)), t(std::move(t_nodes)) {
  if (r.size() < 3 || t.size() < 3) throw NumericsError("grid needs at least 3 nodes per axis");
  if (!(r[0] > 0.0)) throw NumericsError("first radial node must be positive");
  check_increasing(r, "r");
  check_increasing(t, "t");

  const int n = dim.n;
  const double omega = dim.sphere_area();
  const int Nr = nr(), Nt = nt();

  // control volumes: midpoint splits, first r cell reaches the axis, outer
  // cells stop at the box edge (node itself)
  wr.resize(Nr);
  ct.resize(Nr);
  double lo = 0.0;
  for (int i = 0; i < Nr; ++i) {
    double hi = (i + 1 < Nr) ? 0.5 * (r[i] + r[i + 1]) : r[i];
    wr[i] = omega * (haar_moment(n, hi) - haar_moment(n, lo));
    ct[i] = 4.0 * omega * (tcond_moment(n, hi) - tcond_moment(n, lo));
    lo = hi;
  }

  wt.resize(Nt);
  double tlo = t[0];
  for (int j = 0; j < Nt; ++j) {
    double thi = (j + 1 < Nt) ? 0.5 * (t[j] + t[j + 1]) : t[j];
    wt[j] = thi - tlo;
    tlo = thi;
  }

  hr.resize(Nr - 1);
  for (int i = 0; i + 1 < Nr; ++i)
    hr[i] = omega / (resist_moment(n, r[i + 1]) - resist_moment(n, r[i]));

  dt = t.tail(Nt - 1) - t.head(Nt - 1);
}

GridFn sample(const AxiGrid& g, const std::function<double(double, double)>& F) {
  GridFn u(g);
  for (int i = 0; i < g.nr(); ++i)
    for (int j = 0; j < g.nt(); ++j) u.at(i, j) = F(g.r[i], g.t[j]);
  return u;
}

double integrate(const GridFn& u) {
  const AxiGrid& g = *u.grid;
  double acc = 0.0;
  for (int i = 0; i < g.nr(); ++i) {
    double row = 0.0;
    for (int j = 0; j < g.nt(); ++j) row += g.wt[j] * u.at(i, j);
    acc += g.wr[i] * row;
  }
  return acc;
}

double l2_norm(const GridFn& u) {
  const AxiGrid& g = *u.grid;
  double acc = 0.0;
  for (int i = 0; i < g.nr(); ++i)
    for (int j = 0; j < g.nt(); ++j) acc += g.wr[i] * g.wt[j] * u.at(i, j) * u.at(i, j);
  return std::sqrt(std::max(0.0, acc));
}

double d1_inner(const GridFn& u, const GridFn& v) {
  const AxiGrid& g = *u.grid;
  double acc = 0.0;
  for (int i = 0; i + 1 < g.nr(); ++i)
    for (int j = 0; j < g.nt(); ++j) {
      double du = u.at(i + 1, j) - u.at(i, j);
      double dv = v.at(i + 1, j) - v.at(i, j);
      acc += g.hr[i] * g.wt[j] * du * dv;
    }
  for (int i = 0; i < g.nr(); ++i)
    for (int j = 0; j + 1 < g.nt(); ++j) {
      double du = u.at(i, j + 1) - u.at(i, j);
      double dv = v.at(i, j + 1) - v.at(i, j);
      acc += g.ct[i] / g.dt[j] * du * dv;
    }
  return acc;
}

GridFn apply_sublap(const GridFn& u) {
  const AxiGrid& g = *u.grid;
  GridFn out(g);
  for (int i = 0; i + 1 < g.nr(); ++i)
    for (int j = 1; j + 1 < g.nt(); ++j) {
      double flux = 0.0;  // sum g_edge * (u_here - u_there) = -(W L u)_ij
      if (i > 0) flux += g.hr[i - 1] * g.wt[j] * (u.at(i, j) - u.at(i - 1, j));
      flux += g.hr[i] * g.wt[j] * (u.at(i, j) - u.at(i + 1, j));
      flux += g.ct[i] / g.dt[j - 1] * (u.at(i, j) - u.at(i, j - 1));
      flux += g.ct[i] / g.dt[j] * (u.at(i, j) - u.at(i, j + 1));
      out.at(i, j) = -flux / (g.wr[i] * g.wt[j]);
    }
  return out;
}

double boundary_ratio(const GridFn& u) {
  const AxiGrid& g = *u.grid;
  double bmax = 0.0, all = 0.0;
  for (int i = 0; i < g.nr(); ++i)
    for (int j = 0; j < g.nt(); ++j) {
      double a = std::abs(u.at(i, j));
      all = std::max(all, a);
      if (g.is_boundary(i, j)) bmax = std::max(bmax, a);
    }
  return all > 0.0 ? bmax / all : 0.0;
}

// --- construction ---------------------------------------------------------------

namespace {

// partial sum h0 (q^j - 1)/(q - 1), stable near q = 1
double geom_prefix(double q, double h0, int j) {
  if (std::abs(q - 1.0) < 1e-12) return h0 * j;
  return h0 * (std::pow(q, j) - 1.0) / (q - 1.0);
}

// offsets 0 = s_0 < s_1 = h0 < ... < s_k = L with geometric step growth
std::vector<double> geom_segment(double L, int k, double h0) {
  std::vector<double> s(k + 1);
  if (k * h0 >= L) {  // budget already finer than needed: uniform
    for (int j = 0; j <= k; ++j) s[j] = L * j / k;
    return s;
  }
  double lo = 1.0, hi = 2.0;
  while (geom_prefix(hi, h0, k) < L && hi < 64.0) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    (geom_prefix(mid, h0, k) < L ? lo : hi) = mid;
  }
  double q = 0.5 * (lo + hi);
  for (int j = 0; j <= k; ++j) s[j] = geom_prefix(q, h0, j);
  s[k] = L;
  return s;
}

}  // namespace

AxiGrid build_grid(const Dim& dim, const GridSpec& spec) {
  if (spec.nr < 8 || spec.nt < 8) throw NumericsError("grid resolution too small");
  if (!(spec.R > 0) || !(spec.t_hi > spec.t_lo)) throw NumericsError("bad grid box");
  if (spec.t_centers.empty() || spec.h0_t.size() != spec.t_centers.size())
    throw NumericsError("grid spec needs one t step per center");
  for (size_t i = 0; i < spec.t_centers.size(); ++i) {
    if (!(spec.t_centers[i] > spec.t_lo && spec.t_centers[i] < spec.t_hi))
      throw NumericsError("t center outside box");
    if (i + 1 < spec.t_centers.size() && !(spec.t_centers[i] < spec.t_centers[i + 1]))
      throw NumericsError("t centers must be strictly increasing");
  }

  // radial nodes: one graded segment from the axis, drop the 0 offset
  std::vector<double> roff = geom_segment(spec.R, spec.nr, spec.h0_r);
  Eigen::VectorXd r(spec.nr);
  for (int i = 0; i < spec.nr; ++i) r[i] = roff[i + 1];
  r[spec.nr - 1] = spec.R;

  // t nodes: two graded segments per center, outward to segment boundaries at
  // midpoints between neighboring centers (box edges at the ends)
  const size_t m = spec.t_centers.size();
  struct Seg {
    double from, to, h0;  // graded from |from| side
  };
  std::vector<Seg> segs;
  for (size_t i = 0; i < m; ++i) {
    double left = (i == 0) ? spec.t_lo : 0.5 * (spec.t_centers[i - 1] + spec.t_centers[i]);
    double right = (i + 1 == m) ? spec.t_hi : 0.5 * (spec.t_centers[i] + spec.t_centers[i + 1]);
    segs.push_back({spec.t_centers[i], left, spec.h0_t[i]});
    segs.push_back({spec.t_centers[i], right, spec.h0_t[i]});
  }
  std::vector<double> wgt(segs.size());
  double wsum = 0.0;
  for (size_t s = 0; s < segs.size(); ++s) {
    double L = std::abs(segs[s].to - segs[s].from);
    wgt[s] = std::log2(1.0 + L / segs[s].h0);
    wsum += wgt[s];
  }
  std::vector<double> tn;
  for (size_t s = 0; s < segs.size(); ++s) {
    double L = std::abs(segs[s].to - segs[s].from);
    int k = std::max(4, static_cast<int>(std::lround(spec.nt * wgt[s] / wsum)));
    std::vector<double> off = geom_segment(L, k, segs[s].h0);
    double sgn = (segs[s].to > segs[s].from) ? 1.0 : -1.0;
    for (int j = (s % 2 == 0) ? 1 : 0; j <= k; ++j)  // share the center node once
      tn.push_back(segs[s].from + sgn * off[j]);
  }
  std::sort(tn.begin(), tn.end());
  tn.erase(std::unique(tn.begin(), tn.end(),
                       [](double a, double b) { return std::abs(a - b) < 1e-13; }),
           tn.end());
  Eigen::VectorXd t = Eigen::Map<Eigen::VectorXd>(tn.data(), static_cast<int>(tn.size()));
  t[0] = spec.t_lo;
  t[t.size() - 1] = spec.t_hi;

  return AxiGrid(dim, std::move(r), std::move(t));
}

AxiGrid grid_for_config(const BubbleConfig& config, int resolution, double box_factor,
                        double core_res) {
  if (!config.all_on_axis()) throw NumericsError("grid_for_config needs an on-axis configuration");
  GridSpec spec;
  spec.nr = resolution;
  spec.nt = resolution;

  double smax = 0.0, smin = 1e300;
  double cmin = 1e300, cmax = -1e300;
  for (const Gauge& g : config.gauges) {
    double s = 1.0 / g.lambda;
    smax = std::max(smax, s);
    smin = std::min(smin, s);
    cmin = std::min(cmin, g.xi.t);
    cmax = std::max(cmax, g.xi.t);
  }
  double D = smax;
  for (size_t i = 0; i < config.gauges.size(); ++i)
    for (size_t j = i + 1; j < config.gauges.size(); ++j)
      D = std::max(D, hdist(config.gauges[i].xi, config.gauges[j].xi));
  double R_ball = box_factor * std::max(D, 1.0);

  spec.R = R_ball;
  spec.t_lo = cmin - R_ball * R_ball;
  spec.t_hi = cmax + R_ball * R_ball;
  // first steps shrink with resolution so refinement reaches the cores, not
  // just the graded tail
  spec.h0_r = smin * core_res / resolution;

  // centers sorted with matching core steps
  std::vector<std::pair<double, double>> centers;
  for (const Gauge& g : config.gauges)
    centers.push_back({g.xi.t, (core_res / resolution) / (g.lambda * g.lambda)});
  std::sort(centers.begin(), centers.end());
  spec.t_centers.clear();
  spec.h0_t.clear();
  for (auto& [c, h] : centers) {
    if (!spec.t_centers.empty() && c - spec.t_centers.back() < 1e-12) continue;  // merged cores
    spec.t_centers.push_back(c);
    spec.h0_t.push_back(h);
  }
  return build_grid(config.dim, spec);
}

// --- binary i/o -----------------------------------------------------------------

namespace {
constexpr char kMagic[4] = {'H', 'G', 'F', '1'};

void put_u32(std::ostream& os, uint32_t v) { os.write(reinterpret_cast<const char*>(&v), 4); }
uint32_t get_u32(std::istream& is) {
  uint32_t v = 0;
  is.read(reinterpret_cast<char*>(&v), 4);
  return v;
}
}  // namespace

void save_gridfn(const std::string& path, const GridFn& u) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open for writing: " + path);
  const AxiGrid& g = *u.grid;
  os.write(kMagic, 4);
  put_u32(os, static_cast<uint32_t>(g.dim.n));
  put_u32(os, static_cast<uint32_t>(g.nr()));
  put_u32(os, static_cast<uint32_t>(g.nt()));
  os.write(reinterpret_cast<const char*>(g.r.data()), g.nr() * 8);
  os.write(reinterpret_cast<const char*>(g.t.data()), g.nt() * 8);
  os.write(reinterpret_cast<const char*>(u.v.data()), g.size() * 8);
  if (!os) throw IoError("short write: " + path);
}

LoadedGridFn load_gridfn(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open for reading: " + path);
  char magic[4] = {};
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0) throw IoError("bad grid file magic: " + path);
  uint32_t n = get_u32(is), Nr = get_u32(is), Nt = get_u32(is);
  if (!is || n < 1 || n > 64 || Nr < 3 || Nt < 3 || Nr > (1u << 20) || Nt > (1u << 20))
    throw IoError("bad grid file header: " + path);
  Eigen::VectorXd r(Nr), t(Nt), v(static_cast<long>(Nr) * Nt);
  is.read(reinterpret_cast<char*>(r.data()), Nr * 8);
  is.read(reinterpret_cast<char*>(t.data()), Nt * 8);
  is.read(reinterpret_cast<char*>(v.data()), static_cast<long>(Nr) * Nt * 8);
  if (!is) throw IoError("truncated grid file: " + path);
  for (uint32_t i = 0; i + 1 < Nr; ++i)
    if (!(r[i] < r[i + 1])) throw IoError("grid file r nodes not increasing: " + path);
  for (uint32_t j = 0; j + 1 < Nt; ++j)
    if (!(t[j] < t[j + 1])) throw IoError("grid file t nodes not increasing: " + path);
  if (!(r[0] > 0)) throw IoError("grid file has nonpositive radius: " + path);

  LoadedGridFn out{Dim(static_cast<int>(n)),
                   std::make_shared<AxiGrid>(Dim(static_cast<int>(n)), std::move(r), std::move(t)),
                   GridFn{}};
  out.fn.grid = out.grid.get();
  out.fn.v = std::move(v);
  return out;
}

}  // namespace hstab
