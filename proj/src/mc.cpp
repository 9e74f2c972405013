#include "hstab/mc.hpp"

#include <cmath>

#include "hstab/errors.hpp"

namespace hstab {

namespace {

// int_{-pi/2}^{pi/2} cos^{n-1}(phi) dphi
double angle_norm(int n) {
  if (n == 1) return M_PI;
  if (n == 2) return 2.0;
  // recursion C_k = (k-2)/(k-1) C_{k-2} for the cos power k-1
  double c = (n % 2 == 1) ? M_PI : 2.0;
  for (int k = (n % 2 == 1) ? 3 : 4; k <= n; k += 2) c *= (k - 2.0) / (k - 1.0);
  return c;
}

// int_{-pi/2}^{phi} cos^k by the standard reduction
double cos_power_cdf(int k, double phi) {
  if (k == 0) return phi + M_PI_2;
  if (k == 1) return std::sin(phi) + 1.0;
  return (std::pow(std::cos(phi), k - 1) * std::sin(phi) + (k - 1) * cos_power_cdf(k - 2, phi)) / k;
}

// draw phi with density cos^{n-1}(phi) / C_n on [-pi/2, pi/2]
double draw_phi(int n, Rng& rng) {
  if (n == 1) return rng.uniform(-M_PI_2, M_PI_2);
  if (n == 2) return std::asin(rng.uniform(-1.0, 1.0));
  double target = rng.uniform() * angle_norm(n);
  double lo = -M_PI_2, hi = M_PI_2;
  for (int it = 0; it < 60; ++it) {
    double mid = 0.5 * (lo + hi);
    (cos_power_cdf(n - 1, mid) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

HPoint draw_unit_sphere(const Dim& dim, Rng& rng) {
  const int n = dim.n;
  double phi = draw_phi(n, rng);
  double r = std::sqrt(std::cos(phi));
  HPoint xi = HPoint::origin(n);
  xi.t = std::sin(phi);
  Eigen::VectorXd dir(2 * n);
  double nrm = 0.0;
  do {
    for (int i = 0; i < 2 * n; ++i) dir[i] = rng.normal();
    nrm = dir.norm();
  } while (nrm < 1e-12);
  dir *= r / nrm;
  xi.x = dir.head(n);
  xi.y = dir.tail(n);
  return xi;
}

double angular_mass(const Dim& dim) { return dim.sphere_area() * angle_norm(dim.n); }

HMixtureSampler::HMixtureSampler(Dim dim, std::vector<Component> components, double rho_min,
                                 double rho_max)
    : dim_(dim), comps_(std::move(components)), rho_min_(rho_min), rho_max_(rho_max) {
  if (comps_.empty()) throw NumericsError("sampler needs at least one component");
  if (!(rho_min > 0 && rho_max > rho_min)) throw NumericsError("bad sampler radial range");
  double wsum = 0.0;
  for (auto& c : comps_) {
    if (!(c.weight > 0) || !(c.scale > 0)) throw NumericsError("bad sampler component");
    wsum += c.weight;
  }
  for (auto& c : comps_) c.weight /= wsum;
  log_span_ = std::log(rho_max_ / rho_min_);
  angle_const_ = angle_norm(dim_.n);
}

HPoint HMixtureSampler::draw_base(Rng& rng) const {
  const int n = dim_.n;
  double rho = rho_min_ * std::exp(rng.uniform() * log_span_);
  double phi = draw_phi(n, rng);
  double r = rho * std::sqrt(std::cos(phi));
  HPoint xi = HPoint::origin(n);
  xi.t = rho * rho * std::sin(phi);
  // uniform direction on S^{2n-1}
  Eigen::VectorXd dir(2 * n);
  double nrm = 0.0;
  do {
    for (int i = 0; i < 2 * n; ++i) dir[i] = rng.normal();
    nrm = dir.norm();
  } while (nrm < 1e-12);
  dir *= r / nrm;
  xi.x = dir.head(n);
  xi.y = dir.tail(n);
  return xi;
}

double HMixtureSampler::pdf_base(const HPoint& xi) const {
  double rho = hnorm(xi);
  if (rho <= rho_min_ || rho >= rho_max_) return 0.0;
  return std::pow(rho, -dim_.Q()) / (dim_.sphere_area() * angle_const_ * log_span_);
}

HPoint HMixtureSampler::draw(Rng& rng) const {
  double u = rng.uniform();
  size_t pick = comps_.size() - 1;
  double acc = 0.0;
  for (size_t i = 0; i < comps_.size(); ++i) {
    acc += comps_[i].weight;
    if (u <= acc) {
      pick = i;
      break;
    }
  }
  const Component& c = comps_[pick];
  return compose(c.center, dilate(c.scale, draw_base(rng)));
}

double HMixtureSampler::pdf(const HPoint& xi) const {
  double q = 0.0;
  for (const Component& c : comps_) {
    HPoint local = dilate(1.0 / c.scale, compose(inverse(c.center), xi));
    q += c.weight * pdf_base(local) * std::pow(c.scale, -dim_.Q());
  }
  return q;
}

McEstimate mc_integral(const std::function<double(const HPoint&)>& F, const HMixtureSampler& S,
                       Rng& rng, long n_samples) {
  double sum = 0.0, sumsq = 0.0;
  for (long k = 0; k < n_samples; ++k) {
    HPoint xi = S.draw(rng);
    double q = S.pdf(xi);
    double w = (q > 0.0) ? F(xi) / q : 0.0;
    sum += w;
    sumsq += w * w;
  }
  McEstimate e;
  e.samples = n_samples;
  e.value = sum / n_samples;
  double var = std::max(0.0, sumsq / n_samples - e.value * e.value);
  e.std_error = std::sqrt(var / n_samples);
  return e;
}

}  // namespace hstab
