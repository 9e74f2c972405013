#pragma once

// Importance sampling on H^n in the polar-type coordinates
//   |z| = rho sqrt(cos phi),  t = rho^2 sin phi,   rho = hnorm, phi in [-pi/2, pi/2],
// where Haar measure becomes rho^{Q-1} cos^{n-1}(phi) drho dphi dS(direction).
// A base draw takes rho log-uniform on [rho_min, rho_max], phi with density
// proportional to cos^{n-1}, and a uniform direction, giving the closed-form
// density q(xi) = hnorm(xi)^{-Q} / (omega * C_n * log(rho_max/rho_min)).
// Components translate and dilate the base draw; Haar invariance keeps the
// density evaluable in closed form, so mixtures over bubble cores and kernel
// singularities stay unbiased.

#include <functional>
#include <vector>

#include "hstab/dimension.hpp"
#include "hstab/group.hpp"
#include "hstab/rng.hpp"

namespace hstab {

class HMixtureSampler {
 public:
  struct Component {
    HPoint center;
    double scale = 1.0;
    double weight = 1.0;
  };

  HMixtureSampler(Dim dim, std::vector<Component> components, double rho_min = 1e-3,
                  double rho_max = 1e3);

  HPoint draw(Rng& rng) const;
  double pdf(const HPoint& xi) const;
  const Dim& dim() const { return dim_; }

 private:
  HPoint draw_base(Rng& rng) const;
  double pdf_base(const HPoint& xi) const;

  Dim dim_;
  std::vector<Component> comps_;
  double rho_min_, rho_max_;
  double log_span_;
  double angle_const_;  // C_n = int cos^{n-1}
};

// point with hnorm == 1 distributed per the polar angular law cos^{n-1}(phi)
HPoint draw_unit_sphere(const Dim& dim, Rng& rng);

// total angular mass omega_{2n-1} * C_n: for a radial density g(rho) d rho,
// the Lebesgue density at xi is g(hnorm) / (angular_mass * hnorm^{Q-1})
double angular_mass(const Dim& dim);

struct McEstimate {
  double value = 0.0;
  double std_error = 0.0;
  long samples = 0;
};

McEstimate mc_integral(const std::function<double(const HPoint&)>& F, const HMixtureSampler& S,
                       Rng& rng, long n_samples);

}  // namespace hstab
