#pragma once

#include <optional>
#include <vector>

#include "aniso/common.hpp"

namespace aniso {

// One-variable profile phi defining the integrand. Derivatives are exact
// (differentiated family formulas, no numerics).
enum class ProfileKind { Area, Bump, EvenSeries };

struct PhiDerivs {
  double f, d1, d2, d3;
};

class PhiProfile {
 public:
  ProfileKind kind = ProfileKind::Area;
  int k = 1;                 // area multiplicity (x,y in R^{k+1})
  double mu_target = 0;      // exponent the profile is designed for
  double kappa = 0;          // bump amplitude
  double width = 0;          // bump width
  std::vector<double> even_coeffs;  // c_j of s^{2j} for EvenSeries
  bool mudef_compatible = true;

  PhiDerivs eval(double s) const;
  double phi(double s) const { return eval(s).f; }
  double dphi(double s) const { return eval(s).d1; }
  double ddphi(double s) const { return eval(s).d2; }
  double dddphi(double s) const { return eval(s).d3; }

  // ODE coefficients P = phi'/phi'', Q = (s phi' - phi)/phi''.
  // Throws DegenerateConvexity if phi''(s) <= 0.
  std::pair<double, double> PQ(double s) const;
  double P(double s) const { return PQ(s).first; }
  double Q(double s) const { return PQ(s).second; }

  // Scalar admissibility pre-checks: phi'' > 0 on [0, s_max] and
  // phi' > 0, phi - s phi' > 0 on (0, 1]. Returns worst margin and location.
  struct PreCheck {
    bool pass = false;
    double min_ddphi = 0, min_dphi = 0, min_phi_minus = 0;
    double argmin_ddphi = 0;
  };
  PreCheck pre_check(double s_max = 10.0, int n = 4001) const;

  void validate() const;  // evenness, compatibility, exponent identity, positivity
};

// Area-case exponents (x,y in R^{k+1}, k >= 3):
//   mu    = (k-1/2) - sqrt((k-1/2)^2 - 2k)
//   alpha = min{(k-1/2) + sqrt((k-1/2)^2 - 2k), 2 mu + 1}
double area_mu(int k);
double area_alpha(int k);

PhiProfile build_phi_area(int k);
PhiProfile build_phi_bump(double mu, double width);
// Even-polynomial family with phi'' = a + b s^{2n}; (a, b, c0) solved so that
// 2 phi'(1) = phi(1) and phi(1)/(2 phi''(1)) = mu(1-mu).
PhiProfile build_phi_even_poly(double mu, int n);
PhiProfile build_phi_even_series(double mu, std::vector<double> coeffs);

}  // namespace aniso
