#pragma once

#include <memory>

#include "aniso/foliation.hpp"

namespace aniso {

enum class Side { Upper, Lower };

// Lf = f'' + [log p]' f' + q f, the linearization of G at sigma, with
// p = tau sigma phi''(sigma') and q = (phi - sigma' phi')/(sigma^2 phi'').
struct LCoeffs {
  double logp_prime, q;
};
LCoeffs l_coeffs(const FoliationCurve& curve, double tau);
double eval_L(const FoliationCurve& curve, double f, double fp, double fpp, double tau);

// f1 solves Lf = g, f(0) = f'(0) = 0, for g = sigma^{-beta-2}, via
//   f = f0 int_0^tau 1/(f0^2 p) int_0^t g p f0 ds dt
// with panel quadrature on the curve grid.
class JacobiSolution {
 public:
  JacobiSolution(std::shared_ptr<const FoliationCurve> curve, double beta);

  double g(double tau) const;
  double f1(double tau) const;
  double f1_prime(double tau) const;
  double f1_second(double tau) const;  // via the ODE identity Lf1 = g
  double v_prime(double tau) const;    // inner/outer integrand value
  double beta() const { return beta_; }
  const FoliationCurve& curve() const { return *curve_; }
  std::shared_ptr<const FoliationCurve> curve_ptr() const { return curve_; }

  // fitted tail f1 ~ d tau^{-mu}
  double d_fit = 0;
  double d_slope = 0;

 private:
  double inner_J(double tau) const;  // int_0^tau g p f0
  double outer_V(double tau) const;  // int_0^tau J/(f0^2 p)
  double inner_integrand(double t) const;
  double outer_integrand(double t) const;

  std::shared_ptr<const FoliationCurve> curve_;
  double beta_;
  std::vector<double> nodes_;      // quadrature grid (strictly increasing, from 0)
  std::vector<double> Jnodes_;     // cumulative inner integral at nodes
  std::vector<double> Vnodes_;     // cumulative outer integral at nodes
  friend JacobiSolution solve_inhomogeneous(std::shared_ptr<const FoliationCurve>, double);
};

JacobiSolution solve_inhomogeneous(std::shared_ptr<const FoliationCurve> curve, double beta);

// sigma_bar = sigma + eps0 f1, sigma_under = sigma - eps0 f1, with certified
// sign conditions G(sigma_bar) >= (eps0/2) g > 0 > -(eps0/2) g >= G(sigma_under),
// convexity, ordering and positive fitted leading coefficients.
class PerturbedPair {
 public:
  double epsilon0 = 0;
  double beta = 0.5;
  double kappa_bar = 0, kappa_under = 0;
  AsymptoticFit fit_bar, fit_under;
  double d_fit = 0;

  SigmaState sigma_side(double tau, Side side) const;
  double sigma_minus_tau(double tau, Side side) const;   // cancellation-free
  double f0_side(double tau, Side side) const;           // sigma - tau sigma'
  double G_side(double tau, Side side) const;            // G_k at the perturbed curve
  double g(double tau) const { return jac_->g(tau); }

  double mu() const;
  bool beyond_grid(double tau) const;
  double tau_max() const { return curve_->tau_max; }
  const FoliationCurve& curve() const { return *curve_; }
  const PhiProfile& profile() const { return curve_->profile; }
  const JacobiSolution& jacobi() const { return *jac_; }

  std::shared_ptr<const FoliationCurve> curve_;
  std::shared_ptr<const JacobiSolution> jac_;
};

PerturbedPair select_epsilon0(std::shared_ptr<const FoliationCurve> curve,
                              std::shared_ptr<const JacobiSolution> jac);

}  // namespace aniso
