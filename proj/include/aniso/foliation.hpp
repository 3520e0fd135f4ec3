#pragma once

#include <array>
#include <vector>

#include "aniso/profile.hpp"

namespace aniso {

struct SigmaState {
  double sigma, dsigma, ddsigma;
};

struct AsymptoticFit {
  double a = 0;
  double mu_fit = 0;
  double b_fit = 0;
  double remainder_order = 0;
  double fit_rms = 0;
};

// Solution of G(sigma) = sigma'' + k [P(sigma')/tau + Q(sigma')/sigma] = 0,
// sigma(0) = 1, sigma'(0) = 0. Storage is in three regions: a quartic series
// on [0, tau0], (sigma, sigma') on a log grid on [tau0, 1], and the
// fixed-point offset Y(s) = (e^{-s} sigma(e^s) - 1, sigma'(e^s) - 1) on a
// uniform s = log(tau) grid on [1, tau_max]. The Y form keeps sigma - tau
// fully resolved near the fixed point.
class FoliationCurve {
 public:
  PhiProfile profile;
  int k = 1;
  double tau0 = 1e-3;
  double tau_max = 1e4;
  double tol_ode = 1e-8;

  double series_alpha = 0;  // sigma''(0)
  double series_beta = 0;   // sigma''''(0)

  std::vector<double> tauB;              // log-spaced on [tau0, 1]
  std::vector<std::array<double, 2>> B;  // (sigma, sigma')

  std::vector<double> sC;                // uniform on [0, log(tau_max)]
  std::vector<std::array<double, 2>> C;  // (Y1, Y2)

  AsymptoticFit fit;
  double max_residual = 0;  // finite-difference ODE residual over the grid

  using State2a = std::array<double, 2>;

  // dense evaluation (ddsigma is the ODE right-hand side)
  SigmaState eval(double tau) const;
  // interpolated fixed-point offset Y(s) on the region-C grid
  State2a offsetY(double s) const;
  double sigma(double tau) const { return eval(tau).sigma; }
  double sigma_minus_tau(double tau) const;  // cancellation-free
  double f0(double tau) const;               // sigma - tau sigma'
  double f0prime(double tau) const { return -tau * eval(tau).ddsigma; }

  // sigma'' from the ODE at given (tau, sigma, sigma')
  double rhs(double tau, double sigma, double dsigma) const;
  // autonomous phase field V(w, z) = (z - w, -k(P(z) + Q(z)/w))
  std::array<double, 2> phase_rhs(const std::array<double, 2>& X) const;
  // Y' = W(Y) = V(Y + (1,1)); Jacobian for Hermite interpolation
  std::array<double, 2> offset_rhs(const std::array<double, 2>& Y) const;
  std::array<std::array<double, 2>, 2> offset_jacobian(const std::array<double, 2>& Y) const;

  // report grid: series samples + both integration grids, as tau values
  std::vector<double> report_grid() const;
};

FoliationCurve integrate_sigma(const PhiProfile& profile, double tau_max = 1e4,
                               double tol_ode = 1e-8, int n_per_decade = 400);

AsymptoticFit fit_asymptotics(const FoliationCurve& curve, double window_lo = 1e2);

struct PhaseTrajectory {
  std::vector<double> s;                     // log tau
  std::vector<std::array<double, 2>> X;      // (w, z)
  std::vector<double> coef_p, coef_q;        // eigenframe coefficients of X-(1,1)
  double mu = 0;
  std::array<double, 2> eig = {0, 0};        // -(1+mu), mu-2
  double tail_slope_logY = 0;                // d log|Y| / ds fitted on the tail
};

PhaseTrajectory phase_trajectory(const FoliationCurve& curve);

struct TrapReport {
  bool pass = false;
  double margin_z_low = 0;   // min z
  double margin_z_high = 0;  // min (1 - z)
  double margin_line = 0;    // min (z - (3/2 - w/2))
  double worst_s = 0;
  // measured constants for the |Y|^2 bounds and slope window
  double mod_slope_min = 0, mod_slope_max = 0;
};

TrapReport check_trapping(const FoliationCurve& curve, double margin = 1e-6);

}  // namespace aniso
