#pragma once

#include <functional>
#include <memory>

#include "aniso/barrier.hpp"

namespace aniso {

// Polar sector grid, uniform in (eta, theta) with eta = log(rho).
// Sector mode covers theta in [pi/4, pi/2] (diagonal to the zeta-axis);
// quarter mode covers [0, pi/2] for the odd-reflection consistency check.
struct SectorGrid {
  int n_rho = 128, n_theta = 64;
  double R_ball = 50.0;
  double rho_min = 0;  // R_ball * 1e-3 cutout
  bool quarter = false;
  int k = 1, l = 1;
  std::vector<double> eta, theta;

  static SectorGrid make(int n_rho, int n_theta, double R_ball, int k, bool quarter);
  double rho(int i) const { return std::exp(eta[i]); }
  int idx(int i, int j) const { return i * (n_theta + 1) + j; }
};

// Pointwise reduced graph operator
//   psi11 U_xx + 2 sgn(U_x) sgn(U_z) psi12 U_xz + psi22 U_zz
//   + k sgn(U_x) psi1/xi + k sgn(U_z) psi2/zeta,
// with psi = F(psi_bar) derivatives at (|U_x|, |U_z|).
struct PointDerivs {
  double U_xi, U_zeta, U_xixi, U_xizeta, U_zetazeta;
};
double reduced_operator(const IntegrandStack& stack, int k, double xi, double zeta,
                        const PointDerivs& d);

enum class BoundaryData { Ubar, Zero, ScaledUbar };

struct SolveOptions {
  BoundaryData data = BoundaryData::Ubar;
  double data_factor = 1.0;  // multiplies the (scaled) boundary data
  int max_iters = 500;
  double tol = 1e-8;
  double omega = 0.85;
};

struct PdeSolution {
  SectorGrid grid;
  std::vector<double> U;   // scaled field; physical value = exp(ln_scale) * U
  double ln_scale = 0;
  double rel_residual = 0;
  int iters = 0;
  bool trapped = false;
  double margin_upper = 0;  // min over nodes of (ubar - U)/local scale
  double margin_lower = 0;  // min over nodes of U - uunder (scaled)
  std::vector<std::pair<double, double>> growth_samples;  // (r, ln sup)

  double at(int i, int j) const { return U[grid.idx(i, j)]; }
};

PdeSolution solve_dirichlet(const BarrierSet& barriers, const SectorGrid& grid,
                            const SolveOptions& opts = {});

struct GrowthResult {
  double slope = 0;
  double max_rel_diff = 0;  // Cauchy stability between successive R_ball solves
  std::vector<std::pair<double, double>> samples;
};

GrowthResult growth_exponent(const std::vector<PdeSolution>& solutions);

// Richardson order of accuracy from three nested solves (n, 2n, 4n)
double refinement_order(const BarrierSet& barriers, int n_rho, int n_theta, double R_ball,
                        const SolveOptions& opts = {});

}  // namespace aniso
