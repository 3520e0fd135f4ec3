#pragma once

#include <memory>

#include "aniso/model.hpp"

namespace aniso {

// Collected measured constants behind the I/II/III bounds, all normalized by
// powers of the unperturbed sigma and evaluated at lambda = 1 (the lambda
// scaling is exact by homogeneity).
struct ModelConstants {
  double cg_lo = 0, cg_hi = 0;        // |grad w| / (lambda^-mu sigma^mu)
  double cpsiw_lo = 0, cpsiw_hi = 0;  // psi_bar(grad w) / (lambda^-mu sigma^mu)
  double ch = 0;                      // |D^2 w| / (lambda^{1-mu} sigma^{3mu-...}) (reported)
  double cK = 0;                      // max K_+ sigma^beta / psi_bar(grad w)^3
  double c_sphere_lo = 0;             // min of psi_bar on the unit sphere
  double kappa_phi2_min = 0;          // min phi''(sigma_side') G_side sigma^{beta+2}
  double c1 = 0, c2 = 0, c3 = 0;      // assembled bound constants
};

struct BarrierParams {
  bool area = false;
  double mu = 0, beta = 0.5;
  double gamma = 0, M_exp = 0, delta = 0;
  double g_exp = 0;  // 2 mu/(1+mu): s-power on the H'^2 term of (DesiredSuper)
  double A = 0, B = 0, C = 0;
  double ln_s_edge = 0;    // lambda_C^{-(1+mu)}
  double ln_lambda_C = 0;
  double ln_K = 0;         // K = H_under(s_edge)
  double R_scale = 0;      // 2^{-(1+mu)/mu}
};

BarrierParams make_barrier_params(bool area, double mu, double beta);

// I(s) = int_s^inf t^{delta-1}/(1+t^{2delta}) dt = (pi/2 - atan(s^delta))/delta
double eval_I(const BarrierParams& p, double s);
double eval_I_log(const BarrierParams& p, double ln_s);

// H' = A s^{-gamma} + e^{B I(s)} (concave antiderivative H with H(0) = 0),
// all values carried in logs; H itself by panel quadrature in v = t^delta.
class HBar {
 public:
  HBar(const BarrierParams& p);
  double ln_Hp(double ln_s) const;
  double ln_mHpp(double ln_s) const;  // log of |H''| (H'' < 0)
  double ln_H(double ln_s) const;

 private:
  BarrierParams p_;
  std::vector<double> lnv_, lncum_;  // cumulative exp-integral in ln v
  double ln_exp_integrand(double ln_v) const;
  double ln_exp_integral(double ln_vq) const;
};

// H' = e^{-C I(s)} (convex, H' < 1); H by panel quadrature.
class HUnder {
 public:
  HUnder(const BarrierParams& p);
  double Hp(double ln_s) const;       // in (0, 1]
  double ln_Hp(double ln_s) const { return -p_.C * eval_I_log(p_, ln_s); }
  double ln_Hpp(double ln_s) const;   // H'' > 0
  double ln_H(double ln_s) const;
  // ln of int_a^b H' dt (for H(w) - K without cancellation)
  double ln_H_diff(double ln_a, double ln_b) const;

 private:
  BarrierParams p_;
  std::vector<double> lnv_, lncum_;
  double ln_exp_integrand(double ln_v) const;
  double ln_exp_integral(double ln_vq) const;
  friend class BarrierSet;
};

ModelConstants measure_model_constants(const PerturbedPair& pair, const IntegrandStack& stack);

struct ScanResult {
  double accepted = 0;          // A or C
  double threshold = 0;         // margin * max(1, c3/min(c1, c2)-style)
  std::vector<double> ln_infE;  // grid-inf of ln E at accepted, x2, x4, x8
};

// Doubling scans per the (DesiredSuper)/(DesiredSub) grid conditions.
ScanResult choose_A(BarrierParams& p, const ModelConstants& mc);
ScanResult choose_C(BarrierParams& p, const ModelConstants& mc, const IntegrandStack& stack);

struct SignReport {
  bool pass = false;
  int n_samples = 0;
  // min over samples of log(|I| + |II|) - log(III_+); positive means the
  // favorable terms dominate (sign certificate in logs, no underflow)
  double margin_super = 0;
  double margin_sub = 0;
  double min_ln_psibar_grad_super = 0;  // gradient-domain certificate
  double min_ln_psibar_grad_sub = 0;
};

// Barriers assembled from the homogeneous models:
//   ubar = Hbar(w_bar);  uunder = R^{-1} max{0, Hunder(w_under(R .)) - K}.
class BarrierSet {
 public:
  BarrierParams params;
  ModelConstants constants;
  ScanResult scanA, scanC;
  std::shared_ptr<const IntegrandStack> stack;
  std::shared_ptr<const PerturbedPair> pair;
  std::shared_ptr<const HomogeneousModel> upper, lower;
  std::shared_ptr<const HBar> hbar;
  std::shared_ptr<const HUnder> hunder;

  double ln_ubar(double xi, double zeta) const;   // zeta > xi >= 0
  double ln_ubar_log(double ln_xi, double ln_zeta) const;
  double uunder(double xi, double zeta) const;    // 0 near the cone/origin
  double ln_uunder_log(double ln_xi, double ln_zeta) const;  // -inf if truncated

  // leaf-coordinate forms (lambda may be astronomically small on the sub side)
  double ln_ubar_leaf(double ln_lambda) const;

  SignReport verify_pointwise(int n_samples, uint64_t seed = 99) const;

  struct GrowthReport {
    double slope_ubar = 0;   // measured at radii beyond the plateau
    double slope_uunder = 0; // measured on the truncation ladder r*, 10r*, ...
    double ln_r_star = 0;    // smallest axis radius with uunder > 0
    double c_growth = 0;     // min uunder(r)/r^{1+mu} over the ladder (in logs)
  };
  GrowthReport growth() const;

  // ordering uunder <= ubar on a deterministic sample (desk + leaf ladder)
  void check_ordering(int n_samples, uint64_t seed = 7) const;
};

BarrierSet assemble_barriers(std::shared_ptr<const IntegrandStack> stack,
                             std::shared_ptr<const PerturbedPair> pair,
                             double margin = 2.0);

}  // namespace aniso
