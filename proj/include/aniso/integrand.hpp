#pragma once

#include <Eigen/Dense>

#include "aniso/common.hpp"
#include "aniso/profile.hpp"

namespace aniso {

// Two-variable radial representative and its derivatives at (r, s), r,s >= 0.
struct Radial2 {
  double v = 0;
  double v1 = 0, v2 = 0;
  double v11 = 0, v12 = 0, v22 = 0;
};

struct FDerivs {
  double f, d1, d2;
};

// Integrand stack: psi_bar (one-homogeneous), the lift F, psi = F(psi_bar),
// and the five-dimensional integrand Phi. The anisotropic psi is only
// constructed on {psi_bar > 1}; evaluators below that are the even
// polynomial extension of F, used for diagnostics only.
class IntegrandStack {
 public:
  explicit IntegrandStack(PhiProfile profile) : profile_(std::move(profile)) {}

  const PhiProfile& profile() const { return profile_; }
  bool area_kind() const { return profile_.kind == ProfileKind::Area; }
  int multiplicity() const { return profile_.k; }
  double mu() const { return profile_.mu_target; }

  // varphi(r,s) = s phi(r/s) = r phi(s/r), evaluated on the min/max branch so
  // exchange symmetry holds exactly.
  Radial2 varphi(double r, double s) const;

  // F, F', F'' of the one-variable lift (area: sqrt(1+s^2); anisotropic:
  // s + 1/(8s) for s >= 1/2 with an even convex polynomial extension below).
  FDerivs F(double s) const;
  // t^3 F''(t) as t -> infinity (1/4 anisotropic, 1 area).
  double fpp_tail() const { return area_kind() ? 1.0 : 0.25; }

  // psi = F(varphi): radial representative of the four-dimensional integrand.
  Radial2 psi(double r, double s) const;

  // Four-dimensional psi_bar: value, gradient, Hessian at (x, y) in R^2 x R^2.
  double psi_bar(const Eigen::Vector4d& p) const;
  Eigen::Vector4d psi_bar_grad(const Eigen::Vector4d& p) const;
  Eigen::Matrix4d psi_bar_hess(const Eigen::Vector4d& p) const;

  // Five-dimensional Phi(x, y, z) = |z| psi(x/|z|, y/|z|), psi_bar at z = 0.
  // Anisotropic evaluation requires psi_bar(x,y) > |z|/2 (constructed region).
  double Phi(const Eigen::Vector4d& p, double z) const;
  Eigen::Matrix<double, 5, 5> Phi_hess(const Eigen::Vector4d& p, double z) const;

  // Reduced-operator coefficients for the graph equation at gradient
  // q = (q_xi, q_zeta) scaled by e^{ln_scale} (the solver works on u/scale).
  // a11, a12, a22 multiply the second derivatives of the scaled unknown;
  // adv1, adv2 are the advection factors of k/xi * u_xi and k/zeta * u_zeta.
  struct ReducedCoeffs {
    double a11, a12, a22;
    double adv1, adv2;
    double lnPsiBar;  // ln psi_bar(scale * q)
  };
  ReducedCoeffs reduced_coeffs(double q_xi, double q_zeta, double ln_scale) const;

  // F'(e^{lnarg}) and scale^2 F''(scale v) with ln-scale arguments; overflow safe.
  double Fp_at_log(double ln_arg) const;
  double scale2_Fpp(double ln_scale, double v) const;

 private:
  PhiProfile profile_;
};

struct EllipticityReport {
  bool pass = false;
  int n_samples = 0;
  int n_skipped = 0;  // anisotropic samples outside the constructed region
  double min_eig_phi5 = 0;     // restricted Hessian of Phi on S^4
  double min_eig_psi_bar = 0;  // restricted Hessian of psi_bar on S^3
  PhiProfile::PreCheck pre;
};

// Samples unit normals with a seeded RNG; tolerance is the acceptance floor
// for the smallest restricted eigenvalue.
EllipticityReport check_ellipticity(const IntegrandStack& stack, int n_samples,
                                    uint64_t seed = 12345, double tol = 1e-8);

}  // namespace aniso
