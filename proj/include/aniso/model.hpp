#pragma once

#include <Eigen/Dense>
#include <memory>

#include "aniso/integrand.hpp"
#include "aniso/jacobi.hpp"

namespace aniso {

// Quantities of a homogeneous model function at the leaf point
// (xi, zeta) = lambda^{-1} (tau, sigma_side(tau)).
struct LeafData {
  double lambda = 0, tau = 0;
  double w = 0;                          // lambda^{-(1+mu)}
  double grad_xi = 0, grad_zeta = 0;     // two-variable gradient
  double grad_norm = 0;
  double hxx = 0, hxz = 0, hzz = 0;      // two-variable Hessian
  double tang1 = 0, tang2 = 0;           // angular entries w_xi/xi, w_zeta/zeta
  double psibar_grad = 0;                // psi_bar(grad w)
  double K3 = 0;                         // psi_bar_i psi_bar_j (grad w) w_ij
  double curvature = 0;                  // psi_bar_ij(grad w) w_ij = -lambda phi'' G
};

// Degree-(1+mu) function constant on the dilations of one perturbed leaf,
// vanishing on the diagonal, extended odd across it.
class HomogeneousModel {
 public:
  HomogeneousModel(std::shared_ptr<const PerturbedPair> pair, Side side,
                   double chart_tol = 1e-12);

  Side side() const { return side_; }
  double mu() const { return mu_; }
  double degree() const { return 1.0 + mu_; }
  const PerturbedPair& pair() const { return *pair_; }

  // (xi, zeta) -> (lambda, tau) with (xi, zeta) = lambda^{-1}(tau, sigma(tau)).
  // Requires zeta > xi >= 0 and (xi, zeta) != 0.
  std::pair<double, double> chart_invert(double xi, double zeta) const;
  // same, with inputs/outputs in logs (usable at astronomic radii)
  std::pair<double, double> chart_invert_log(double ln_xi, double ln_zeta) const;

  // all model quantities at leaf coordinates (works for any lambda > 0)
  LeafData at_leaf(double lambda, double tau, const IntegrandStack& stack) const;

  // w and derivatives at a point of R^4 = R^2 x R^2 (odd across the diagonal)
  double value(const Eigen::Vector4d& p) const;
  Eigen::Vector4d gradient(const Eigen::Vector4d& p) const;
  Eigen::Matrix4d hessian(const Eigen::Vector4d& p) const;  // OnCone near diagonal

  // ln w at (xi, zeta), zeta > xi: chart in logs
  double ln_value(double ln_xi, double ln_zeta) const;

  SigmaState sigma(double tau) const { return pair_->sigma_side(tau, side_); }

 private:
  std::pair<double, double> invert_ratio(double q) const;  // solves smt(tau)/tau = q

  std::shared_ptr<const PerturbedPair> pair_;
  Side side_;
  double mu_;
  double chart_tol_;
};

// lhs = contraction of D^2 psi_bar(grad w) with D^2 w (closed forms);
// rhs = -lambda phi''(sigma_side') G(sigma_side).
std::pair<double, double> curvature_term(const HomogeneousModel& model,
                                         const IntegrandStack& stack, double lambda,
                                         double tau);

// One generic reduced contraction used by both the model identity and the
// PDE operator: kind picks psi_bar (cone operator) or psi = F(psi_bar).
struct Patch2 {
  double U_xi, U_zeta;
  double U_xixi, U_xizeta, U_zetazeta;
  double ratio1, ratio2;  // U_xi/xi and U_zeta/zeta with their axis limits
};
double reduced_contraction_psibar(const IntegrandStack& stack, int k, const Patch2& p);

}  // namespace aniso
