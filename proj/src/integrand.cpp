#include "aniso/integrand.hpp"

#include <random>

namespace aniso {

namespace {
// Even polynomial extension of s + 1/(8s) below s = 1/2: matches value and
// two derivatives at 1/2, F'(0) = 0, F'' > 0 on (0, 1/2].
constexpr double kExtA = 21.0 / 32.0;
constexpr double kExtB = 1.0 / 4.0;
constexpr double kExtC = 1.0 / 2.0;
}  // namespace

Radial2 IntegrandStack::varphi(double r, double s) const {
  r = std::abs(r);
  s = std::abs(s);
  if (r == 0 && s == 0) fail(ErrorCode::BadConfig, "varphi at origin");
  const bool swap = r > s;
  if (swap) std::swap(r, s);
  const double t = r / s;
  const PhiDerivs d = profile_.eval(t);
  Radial2 out;
  out.v = s * d.f;
  out.v1 = d.d1;
  out.v2 = d.f - t * d.d1;
  out.v11 = d.d2 / s;
  out.v12 = -t * d.d2 / s;
  out.v22 = t * t * d.d2 / s;
  if (swap) {
    std::swap(out.v1, out.v2);
    std::swap(out.v11, out.v22);
  }
  return out;
}

FDerivs IntegrandStack::F(double s) const {
  if (s < 0) fail(ErrorCode::BadConfig, "F requires s >= 0");
  if (area_kind()) {
    const double r = std::sqrt(1.0 + s * s);
    return {r, s / r, 1.0 / (r * r * r)};
  }
  if (s >= 0.5) return {s + 0.125 / s, 1.0 - 0.125 / (s * s), 0.25 / (s * s * s)};
  return {kExtA + kExtB * s * s + kExtC * s * s * s * s,
          2 * kExtB * s + 4 * kExtC * s * s * s, 2 * kExtB + 12 * kExtC * s * s};
}

Radial2 IntegrandStack::psi(double r, double s) const {
  const Radial2 v = varphi(r, s);
  const FDerivs f = F(v.v);
  Radial2 out;
  out.v = f.f;
  out.v1 = f.d1 * v.v1;
  out.v2 = f.d1 * v.v2;
  out.v11 = f.d2 * v.v1 * v.v1 + f.d1 * v.v11;
  out.v12 = f.d2 * v.v1 * v.v2 + f.d1 * v.v12;
  out.v22 = f.d2 * v.v2 * v.v2 + f.d1 * v.v22;
  return out;
}

double IntegrandStack::psi_bar(const Eigen::Vector4d& p) const {
  const double xi = p.head<2>().norm(), zeta = p.tail<2>().norm();
  return varphi(xi, zeta).v;
}

Eigen::Vector4d IntegrandStack::psi_bar_grad(const Eigen::Vector4d& p) const {
  const double xi = p.head<2>().norm(), zeta = p.tail<2>().norm();
  const Radial2 v = varphi(xi, zeta);
  Eigen::Vector4d g = Eigen::Vector4d::Zero();
  if (xi > 0) g.head<2>() = v.v1 * p.head<2>() / xi;
  if (zeta > 0) g.tail<2>() = v.v2 * p.tail<2>() / zeta;
  return g;
}

Eigen::Matrix4d IntegrandStack::psi_bar_hess(const Eigen::Vector4d& p) const {
  const double xi = p.head<2>().norm(), zeta = p.tail<2>().norm();
  const Radial2 v = varphi(xi, zeta);
  Eigen::Vector2d xh = xi > 0 ? (p.head<2>() / xi).eval() : Eigen::Vector2d(1, 0);
  Eigen::Vector2d yh = zeta > 0 ? (p.tail<2>() / zeta).eval() : Eigen::Vector2d(1, 0);
  const Eigen::Matrix2d Px = Eigen::Matrix2d::Identity() - xh * xh.transpose();
  const Eigen::Matrix2d Py = Eigen::Matrix2d::Identity() - yh * yh.transpose();
  // tangential coefficients v1/xi, v2/zeta with their axis limits
  const double phi2_0 = profile_.ddphi(0.0);
  const double t1 = xi > 1e-13 * zeta ? v.v1 / xi : phi2_0 / zeta;
  const double t2 = zeta > 1e-13 * xi ? v.v2 / zeta : phi2_0 / xi;
  Eigen::Matrix4d H = Eigen::Matrix4d::Zero();
  H.block<2, 2>(0, 0) = v.v11 * xh * xh.transpose() + t1 * Px;
  H.block<2, 2>(2, 2) = v.v22 * yh * yh.transpose() + t2 * Py;
  H.block<2, 2>(0, 2) = v.v12 * xh * yh.transpose();
  H.block<2, 2>(2, 0) = H.block<2, 2>(0, 2).transpose();
  return H;
}

double IntegrandStack::Phi(const Eigen::Vector4d& p, double z) const {
  const double V = psi_bar(p);
  if (z == 0) return V;
  const double L = std::abs(z);
  if (!area_kind() && !(V > 0.5 * L))
    fail(ErrorCode::GradientOutOfDomain, "Phi outside constructed region");
  return L * F(V / L).f;
}

Eigen::Matrix<double, 5, 5> IntegrandStack::Phi_hess(const Eigen::Vector4d& p,
                                                     double z) const {
  const double V = psi_bar(p);
  const Eigen::Vector4d Vx = psi_bar_grad(p);
  const Eigen::Matrix4d Vxx = psi_bar_hess(p);
  Eigen::Matrix<double, 5, 5> H = Eigen::Matrix<double, 5, 5>::Zero();
  const double L = std::abs(z);
  if (L < 1e-14 * V) {
    H.block<4, 4>(0, 0) = Vxx;
    H(4, 4) = fpp_tail() / V;
    return H;
  }
  if (!area_kind() && !(V > 0.5 * L))
    fail(ErrorCode::GradientOutOfDomain, "Phi outside constructed region");
  const double t = V / L;
  const FDerivs f = F(t);
  H.block<4, 4>(0, 0) = f.d2 / L * Vx * Vx.transpose() + f.d1 * Vxx;
  const Eigen::Vector4d xz = -sgn(z) * f.d2 * (t / L) * Vx;
  H.block<4, 1>(0, 4) = xz;
  H.block<1, 4>(4, 0) = xz.transpose();
  H(4, 4) = t * t * f.d2 / L;
  return H;
}

double IntegrandStack::Fp_at_log(double ln_arg) const {
  if (area_kind()) {
    // s/sqrt(1+s^2) = 1/sqrt(1+e^{-2 ln s})
    if (ln_arg > 20) return 1.0;
    const double s = std::exp(ln_arg);
    return s / std::sqrt(1.0 + s * s);
  }
  if (ln_arg > 20) return 1.0;
  const double s = std::exp(ln_arg);
  if (s < 0.5) {
    if (!(s > 0)) return 0.0;
    return 2 * kExtB * s + 4 * kExtC * s * s * s;
  }
  return 1.0 - 0.125 / (s * s);
}

double IntegrandStack::scale2_Fpp(double ln_scale, double v) const {
  // scale^2 F''(scale v), stable for very large scales
  if (!(v > 0)) return 0.0;
  const double ln_v = std::log(v);
  if (area_kind()) {
    // scale^2 (1 + (scale v)^2)^{-3/2} = e^{-ln_scale} (e^{-2 ln_scale} + v^2)^{-3/2}
    if (ln_scale > 700) return 0.0;
    const double inv_s2 = std::exp(-2 * ln_scale);
    return std::exp(-ln_scale) * std::pow(inv_s2 + v * v, -1.5);
  }
  const double ln_arg = ln_scale + ln_v;
  if (ln_arg >= std::log(0.5)) {
    // scale^2 / (4 (scale v)^3) = e^{-ln_scale} / (4 v^3)
    const double e = -ln_scale - 3 * ln_v - std::log(4.0);
    return e < -745 ? 0.0 : std::exp(e);
  }
  const double s = std::exp(ln_arg);
  return std::exp(2 * ln_scale) * (2 * kExtB + 12 * kExtC * s * s);
}

IntegrandStack::ReducedCoeffs IntegrandStack::reduced_coeffs(double q_xi, double q_zeta,
                                                             double ln_scale) const {
  const double r = std::abs(q_xi), s = std::abs(q_zeta);
  if (r == 0 && s == 0) fail(ErrorCode::GradientOutOfDomain, "zero gradient");
  const Radial2 v = varphi(r, s);
  const double ln_psibar = std::log(v.v) + ln_scale;
  if (!area_kind() && !(ln_psibar > 0))
    fail(ErrorCode::GradientOutOfDomain, "gradient left {psi_bar > 1}");
  const double fp = Fp_at_log(std::log(v.v) + ln_scale);
  const double f2 = scale2_Fpp(ln_scale, v.v);
  ReducedCoeffs c;
  c.a11 = fp * v.v11 + f2 * v.v1 * v.v1;
  c.a22 = fp * v.v22 + f2 * v.v2 * v.v2;
  c.a12 = (fp * v.v12 + f2 * v.v1 * v.v2) * sgn(q_xi) * sgn(q_zeta);
  const double phi2_0 = profile_.ddphi(0.0);
  c.adv1 = r > 1e-10 * std::max(s, 1.0) ? fp * v.v1 / r : fp * phi2_0 / s;
  c.adv2 = s > 1e-10 * std::max(r, 1.0) ? fp * v.v2 / s : fp * phi2_0 / r;
  c.lnPsiBar = ln_psibar;
  return c;
}

EllipticityReport check_ellipticity(const IntegrandStack& stack, int n_samples,
                                    uint64_t seed, double tol) {
  if (n_samples < 1000) fail(ErrorCode::BadConfig, "ellipticity check needs >= 1e3 samples");
  EllipticityReport rep;
  rep.pre = stack.profile().pre_check();
  rep.n_samples = n_samples;
  rep.min_eig_phi5 = std::numeric_limits<double>::infinity();
  rep.min_eig_psi_bar = std::numeric_limits<double>::infinity();
  if (!rep.pre.pass) {
    rep.pass = false;
    return rep;
  }

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  // Restricted Hessian of Phi on S^4
  for (int i = 0; i < n_samples; ++i) {
    Eigen::Matrix<double, 5, 1> nu;
    for (int j = 0; j < 5; ++j) nu(j) = gauss(rng);
    nu.normalize();
    Eigen::Vector4d p = nu.head<4>();
    const double z = nu(4);
    if (p.head<2>().norm() + p.tail<2>().norm() < 1e-8) {
      ++rep.n_skipped;
      continue;
    }
    const double V = stack.psi_bar(p);
    if (!stack.area_kind() && V <= 0.55 * std::abs(z)) {
      ++rep.n_skipped;  // outside the region where psi is constructed
      continue;
    }
    const auto H = stack.Phi_hess(p, z);
    // orthonormal basis of nu-perp
    Eigen::Matrix<double, 5, 4> B;
    Eigen::FullPivHouseholderQR<Eigen::Matrix<double, 5, 1>> qr(nu);
    Eigen::Matrix<double, 5, 5> Q = qr.matrixQ();
    B = Q.rightCols<4>();
    Eigen::Matrix4d R = B.transpose() * H * B;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(R);
    rep.min_eig_phi5 = std::min(rep.min_eig_phi5, es.eigenvalues().minCoeff());
  }

  // Restricted Hessian of psi_bar on S^3
  for (int i = 0; i < n_samples; ++i) {
    Eigen::Vector4d nu;
    for (int j = 0; j < 4; ++j) nu(j) = gauss(rng);
    nu.normalize();
    if (nu.head<2>().norm() < 1e-8 || nu.tail<2>().norm() < 1e-8) continue;
    const Eigen::Matrix4d H = stack.psi_bar_hess(nu);
    Eigen::FullPivHouseholderQR<Eigen::Vector4d> qr(nu);
    Eigen::Matrix4d Q = qr.matrixQ();
    Eigen::Matrix<double, 4, 3> B = Q.rightCols<3>();
    Eigen::Matrix3d R = B.transpose() * H * B;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(R);
    rep.min_eig_psi_bar = std::min(rep.min_eig_psi_bar, es.eigenvalues().minCoeff());
  }

  rep.pass = rep.min_eig_phi5 > tol && rep.min_eig_psi_bar > tol;
  if (!rep.pass && rep.min_eig_phi5 <= tol)
    ;  // caller decides whether to raise NotElliptic
  return rep;
}

}  // namespace aniso
