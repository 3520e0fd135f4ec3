#include "aniso/model.hpp"

namespace aniso {

HomogeneousModel::HomogeneousModel(std::shared_ptr<const PerturbedPair> pair, Side side,
                                   double chart_tol)
    : pair_(std::move(pair)), side_(side), mu_(pair_->mu()), chart_tol_(chart_tol) {}

// solve sigma_minus_tau(tau)/tau = q for tau (strictly decreasing in tau)
std::pair<double, double> HomogeneousModel::invert_ratio(double q) const {
  auto h = [&](double tau) { return pair_->sigma_minus_tau(tau, side_) / tau - q; };
  // bracket in log tau
  double lo = 1e-8, hi = 10.0;
  while (h(hi) > 0 && hi < 1e280) hi *= 4.0;
  while (h(lo) < 0 && lo > 1e-280) lo *= 0.25;
  if (hi >= 1e280 || lo <= 1e-280) fail(ErrorCode::OutOfChart, "ratio inversion lost bracket");
  for (int it = 0; it < 200; ++it) {
    const double mid = std::sqrt(lo * hi);
    (h(mid) > 0 ? lo : hi) = mid;
    if (hi / lo < 1.0 + 1e-13) break;
  }
  double tau = std::sqrt(lo * hi);
  // Newton polish on sigma(tau) - (1+q) tau = 0
  for (int it = 0; it < 4; ++it) {
    const SigmaState st = pair_->sigma_side(tau, side_);
    const double r = pair_->sigma_minus_tau(tau, side_) - q * tau;
    const double dr = st.dsigma - (1.0 + q);
    if (dr == 0) break;
    const double step = r / dr;
    if (!(std::abs(step) < 0.5 * tau)) break;
    tau -= step;
  }
  return {tau, q};
}

std::pair<double, double> HomogeneousModel::chart_invert(double xi, double zeta) const {
  if (!(zeta > xi && xi >= 0) || zeta <= 0)
    fail(ErrorCode::OutOfChart, "chart requires zeta > xi >= 0");
  if (xi == 0) {
    const double s0 = pair_->sigma_side(0.0, side_).sigma;  // = 1
    return {s0 / zeta, 0.0};
  }
  const double q = (zeta - xi) / xi;  // sigma(tau)/tau - 1 at the preimage
  const auto [tau, _] = invert_ratio(q);
  const double lambda = tau / xi;
  // consistency check of the defining relation
  const double zr = pair_->sigma_side(tau, side_).sigma / lambda;
  if (std::abs(zr - zeta) > 1e4 * chart_tol_ * std::max(1.0, zeta))
    fail(ErrorCode::OutOfChart, "chart inversion failed its tolerance");
  return {lambda, tau};
}

std::pair<double, double> HomogeneousModel::chart_invert_log(double ln_xi,
                                                             double ln_zeta) const {
  // ratio q = zeta/xi - 1; for astronomic radii use the fitted tail directly
  const double dln = ln_zeta - ln_xi;
  if (!(dln > 0)) fail(ErrorCode::OutOfChart, "chart requires zeta > xi");
  const double q = std::expm1(dln);
  const auto [tau, _] = invert_ratio(q);
  const double ln_lambda = std::log(tau) - ln_xi;
  return {ln_lambda, tau};
}

double HomogeneousModel::ln_value(double ln_xi, double ln_zeta) const {
  if (ln_xi == -std::numeric_limits<double>::infinity()) {
    // on the zeta-axis: lambda = sigma(0)/zeta
    return (1.0 + mu_) * ln_zeta;  // sigma(0) = 1
  }
  const auto [ln_lambda, tau] = chart_invert_log(ln_xi, ln_zeta);
  (void)tau;
  return -(1.0 + mu_) * ln_lambda;
}

LeafData HomogeneousModel::at_leaf(double lambda, double tau,
                                   const IntegrandStack& stack) const {
  if (!(lambda > 0) || tau < 0) fail(ErrorCode::OutOfChart, "at_leaf needs lambda > 0, tau >= 0");
  LeafData d;
  d.lambda = lambda;
  d.tau = tau;
  d.w = std::pow(lambda, -(1.0 + mu_));
  const SigmaState st = pair_->sigma_side(tau, side_);
  const double f0 = pair_->f0_side(tau, side_);  // sigma - tau sigma' > 0
  const double lam_mu = std::pow(lambda, -mu_);
  const double T = (1.0 + mu_) * lam_mu / f0;
  d.grad_xi = -T * st.dsigma;
  d.grad_zeta = T;
  d.grad_norm = T * std::hypot(1.0, st.dsigma);
  const double A = (1.0 + mu_) * std::pow(lambda, 1.0 - mu_) / cube(f0);
  // mu f0 (-s',1)x(-s',1) - s'' (-s,tau)x(-s,tau)
  d.hxx = A * (mu_ * f0 * sq(st.dsigma) - st.ddsigma * sq(st.sigma));
  d.hxz = A * (-mu_ * f0 * st.dsigma + st.ddsigma * st.sigma * tau);
  d.hzz = A * (mu_ * f0 - st.ddsigma * sq(tau));
  // angular entries lambda/xi * w_xi and lambda/zeta * w_zeta at xi = tau/lambda
  if (tau > 1e-9) {
    d.tang1 = lambda * d.grad_xi / tau;
  } else {
    // limit via sigma' ~ sigma''(0) tau
    d.tang1 = -lambda * T * pair_->sigma_side(0.0, side_).ddsigma;
  }
  d.tang2 = lambda * d.grad_zeta / st.sigma;

  const Radial2 vp = stack.varphi(std::abs(d.grad_xi), d.grad_zeta);
  d.psibar_grad = vp.v;
  const double g1 = sgn(d.grad_xi) * vp.v1, g2 = vp.v2;
  d.K3 = g1 * g1 * d.hxx + 2 * g1 * g2 * d.hxz + g2 * g2 * d.hzz;

  const double phi2 = pair_->profile().ddphi(st.dsigma);
  d.curvature = -lambda * phi2 * pair_->G_side(tau, side_);
  return d;
}

double HomogeneousModel::value(const Eigen::Vector4d& p) const {
  const double xi = p.head<2>().norm(), zeta = p.tail<2>().norm();
  if (xi == zeta) return 0.0;
  const double s = zeta > xi ? 1.0 : -1.0;
  const auto [lambda, tau] = chart_invert(std::min(xi, zeta), std::max(xi, zeta));
  (void)tau;
  return s * std::pow(lambda, -(1.0 + mu_));
}

Eigen::Vector4d HomogeneousModel::gradient(const Eigen::Vector4d& p) const {
  const double xi = p.head<2>().norm(), zeta = p.tail<2>().norm();
  if (std::abs(zeta - xi) <= 1e-14 * p.norm()) {
    // one-sided limit along the cone: T -> xi^mu / a_side, direction (-xh, yh)
    const AsymptoticFit& f = side_ == Side::Upper ? pair_->fit_bar : pair_->fit_under;
    const double T = std::pow(xi, mu_) / f.a;
    Eigen::Vector4d g;
    g.head<2>() = -T * p.head<2>() / xi;
    g.tail<2>() = T * p.tail<2>() / zeta;
    return g;
  }
  const bool flip = xi > zeta;
  const double a = std::min(xi, zeta), b = std::max(xi, zeta);
  const auto [lambda, tau] = chart_invert(a, b);
  const SigmaState st = pair_->sigma_side(tau, side_);
  const double f0 = pair_->f0_side(tau, side_);
  const double T = (1.0 + mu_) * std::pow(lambda, -mu_) / f0;
  const double w_a = -T * st.dsigma, w_b = T;
  Eigen::Vector2d xh = xi > 0 ? (p.head<2>() / xi).eval() : Eigen::Vector2d(1, 0);
  Eigen::Vector2d yh = zeta > 0 ? (p.tail<2>() / zeta).eval() : Eigen::Vector2d(1, 0);
  Eigen::Vector4d g;
  if (!flip) {
    g.head<2>() = w_a * xh;
    g.tail<2>() = w_b * yh;
  } else {
    // odd reflection: w(x,y) = -w0(|y|,|x|)
    g.head<2>() = -w_b * xh;
    g.tail<2>() = -w_a * yh;
  }
  return g;
}

Eigen::Matrix4d HomogeneousModel::hessian(const Eigen::Vector4d& p) const {
  const double xi = p.head<2>().norm(), zeta = p.tail<2>().norm();
  if (std::abs(zeta - xi) <= 1e-8 * p.norm())
    fail(ErrorCode::OnCone, "Hessian within 1e-8 of the diagonal cone");
  const bool flip = xi > zeta;
  const double a = std::min(xi, zeta), b = std::max(xi, zeta);
  const auto [lambda, tau] = chart_invert(a, b);
  const SigmaState st = pair_->sigma_side(tau, side_);
  const double f0 = pair_->f0_side(tau, side_);
  const double lam1mu = std::pow(lambda, 1.0 - mu_);
  const double A = (1.0 + mu_) * lam1mu / cube(f0);
  const double hxx = A * (mu_ * f0 * sq(st.dsigma) - st.ddsigma * sq(st.sigma));
  const double hxz = A * (-mu_ * f0 * st.dsigma + st.ddsigma * st.sigma * tau);
  const double hzz = A * (mu_ * f0 - st.ddsigma * sq(tau));
  const double T = (1.0 + mu_) * std::pow(lambda, -mu_) / f0;
  const double tang1 = tau > 1e-9 ? -lambda * T * st.dsigma / tau
                                  : -lambda * T * pair_->sigma_side(0.0, side_).ddsigma;
  const double tang2 = lambda * T / st.sigma;
  Eigen::Vector2d ah = a > 0 ? (flip ? p.tail<2>() / zeta : p.head<2>() / xi).eval()
                             : Eigen::Vector2d(1, 0);
  Eigen::Vector2d bh = (flip ? p.head<2>() / xi : p.tail<2>() / zeta).eval();
  const Eigen::Matrix2d Pa = Eigen::Matrix2d::Identity() - ah * ah.transpose();
  const Eigen::Matrix2d Pb = Eigen::Matrix2d::Identity() - bh * bh.transpose();
  Eigen::Matrix4d H = Eigen::Matrix4d::Zero();
  const double s = flip ? -1.0 : 1.0;
  // blocks in (a-plane, b-plane) order, then mapped to (x, y)
  Eigen::Matrix2d Haa = s * (hxx * ah * ah.transpose() + tang1 * Pa);
  Eigen::Matrix2d Hbb = s * (hzz * bh * bh.transpose() + tang2 * Pb);
  Eigen::Matrix2d Hab = s * hxz * ah * bh.transpose();
  if (!flip) {
    H.block<2, 2>(0, 0) = Haa;
    H.block<2, 2>(2, 2) = Hbb;
    H.block<2, 2>(0, 2) = Hab;
    H.block<2, 2>(2, 0) = Hab.transpose();
  } else {
    H.block<2, 2>(2, 2) = Haa;
    H.block<2, 2>(0, 0) = Hbb;
    H.block<2, 2>(2, 0) = Hab;
    H.block<2, 2>(0, 2) = Hab.transpose();
  }
  return H;
}

double reduced_contraction_psibar(const IntegrandStack& stack, int k, const Patch2& p) {
  const double r = std::abs(p.U_xi), s = std::abs(p.U_zeta);
  const Radial2 v = stack.varphi(r, s);
  double acc = v.v11 * p.U_xixi + 2 * sgn(p.U_xi) * sgn(p.U_zeta) * v.v12 * p.U_xizeta +
               v.v22 * p.U_zetazeta;
  const double phi2_0 = stack.profile().ddphi(0.0);
  const double c1 = r > 1e-10 * std::max(s, 1e-300) ? v.v1 / r : phi2_0 / s;
  const double c2 = s > 1e-10 * std::max(r, 1e-300) ? v.v2 / s : phi2_0 / r;
  acc += k * c1 * p.ratio1 + k * c2 * p.ratio2;
  return acc;
}

std::pair<double, double> curvature_term(const HomogeneousModel& model,
                                         const IntegrandStack& stack, double lambda,
                                         double tau) {
  const LeafData d = model.at_leaf(lambda, tau, stack);
  Patch2 p{d.grad_xi,  d.grad_zeta, d.hxx, d.hxz, d.hzz,
           d.tang1,    d.tang2};
  const double lhs = reduced_contraction_psibar(stack, model.pair().curve().k, p);
  return {lhs, d.curvature};
}

}  // namespace aniso
