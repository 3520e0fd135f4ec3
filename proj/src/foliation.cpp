#include "aniso/foliation.hpp"

#include <boost/numeric/odeint.hpp>

namespace aniso {

namespace odeint = boost::numeric::odeint;
using State2 = std::array<double, 2>;

double FoliationCurve::rhs(double tau, double sig, double dsig) const {
  auto [P, Q] = profile.PQ(dsig);
  return -k * (P / tau + Q / sig);
}

std::array<double, 2> FoliationCurve::phase_rhs(const State2& X) const {
  const double w = X[0], z = X[1];
  auto [P, Q] = profile.PQ(z);
  return {z - w, -k * (P + Q / w)};
}

std::array<double, 2> FoliationCurve::offset_rhs(const State2& Y) const {
  return phase_rhs({Y[0] + 1.0, Y[1] + 1.0});
}

std::array<std::array<double, 2>, 2> FoliationCurve::offset_jacobian(const State2& Y) const {
  const double w = Y[0] + 1.0, z = Y[1] + 1.0;
  const PhiDerivs d = profile.eval(z);
  const double P = d.d1 / d.d2, Q = (z * d.d1 - d.f) / d.d2;
  const double Pp = 1.0 - P * d.d3 / d.d2;
  const double Qp = z - Q * d.d3 / d.d2;
  return {{{-1.0, 1.0}, {k * Q / (w * w), -k * (Pp + Qp / w)}}};
}

namespace {

// quartic series sigma = 1 + a t^2/2 + b t^4/24 on [0, tau0]
SigmaState series_eval(double tau, double alpha, double beta) {
  const double t2 = tau * tau;
  return {1.0 + 0.5 * alpha * t2 + beta * t2 * t2 / 24.0,
          alpha * tau + beta * tau * t2 / 6.0, alpha + 0.5 * beta * t2};
}

struct SeriesCoeffs {
  double alpha, beta;
};

SeriesCoeffs series_coeffs(const PhiProfile& profile) {
  const int k = profile.k;
  const double Q0 = profile.Q(0.0);
  const double alpha = -k * Q0 / (1.0 + k);  // P'(0) = 1 by evenness
  // beta from the tau^2 balance; P'''(0), Q''(0) by Richardson differences
  auto P = [&](double s) { return profile.P(s); };
  auto Q = [&](double s) { return profile.Q(s); };
  auto P3 = [&](double h) { return 6.0 * (P(h) - h) / (h * h * h); };
  auto Q2 = [&](double h) { return 2.0 * (Q(h) - Q0) / (h * h); };
  const double h = 1e-2;
  const double P3_0 = (4.0 * P3(h / 2) - P3(h)) / 3.0;
  const double Q2_0 = (4.0 * Q2(h / 2) - Q2(h)) / 3.0;
  const double beta =
      -k * (P3_0 * cube(alpha) / 6.0 + 0.5 * Q2_0 * alpha * alpha - 0.5 * Q0 * alpha) /
      (0.5 + k / 6.0);
  return {alpha, beta};
}

}  // namespace

SigmaState FoliationCurve::eval(double tau) const {
  tau = std::abs(tau);  // sigma is even
  if (tau <= tau0) return series_eval(tau, series_alpha, series_beta);
  if (tau <= tauB.back() * (1 + 1e-15)) {
    const double lt = std::log(tau);
    const double l0 = std::log(tauB.front());
    const double dl = std::log(tauB[1] / tauB[0]);
    size_t i = std::min(tauB.size() - 2, size_t(std::max(0.0, (lt - l0) / dl)));
    while (i + 2 < tauB.size() && tau > tauB[i + 1]) ++i;
    while (i > 0 && tau < tauB[i]) --i;
    const double ta = tauB[i], tb = tauB[i + 1];
    const double sa = B[i][0], da = B[i][1], sb = B[i + 1][0], db = B[i + 1][1];
    const QuinticHermite qh = QuinticHermite::build(
        tb - ta, sa, da, rhs(ta, sa, da), sb, db, rhs(tb, sb, db));
    const double u = tau - ta;
    double sig = qh.value(u), dsig = qh.deriv(u);
    return {sig, dsig, rhs(tau, sig, dsig)};
  }
  const double s_end = sC.back();
  double s = std::log(tau);
  if (s > s_end + 1e-12) {
    // beyond the grid: fitted tail sigma = tau + a tau^{-mu}
    const double mu = fit.mu_fit;
    const double smt = fit.a * std::pow(tau, -mu);
    const double sig = tau + smt;
    const double dsig = 1.0 - mu * smt / tau;
    return {sig, dsig, rhs(tau, sig, dsig)};
  }
  const State2 Y = offsetY(s);
  const double w = Y[0] + 1.0, z = Y[1] + 1.0;
  const double sig = tau * w, dsig = z;
  return {sig, dsig, rhs(tau, sig, dsig)};
}

FoliationCurve::State2a FoliationCurve::offsetY(double s) const {
  const double ds = sC[1] - sC[0];
  size_t i = std::min(sC.size() - 2, size_t(std::max(0.0, s / ds)));
  while (i + 2 < sC.size() && s > sC[i + 1]) ++i;
  while (i > 0 && s < sC[i]) --i;
  const State2 Ya = C[i], Yb = C[i + 1];
  const State2 Fa = offset_rhs(Ya), Fb = offset_rhs(Yb);
  const auto Ja = offset_jacobian(Ya), Jb = offset_jacobian(Yb);
  State2 Sa, Sb, Y;
  for (int c = 0; c < 2; ++c) {
    Sa[c] = Ja[c][0] * Fa[0] + Ja[c][1] * Fa[1];
    Sb[c] = Jb[c][0] * Fb[0] + Jb[c][1] * Fb[1];
  }
  const double h = sC[i + 1] - sC[i], u = s - sC[i];
  for (int c = 0; c < 2; ++c) {
    const QuinticHermite qh = QuinticHermite::build(h, Ya[c], Fa[c], Sa[c], Yb[c], Fb[c], Sb[c]);
    Y[c] = qh.value(u);
  }
  return Y;
}

double FoliationCurve::sigma_minus_tau(double tau) const {
  tau = std::abs(tau);
  if (tau <= tauB.back() * (1 + 1e-15)) return eval(tau).sigma - tau;
  if (std::log(tau) > sC.back() + 1e-12) return fit.a * std::pow(tau, -fit.mu_fit);
  return tau * offsetY(std::log(tau))[0];
}

double FoliationCurve::f0(double tau) const {
  tau = std::abs(tau);
  if (tau <= tauB.back() * (1 + 1e-15)) {
    const SigmaState st = eval(tau);
    return st.sigma - tau * st.dsigma;
  }
  if (std::log(tau) > sC.back() + 1e-12)
    return fit.a * (1.0 + fit.mu_fit) * std::pow(tau, -fit.mu_fit);
  const State2 Y = offsetY(std::log(tau));
  return tau * (Y[0] - Y[1]);
}

std::vector<double> FoliationCurve::report_grid() const {
  std::vector<double> g;
  for (int i = 0; i <= 8; ++i) g.push_back(tau0 * i / 8.0);
  for (size_t i = 1; i < tauB.size(); ++i) g.push_back(tauB[i]);
  for (size_t i = 1; i < sC.size(); ++i) g.push_back(std::exp(sC[i]));
  return g;
}

FoliationCurve integrate_sigma(const PhiProfile& profile, double tau_max, double tol_ode,
                               int n_per_decade) {
  if (!(tol_ode >= 1e-12 && tol_ode <= 1e-6))
    fail(ErrorCode::BadConfig, "tol_ode must be in [1e-12, 1e-6]");
  if (!(tau_max >= 10)) fail(ErrorCode::BadConfig, "tau_max too small");
  // admissibility at the start
  if (!(profile.ddphi(0.0) > 0))
    fail(ErrorCode::DegenerateConvexity, "phi''(0) <= 0");

  FoliationCurve curve;
  curve.profile = profile;
  curve.k = profile.k;
  curve.tau_max = tau_max;
  curve.tol_ode = tol_ode;
  const auto sc = series_coeffs(profile);
  curve.series_alpha = sc.alpha;
  curve.series_beta = sc.beta;

  const double rtol = 1e-12, atol = 1e-17;
  auto stepper = odeint::make_controlled(atol, rtol,
                                         odeint::runge_kutta_fehlberg78<State2>());

  // region B: (sigma, sigma') in tau on [tau0, 1]
  {
    const int nB = int(n_per_decade * std::log10(1.0 / curve.tau0)) + 1;
    curve.tauB = logspace(curve.tau0, 1.0, nB);
    auto rhsB = [&](const State2& x, State2& dxdt, double t) {
      dxdt[0] = x[1];
      dxdt[1] = curve.rhs(t, x[0], x[1]);
    };
    const SigmaState s0 = series_eval(curve.tau0, sc.alpha, sc.beta);
    State2 x = {s0.sigma, s0.dsigma};
    curve.B.push_back(x);
    try {
      for (size_t i = 0; i + 1 < curve.tauB.size(); ++i) {
        odeint::integrate_adaptive(stepper, rhsB, x, curve.tauB[i], curve.tauB[i + 1],
                                   (curve.tauB[i + 1] - curve.tauB[i]) / 8);
        if (!(x[1] >= 0 && x[1] < 1.0 && x[0] > curve.tauB[i + 1]))
          fail(ErrorCode::BlowUp, "trajectory left the admissible region (tau < 1)");
        curve.B.push_back(x);
      }
    } catch (const std::overflow_error&) {
      fail(ErrorCode::Stiffness, "step size underflow in [tau0, 1]");
    }
  }

  // region C: Y(s) on [0, log(tau_max)]
  {
    const double s_end = std::log(tau_max);
    const int nC = int(n_per_decade * s_end / std::log(10.0)) + 1;
    curve.sC = linspace(0.0, s_end, nC);
    auto rhsC = [&](const State2& y, State2& dydt, double) {
      dydt = curve.offset_rhs(y);
    };
    State2 y = {curve.B.back()[0] - 1.0, curve.B.back()[1] - 1.0};
    curve.C.push_back(y);
    try {
      for (size_t i = 0; i + 1 < curve.sC.size(); ++i) {
        odeint::integrate_adaptive(stepper, rhsC, y, curve.sC[i], curve.sC[i + 1],
                                   (curve.sC[i + 1] - curve.sC[i]) / 4);
        const double w = y[0] + 1.0, z = y[1] + 1.0;
        if (!(z > 0 && z < 1.0 && w > 1.0))
          fail(ErrorCode::BlowUp, "trajectory left the admissible region (tau > 1)");
        curve.C.push_back(y);
      }
    } catch (const std::overflow_error&) {
      fail(ErrorCode::Stiffness, "step size underflow in s = log(tau)");
    }
  }

  curve.fit = fit_asymptotics(curve);

  // finite-difference residual of the ODE over both stored grids
  double worst = 0;
  {
    // region B: d sigma'/d(log tau) via 5-point stencil on the log grid
    const double dl = std::log(curve.tauB[1] / curve.tauB[0]);
    for (size_t i = 2; i + 2 < curve.tauB.size(); ++i) {
      const double dz = (-curve.B[i + 2][1] + 8 * curve.B[i + 1][1] - 8 * curve.B[i - 1][1] +
                         curve.B[i - 2][1]) /
                        (12 * dl);
      const double fd = dz / curve.tauB[i];
      worst = std::max(worst, std::abs(fd - curve.rhs(curve.tauB[i], curve.B[i][0],
                                                      curve.B[i][1])));
    }
    const double ds = curve.sC[1] - curve.sC[0];
    for (size_t i = 2; i + 2 < curve.sC.size(); ++i) {
      const double dz =
          (-curve.C[i + 2][1] + 8 * curve.C[i + 1][1] - 8 * curve.C[i - 1][1] +
           curve.C[i - 2][1]) /
          (12 * ds);
      const double tau = std::exp(curve.sC[i]);
      const double fd = dz / tau;
      const double w = curve.C[i][0] + 1.0, z = curve.C[i][1] + 1.0;
      worst = std::max(worst, std::abs(fd - curve.rhs(tau, tau * w, z)));
    }
  }
  curve.max_residual = worst;
  if (worst > tol_ode)
    fail(ErrorCode::Stiffness,
         "ODE residual " + std::to_string(worst) + " exceeds tol_ode");
  return curve;
}

AsymptoticFit fit_asymptotics(const FoliationCurve& curve, double window_lo) {
  if (curve.tau_max < 1e3) fail(ErrorCode::BadConfig, "fit needs tau_max >= 1e3");
  std::vector<double> x, y;
  for (size_t i = 0; i < curve.sC.size(); ++i) {
    const double tau = std::exp(curve.sC[i]);
    if (tau < window_lo) continue;
    const double smt = tau * curve.C[i][0];
    if (!(smt > 0)) fail(ErrorCode::NegativeA, "sigma - tau <= 0 in the fit window");
    x.push_back(curve.sC[i]);
    y.push_back(std::log(smt));
  }
  const LineFit lf = fit_line(x, y);
  AsymptoticFit fit;
  fit.mu_fit = -lf.slope;
  fit.a = std::exp(lf.intercept);
  fit.fit_rms = lf.rms;
  if (!(fit.a > 0)) fail(ErrorCode::NegativeA, "fitted leading coefficient <= 0");

  // secondary fit of the residual sigma - tau - a tau^{-mu}
  std::vector<double> xr, yr, rsign;
  for (size_t i = 0; i < curve.sC.size(); ++i) {
    const double tau = std::exp(curve.sC[i]);
    if (tau < window_lo) continue;
    const double smt = tau * curve.C[i][0];
    const double r = smt - fit.a * std::pow(tau, -fit.mu_fit);
    if (std::abs(r) < 1e-13 * (tau * std::abs(curve.C[i][0]) + 1e-300)) continue;
    xr.push_back(curve.sC[i]);
    yr.push_back(std::log(std::abs(r)));
    rsign.push_back(sgn(r));
  }
  if (xr.size() >= 10) {
    const LineFit lr = fit_line(xr, yr);
    fit.remainder_order = -lr.slope;
    double sg = 0;
    for (double s : rsign) sg += s;
    fit.b_fit = sgn(sg) * std::exp(lr.intercept);
  } else {
    fit.remainder_order = 99.0;  // remainder below resolution
    fit.b_fit = 0.0;
  }
  return fit;
}

PhaseTrajectory phase_trajectory(const FoliationCurve& curve) {
  PhaseTrajectory tr;
  const double mu = curve.profile.kind == ProfileKind::Area ? area_mu(curve.k)
                                                            : curve.profile.mu_target;
  tr.mu = mu;
  tr.eig = {-(1.0 + mu), mu - 2.0};
  // include the tail of region B (s < 0) and all of region C
  for (size_t i = 0; i < curve.tauB.size(); ++i) {
    tr.s.push_back(std::log(curve.tauB[i]));
    tr.X.push_back({curve.B[i][0] / curve.tauB[i], curve.B[i][1]});
  }
  for (size_t i = 1; i < curve.sC.size(); ++i) {
    tr.s.push_back(curve.sC[i]);
    tr.X.push_back({curve.C[i][0] + 1.0, curve.C[i][1] + 1.0});
  }
  // eigenframe: Y = c_p (1, -mu) + c_q (1, mu-1); det = (mu-1) + mu = 2 mu - 1
  const double det = 2 * mu - 1.0;
  for (auto& X : tr.X) {
    const double y1 = X[0] - 1.0, y2 = X[1] - 1.0;
    tr.coef_p.push_back(((mu - 1) * y1 - y2) / det);
    tr.coef_q.push_back((y2 + mu * y1) / det);
  }
  // tail decay of log|Y|
  std::vector<double> xs, ys;
  for (size_t i = 0; i < tr.s.size(); ++i) {
    if (tr.s[i] < 0.5 * curve.sC.back()) continue;
    const double y1 = tr.X[i][0] - 1.0, y2 = tr.X[i][1] - 1.0;
    const double ay = std::hypot(y1, y2);
    if (ay < 1e-14) continue;
    xs.push_back(tr.s[i]);
    ys.push_back(std::log(ay));
  }
  if (xs.size() >= 4) tr.tail_slope_logY = fit_line(xs, ys).slope;
  return tr;
}

TrapReport check_trapping(const FoliationCurve& curve, double margin) {
  TrapReport rep;
  rep.margin_z_low = std::numeric_limits<double>::infinity();
  rep.margin_z_high = std::numeric_limits<double>::infinity();
  rep.margin_line = std::numeric_limits<double>::infinity();
  rep.mod_slope_min = std::numeric_limits<double>::infinity();
  rep.mod_slope_max = -std::numeric_limits<double>::infinity();
  const PhaseTrajectory tr = phase_trajectory(curve);
  for (size_t i = 0; i < tr.s.size(); ++i) {
    const double w = tr.X[i][0], z = tr.X[i][1];
    const double m1 = z, m2 = 1.0 - z, m3 = z - (1.5 - 0.5 * w);
    const double m = std::min({m1, m2, m3});
    if (m < std::min({rep.margin_z_low, rep.margin_z_high, rep.margin_line})) rep.worst_s = tr.s[i];
    rep.margin_z_low = std::min(rep.margin_z_low, m1);
    rep.margin_z_high = std::min(rep.margin_z_high, m2);
    rep.margin_line = std::min(rep.margin_line, m3);
  }
  // slope window of log|Y|^2 (measured counterpart of the e^{-5s}, e^{-3s/2} bounds)
  for (size_t i = 0; i + 1 < curve.sC.size(); ++i) {
    auto nrm2 = [&](size_t j) {
      return sq(curve.C[j][0]) + sq(curve.C[j][1]);
    };
    if (nrm2(i) < 1e-24 || nrm2(i + 1) < 1e-24) continue;
    const double slope =
        (std::log(nrm2(i + 1)) - std::log(nrm2(i))) / (curve.sC[i + 1] - curve.sC[i]);
    rep.mod_slope_min = std::min(rep.mod_slope_min, slope);
    rep.mod_slope_max = std::max(rep.mod_slope_max, slope);
  }
  rep.pass = rep.margin_z_low >= margin && rep.margin_z_high >= margin &&
             rep.margin_line >= margin;
  return rep;
}

}  // namespace aniso
