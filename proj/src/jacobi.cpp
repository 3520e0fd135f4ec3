#include "aniso/jacobi.hpp"

#include <algorithm>

namespace aniso {

namespace {
// 7-point Gauss-Legendre on [-1, 1]
constexpr double kGLx[7] = {-0.949107912342759, -0.741531185599394, -0.405845151377397,
                            0.0, 0.405845151377397, 0.741531185599394, 0.949107912342759};
constexpr double kGLw[7] = {0.129484966168870, 0.279705391489277, 0.381830050505119,
                            0.417959183673469, 0.381830050505119, 0.279705391489277,
                            0.129484966168870};

template <class F>
double gl7(F&& f, double a, double b) {
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  double acc = 0;
  for (int i = 0; i < 7; ++i) acc += kGLw[i] * f(c + h * kGLx[i]);
  return acc * h;
}
}  // namespace

LCoeffs l_coeffs(const FoliationCurve& curve, double tau) {
  const SigmaState st = curve.eval(tau);
  const PhiDerivs d = curve.profile.eval(st.dsigma);
  LCoeffs c;
  c.logp_prime = 1.0 / tau + st.dsigma / st.sigma + st.ddsigma * d.d3 / d.d2;
  c.q = (d.f - st.dsigma * d.d1) / (st.sigma * st.sigma * d.d2);
  return c;
}

double eval_L(const FoliationCurve& curve, double f, double fp, double fpp, double tau) {
  const LCoeffs c = l_coeffs(curve, tau);
  return fpp + c.logp_prime * fp + c.q * f;
}

JacobiSolution::JacobiSolution(std::shared_ptr<const FoliationCurve> curve, double beta)
    : curve_(std::move(curve)), beta_(beta) {}

double JacobiSolution::g(double tau) const {
  return std::pow(curve_->eval(tau).sigma, -beta_ - 2.0);
}

double JacobiSolution::inner_integrand(double t) const {
  const SigmaState st = curve_->eval(t);
  const double p = t * st.sigma * curve_->profile.ddphi(st.dsigma);
  const double f0 = st.sigma - t * st.dsigma;
  return std::pow(st.sigma, -beta_ - 2.0) * p * f0;
}

double JacobiSolution::outer_integrand(double t) const {
  // J(t)/(f0^2 p); J ~ g(0) phi''(0) t^2/2 cancels the 1/t in 1/p near zero
  if (t < 1e-4) return 0.5 * t;  // g(0) = sigma(0)^{-beta-2} = 1
  const SigmaState st = curve_->eval(t);
  const double p = t * st.sigma * curve_->profile.ddphi(st.dsigma);
  const double f0 = st.sigma - t * st.dsigma;
  return inner_J(t) / (f0 * f0 * p);
}

double JacobiSolution::inner_J(double tau) const {
  const auto it = std::upper_bound(nodes_.begin(), nodes_.end(), tau);
  const size_t i = it == nodes_.begin() ? 0 : (it - nodes_.begin() - 1);
  const double base = Jnodes_[i];
  if (tau <= nodes_[i]) return base;
  return base + gl7([this](double t) { return inner_integrand(t); }, nodes_[i], tau);
}

double JacobiSolution::outer_V(double tau) const {
  const auto it = std::upper_bound(nodes_.begin(), nodes_.end(), tau);
  const size_t i = it == nodes_.begin() ? 0 : (it - nodes_.begin() - 1);
  const double base = Vnodes_[i];
  if (tau <= nodes_[i]) return base;
  return base + gl7([this](double t) { return outer_integrand(t); }, nodes_[i], tau);
}

double JacobiSolution::v_prime(double tau) const { return outer_integrand(tau); }

double JacobiSolution::f1(double tau) const {
  tau = std::abs(tau);
  if (tau == 0) return 0.0;
  return curve_->f0(tau) * outer_V(tau);
}

double JacobiSolution::f1_prime(double tau) const {
  tau = std::abs(tau);
  if (tau == 0) return 0.0;
  return curve_->f0prime(tau) * outer_V(tau) + curve_->f0(tau) * outer_integrand(tau);
}

double JacobiSolution::f1_second(double tau) const {
  tau = std::abs(tau);
  if (tau == 0) return 0.5 * g(0.0);  // series limit f1 = g(0) tau^2 / 4 + ...
  const LCoeffs c = l_coeffs(*curve_, tau);
  return g(tau) - c.logp_prime * f1_prime(tau) - c.q * f1(tau);
}

JacobiSolution solve_inhomogeneous(std::shared_ptr<const FoliationCurve> curve, double beta) {
  if (!(beta > 0)) fail(ErrorCode::BadConfig, "beta must be positive");
  JacobiSolution jac(curve, beta);
  auto grid = curve->report_grid();
  jac.nodes_.assign(grid.begin(), grid.end());
  const size_t n = jac.nodes_.size();
  jac.Jnodes_.assign(n, 0.0);
  jac.Vnodes_.assign(n, 0.0);
  for (size_t i = 1; i < n; ++i) {
    jac.Jnodes_[i] = jac.Jnodes_[i - 1] +
                     gl7([&](double t) { return jac.inner_integrand(t); }, jac.nodes_[i - 1],
                         jac.nodes_[i]);
  }
  for (size_t i = 1; i < n; ++i) {
    jac.Vnodes_[i] = jac.Vnodes_[i - 1] +
                     gl7([&](double t) { return jac.outer_integrand(t); }, jac.nodes_[i - 1],
                         jac.nodes_[i]);
  }
  // quadrature sanity: residual of Lf1 = g at interior points, with
  // finite-difference derivatives of the quadrature evaluator
  for (double tau : {0.5, 2.0, 20.0}) {
    const double h = 1e-3 * std::max(tau, 1.0);
    auto f = [&](double t) { return jac.f1(t); };
    const double fp = central_diff1_4(f, tau, h);
    const double fpp = central_diff2_4(f, tau, h);
    const double r = eval_L(*curve, jac.f1(tau), fp, fpp, tau) - jac.g(tau);
    if (std::abs(r) > 1e-5 * jac.g(tau))
      fail(ErrorCode::QuadratureFailure, "Lf1 residual too large at tau = " + std::to_string(tau));
  }
  // tail fit f1 ~ d tau^{-mu}
  {
    std::vector<double> x, y;
    double sgn_sum = 0;
    for (double tau : logspace(1e2, 0.99 * curve->tau_max, 60)) {
      const double v = jac.f1(tau);
      if (std::abs(v) < 1e-14) continue;
      x.push_back(std::log(tau));
      y.push_back(std::log(std::abs(v)));
      sgn_sum += sgn(v);
    }
    if (x.size() >= 10) {
      const LineFit lf = fit_line(x, y);
      jac.d_slope = -lf.slope;
      jac.d_fit = sgn(sgn_sum) * std::exp(lf.intercept);
    }
  }
  return jac;
}

// --------------------------------------------------------------------------

double PerturbedPair::mu() const {
  return profile().kind == ProfileKind::Area ? area_mu(curve_->k) : profile().mu_target;
}

bool PerturbedPair::beyond_grid(double tau) const {
  return std::abs(tau) > curve_->tau_max * (1.0 + 1e-12);
}

SigmaState PerturbedPair::sigma_side(double tau, Side side) const {
  tau = std::abs(tau);
  const double sign = side == Side::Upper ? 1.0 : -1.0;
  if (beyond_grid(tau)) {
    const AsymptoticFit& f = side == Side::Upper ? fit_bar : fit_under;
    const double smt = f.a * std::pow(tau, -f.mu_fit);
    return {tau + smt, 1.0 - f.mu_fit * smt / tau,
            f.mu_fit * (f.mu_fit + 1.0) * smt / (tau * tau)};
  }
  const SigmaState st = curve_->eval(tau);
  return {st.sigma + sign * epsilon0 * jac_->f1(tau),
          st.dsigma + sign * epsilon0 * jac_->f1_prime(tau),
          st.ddsigma + sign * epsilon0 * jac_->f1_second(tau)};
}

double PerturbedPair::sigma_minus_tau(double tau, Side side) const {
  tau = std::abs(tau);
  const double sign = side == Side::Upper ? 1.0 : -1.0;
  if (beyond_grid(tau)) {
    const AsymptoticFit& f = side == Side::Upper ? fit_bar : fit_under;
    return f.a * std::pow(tau, -f.mu_fit);
  }
  return curve_->sigma_minus_tau(tau) + sign * epsilon0 * jac_->f1(tau);
}

double PerturbedPair::f0_side(double tau, Side side) const {
  tau = std::abs(tau);
  const double sign = side == Side::Upper ? 1.0 : -1.0;
  if (beyond_grid(tau)) {
    const AsymptoticFit& f = side == Side::Upper ? fit_bar : fit_under;
    return f.a * (1.0 + f.mu_fit) * std::pow(tau, -f.mu_fit);
  }
  return curve_->f0(tau) + sign * epsilon0 * (jac_->f1(tau) - tau * jac_->f1_prime(tau));
}

double PerturbedPair::G_side(double tau, Side side) const {
  tau = std::abs(tau);
  const double sign = side == Side::Upper ? 1.0 : -1.0;
  const double eps = sign * epsilon0;
  const int k = curve_->k;
  if (tau < 1e-12) {
    return (1.0 + k) * eps * jac_->f1_second(0.0);
  }
  const SigmaState st = curve_->eval(tau);
  const double f1 = jac_->f1(tau), f1p = jac_->f1_prime(tau), f1pp = jac_->f1_second(tau);
  const double sb = st.sigma + eps * f1, db = st.dsigma + eps * f1p;
  const auto& prof = curve_->profile;
  const double dP = prof.P(db) - prof.P(st.dsigma);
  const double dQ = prof.Q(db) - prof.Q(st.dsigma);
  // G(sigma + eps f1) - G(sigma), with G(sigma) = 0 along the curve
  return eps * f1pp + k * (dP / tau + dQ / sb - prof.Q(st.dsigma) * eps * f1 / (st.sigma * sb));
}

PerturbedPair select_epsilon0(std::shared_ptr<const FoliationCurve> curve,
                              std::shared_ptr<const JacobiSolution> jac) {
  PerturbedPair pair;
  pair.curve_ = curve;
  pair.jac_ = jac;
  pair.beta = jac->beta();
  pair.d_fit = jac->d_fit;
  const int k = curve->k;

  // cache everything the scan needs per grid point
  const std::vector<double> grid = curve->report_grid();
  const size_t n = grid.size();
  struct Node {
    double tau, sigma, dsigma, ddsigma, f1, f1p, f1pp, gv, smt, smt2, f1_2tau;
    bool has2;
  };
  std::vector<Node> nodes(n + 1);
  for (size_t i = 0; i <= n; ++i) {
    const double tau = i == 0 ? 0.0 : grid[i - 1];
    Node& nd = nodes[i];
    nd.tau = tau;
    const SigmaState st = curve->eval(tau);
    nd.sigma = st.sigma;
    nd.dsigma = st.dsigma;
    nd.ddsigma = st.ddsigma;
    nd.f1 = jac->f1(tau);
    nd.f1p = jac->f1_prime(tau);
    nd.f1pp = jac->f1_second(tau);
    nd.gv = jac->g(tau);
    nd.smt = curve->sigma_minus_tau(tau);
    nd.has2 = 2 * tau <= curve->tau_max;
    if (nd.has2) {
      nd.smt2 = curve->sigma_minus_tau(2 * tau);
      nd.f1_2tau = jac->f1(2 * tau);
    } else {
      nd.smt2 = nd.f1_2tau = 0;
    }
  }
  const auto& prof = curve->profile;

  auto try_eps = [&](double eps) -> bool {
    double kb = std::numeric_limits<double>::infinity();
    double ku = std::numeric_limits<double>::infinity();
    for (const Node& nd : nodes) {
      for (double sign : {1.0, -1.0}) {
        const double e = sign * eps;
        double G;
        if (nd.tau < 1e-12) {
          G = (1.0 + k) * e * nodes[0].f1pp;
        } else {
          const double sb = nd.sigma + e * nd.f1, db = nd.dsigma + e * nd.f1p;
          if (!(db >= 0 && db < 1.0)) return false;
          const double dP = prof.P(db) - prof.P(nd.dsigma);
          const double dQ = prof.Q(db) - prof.Q(nd.dsigma);
          G = e * nd.f1pp +
              k * (dP / nd.tau + dQ / sb - prof.Q(nd.dsigma) * e * nd.f1 / (nd.sigma * sb));
        }
        if (sign > 0) {
          if (!(G >= 0.5 * eps * nd.gv)) return false;
          kb = std::min(kb, G / nd.gv);
        } else {
          if (!(-G >= 0.5 * eps * nd.gv)) return false;
          ku = std::min(ku, -G / nd.gv);
        }
        if (!(nd.ddsigma + e * nd.f1pp > 0)) return false;
      }
      // above tau and ordered
      const double s_under = nd.smt - eps * nd.f1;
      if (!(s_under > 0)) return false;
      if (!(nd.f1 >= 0)) return false;  // sigma_under <= sigma_bar
      if (nd.has2) {
        // (1/2) sigma_bar(2 tau) <= sigma_under(tau)
        const double lhs = 0.5 * (2 * nd.tau + nd.smt2 + eps * nd.f1_2tau);
        if (!(lhs <= nd.tau + s_under)) return false;
      }
    }
    pair.kappa_bar = kb;
    pair.kappa_under = ku;
    return true;
  };

  bool found = false;
  for (int e = 1; e <= 20; ++e) {
    const double eps = std::pow(2.0, -e);
    if (!try_eps(eps)) continue;
    pair.epsilon0 = eps;
    found = true;
    break;
  }
  if (!found) fail(ErrorCode::NoEpsilon, "no epsilon in the dyadic scan satisfies Prop 2.3");

  // tail fits of the perturbed curves (positive leading coefficients required)
  auto fit_tail = [&](Side side) {
    std::vector<double> x, y;
    for (double tau : logspace(1e2, 0.99 * curve->tau_max, 80)) {
      const double smt = curve->sigma_minus_tau(tau) +
                         (side == Side::Upper ? 1.0 : -1.0) * pair.epsilon0 * jac->f1(tau);
      if (!(smt > 0))
        fail(ErrorCode::NegativeA, "perturbed leaf crosses tau in the fit window");
      x.push_back(std::log(tau));
      y.push_back(std::log(smt));
    }
    const LineFit lf = fit_line(x, y);
    AsymptoticFit f;
    f.mu_fit = -lf.slope;
    f.a = std::exp(lf.intercept);
    f.fit_rms = lf.rms;
    return f;
  };
  pair.fit_bar = fit_tail(Side::Upper);
  pair.fit_under = fit_tail(Side::Lower);
  if (!(pair.fit_bar.a > 0) || !(pair.fit_under.a > 0))
    fail(ErrorCode::NegativeA, "perturbed leading coefficient not positive");
  // ordering in the tail, where the scan grid cannot reach:
  // (1/2)(2t + abar (2t)^-mu) <= t + aunder t^-mu  <=>  abar 2^{-1-mu} <= aunder
  {
    const double mu = pair.mu();
    if (!(pair.fit_bar.a * std::pow(2.0, -1.0 - mu) <= pair.fit_under.a))
      fail(ErrorCode::OrderingViolation, "tail ordering of perturbed leaves fails");
  }
  return pair;
}

}  // namespace aniso
