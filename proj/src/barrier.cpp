#include "aniso/barrier.hpp"

#include <random>

namespace aniso {

namespace {

constexpr double kGLx[7] = {-0.949107912342759, -0.741531185599394, -0.405845151377397,
                            0.0, 0.405845151377397, 0.741531185599394, 0.949107912342759};
constexpr double kGLw[7] = {0.129484966168870, 0.279705391489277, 0.381830050505119,
                            0.417959183673469, 0.381830050505119, 0.279705391489277,
                            0.129484966168870};

double ln1pexp(double x) { return x > 35 ? x : std::log1p(std::exp(x)); }

// ln H' and ln|H''| of the supersolution profile, from params alone
double lnHp_of(const BarrierParams& p, double ln_s) {
  return log_add_exp(std::log(p.A) - p.gamma * ln_s, p.B * eval_I_log(p, ln_s));
}
double lnmHpp_of(const BarrierParams& p, double ln_s) {
  const double pow_term = std::log(p.A * p.gamma) - (p.gamma + 1.0) * ln_s;
  const double exp_term = std::log(p.B) + (p.delta - 1.0) * ln_s -
                          ln1pexp(2 * p.delta * ln_s) + p.B * eval_I_log(p, ln_s);
  return log_add_exp(pow_term, exp_term);
}

// Panel quadrature of int_0^s e^{kappa I(t)} dt in the variable v = t^delta,
// carried fully in logs. The integrand in ln v is
//   Lambda(ln v) = (kappa/delta)(pi/2 - atan v) + (1/delta) ln v - ln delta.
struct ExpPanels {
  std::vector<double> lnv;
  std::vector<double> cum;  // ln of int_0^{v_i} in t
};

double lambda_of(const BarrierParams& p, double kappa, double ln_v) {
  const double v = std::exp(ln_v);
  double at;
  if (ln_v > 35)
    at = kPi / 2 - std::exp(-ln_v);
  else if (ln_v < -35)
    at = v;
  else
    at = std::atan(v);
  return (kappa / p.delta) * (kPi / 2 - at) + ln_v / p.delta - std::log(p.delta);
}

// plateau formula for int_0^s with s below the panel range
double ln_small_s_integral(const BarrierParams& p, double kappa, double ln_s) {
  return kappa * eval_I_log(p, ln_s) + ln_s - ln1pexp(std::log(std::abs(kappa) + 1.0) +
                                                      p.delta * ln_s);
}

double ln_panel(const BarrierParams& p, double kappa, double a, double b) {
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  double off = std::max({lambda_of(p, kappa, a), lambda_of(p, kappa, c),
                         lambda_of(p, kappa, b)});
  double acc = 0;
  for (int i = 0; i < 7; ++i)
    acc += kGLw[i] * std::exp(lambda_of(p, kappa, c + h * kGLx[i]) - off);
  return off + std::log(acc * h);
}

ExpPanels build_panels(const BarrierParams& p, double kappa) {
  ExpPanels ep;
  double lnv_lo = -60.0;
  if (kappa < 0) lnv_lo = std::max(lnv_lo, std::log(-kappa / p.delta) - std::log(40.0));
  const double lnv_hi = 220.0;
  ep.lnv.push_back(lnv_lo);
  ep.cum.push_back(ln_small_s_integral(p, kappa, lnv_lo / p.delta));
  double x = lnv_lo;
  while (x < lnv_hi) {
    const double v = std::exp(std::min(x, 300.0));
    const double slope = std::abs(kappa) / p.delta * (v / (1 + v * v)) + 1.0 / p.delta;
    const double w = std::min(0.25, 3.0 / (slope + 4.0));
    const double nx = std::min(lnv_hi, x + w);
    ep.cum.push_back(log_add_exp(ep.cum.back(), ln_panel(p, kappa, x, nx)));
    ep.lnv.push_back(nx);
    x = nx;
  }
  return ep;
}

double query_panels(const BarrierParams& p, double kappa, const ExpPanels& ep,
                    double ln_vq) {
  if (ln_vq <= ep.lnv.front()) return ln_small_s_integral(p, kappa, ln_vq / p.delta);
  if (ln_vq >= ep.lnv.back())
    fail(ErrorCode::BadConfig, "barrier H evaluated beyond its quadrature range");
  const auto it = std::upper_bound(ep.lnv.begin(), ep.lnv.end(), ln_vq);
  const size_t i = it - ep.lnv.begin() - 1;
  double out = ep.cum[i];
  if (ln_vq > ep.lnv[i]) out = log_add_exp(out, ln_panel(p, kappa, ep.lnv[i], ln_vq));
  return out;
}

double range_panels(const BarrierParams& p, double kappa, const ExpPanels& ep,
                    double ln_va, double ln_vb) {
  // ln of int over [va, vb] summed panel-wise (no cancellation)
  if (!(ln_vb > ln_va)) return -std::numeric_limits<double>::infinity();
  double out = -std::numeric_limits<double>::infinity();
  size_t i = 0;
  while (i + 1 < ep.lnv.size() && ep.lnv[i + 1] <= ln_va) ++i;
  double x = std::max(ln_va, ep.lnv.front());
  if (ln_va < ep.lnv.front()) {
    // piece below the panel range: difference of plateau values is safe since
    // the integrand grows at least like v^{1/delta} there
    const double lo = ln_small_s_integral(p, kappa, ln_va / p.delta);
    const double hi = ln_small_s_integral(p, kappa, std::min(ln_vb, ep.lnv.front()) / p.delta);
    out = hi + std::log1p(-std::exp(std::min(lo - hi, -1e-18)));
    x = ep.lnv.front();
    i = 0;
  }
  while (x < ln_vb) {
    const double nx = std::min(ln_vb, i + 1 < ep.lnv.size()
                                          ? std::max(ep.lnv[i + 1], x)
                                          : ln_vb);
    if (nx > x) out = log_add_exp(out, ln_panel(p, kappa, x, nx));
    x = nx;
    ++i;
    if (i + 1 >= ep.lnv.size() && x < ln_vb) {
      out = log_add_exp(out, ln_panel(p, kappa, x, ln_vb));
      break;
    }
  }
  return out;
}

}  // namespace

BarrierParams make_barrier_params(bool area, double mu, double beta) {
  BarrierParams p;
  p.area = area;
  p.mu = mu;
  p.beta = beta;
  if (area) {
    p.gamma = (mu + 0.5) / (mu + 1.0);
    p.M_exp = 2.0 / (beta - mu);
    p.delta = 1.0 / (p.M_exp * (mu + 1.0));
  } else {
    p.gamma = 2.0 * mu / (1.0 + mu);
    p.M_exp = 2.0 / (0.5 - mu);
    p.delta = p.gamma / p.M_exp;
  }
  p.g_exp = 2.0 * mu / (1.0 + mu);
  p.R_scale = std::pow(2.0, -(1.0 + mu) / mu);
  return p;
}

double eval_I_log(const BarrierParams& p, double ln_s) {
  const double t = p.delta * ln_s;
  if (t > 35) {
    const double e = std::exp(-t);
    return (e - e * e * e / 3.0) / p.delta;
  }
  if (t < -35) {
    const double e = std::exp(t);
    return (kPi / 2 - e + e * e * e / 3.0) / p.delta;
  }
  return (kPi / 2 - std::atan(std::exp(t))) / p.delta;
}

double eval_I(const BarrierParams& p, double s) {
  if (s == 0) return kPi / (2 * p.delta);
  return eval_I_log(p, std::log(s));
}

HBar::HBar(const BarrierParams& p) : p_(p) {
  if (p_.B > 2e6) fail(ErrorCode::ScanExhausted, "B too large for desk-scale quadrature");
  auto ep = build_panels(p_, p_.B);
  lnv_ = std::move(ep.lnv);
  lncum_ = std::move(ep.cum);
}

double HBar::ln_Hp(double ln_s) const { return lnHp_of(p_, ln_s); }
double HBar::ln_mHpp(double ln_s) const { return lnmHpp_of(p_, ln_s); }

double HBar::ln_exp_integral(double ln_vq) const {
  ExpPanels ep{lnv_, lncum_};
  return query_panels(p_, p_.B, ep, ln_vq);
}

double HBar::ln_H(double ln_s) const {
  const double pow_part = std::log(p_.A / (1.0 - p_.gamma)) + (1.0 - p_.gamma) * ln_s;
  return log_add_exp(pow_part, ln_exp_integral(p_.delta * ln_s));
}

HUnder::HUnder(const BarrierParams& p) : p_(p) {
  auto ep = build_panels(p_, -p_.C);
  lnv_ = std::move(ep.lnv);
  lncum_ = std::move(ep.cum);
}

double HUnder::Hp(double ln_s) const {
  const double e = -p_.C * eval_I_log(p_, ln_s);
  return e < -745 ? 0.0 : std::exp(e);
}

double HUnder::ln_Hpp(double ln_s) const {
  return std::log(p_.C) + (p_.delta - 1.0) * ln_s - ln1pexp(2 * p_.delta * ln_s) -
         p_.C * eval_I_log(p_, ln_s);
}

double HUnder::ln_exp_integral(double ln_vq) const {
  ExpPanels ep{lnv_, lncum_};
  return query_panels(p_, -p_.C, ep, ln_vq);
}

double HUnder::ln_H(double ln_s) const { return ln_exp_integral(p_.delta * ln_s); }

double HUnder::ln_H_diff(double ln_a, double ln_b) const {
  ExpPanels ep{lnv_, lncum_};
  return range_panels(p_, -p_.C, ep, p_.delta * ln_a, p_.delta * ln_b);
}

// ---------------------------------------------------------------------------

ModelConstants measure_model_constants(const PerturbedPair& pair,
                                       const IntegrandStack& stack) {
  ModelConstants mc;
  auto pp = std::make_shared<PerturbedPair>(pair);
  HomogeneousModel up(pp, Side::Upper), lo(pp, Side::Lower);
  const auto& curve = pair.curve();
  const double mu = pair.mu(), beta = pair.beta;
  mc.cg_lo = mc.cpsiw_lo = std::numeric_limits<double>::infinity();
  mc.cg_hi = mc.cpsiw_hi = 0;
  mc.cK = 0;
  mc.ch = 0;
  mc.kappa_phi2_min = std::numeric_limits<double>::infinity();
  for (double tau : curve.report_grid()) {
    const double sig = curve.eval(tau).sigma;
    const double smu = std::pow(sig, -mu);
    for (const HomogeneousModel* m : {&up, &lo}) {
      const LeafData d = m->at_leaf(1.0, tau, stack);
      mc.cg_lo = std::min(mc.cg_lo, d.grad_norm * smu);
      mc.cg_hi = std::max(mc.cg_hi, d.grad_norm * smu);
      mc.cpsiw_lo = std::min(mc.cpsiw_lo, d.psibar_grad * smu);
      mc.cpsiw_hi = std::max(mc.cpsiw_hi, d.psibar_grad * smu);
      const double Kp = std::max(d.K3, 0.0);
      mc.cK = std::max(mc.cK, Kp * std::pow(sig, beta) / cube(d.psibar_grad));
      const double hn = std::max({std::abs(d.hxx), std::abs(d.hxz), std::abs(d.hzz),
                                  std::abs(d.tang1), std::abs(d.tang2)});
      mc.ch = std::max(mc.ch, hn * std::pow(sig, beta - 3 * mu));
      const double phi2 = pair.profile().ddphi(m->sigma(tau).dsigma);
      mc.kappa_phi2_min =
          std::min(mc.kappa_phi2_min,
                   phi2 * std::abs(pair.G_side(tau, m->side())) * std::pow(sig, beta + 2.0));
    }
  }
  mc.c_sphere_lo = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 200; ++i) {
    const double t = i / 200.0;
    mc.c_sphere_lo =
        std::min(mc.c_sphere_lo, stack.varphi(t, 1.0).v / std::hypot(t, 1.0));
  }
  const double cF_lo = stack.area_kind() ? std::pow(1.25, -1.5) : 0.25;
  const double cF_hi = stack.area_kind() ? 1.0 : 0.25;
  mc.c1 = 0.5 * mc.kappa_phi2_min;
  mc.c2 = cF_lo / mc.cpsiw_hi;
  mc.c3 = cF_hi * mc.cK;
  return mc;
}

ScanResult choose_A(BarrierParams& p, const ModelConstants& mc) {
  ScanResult res;
  res.threshold = 2.0 * std::max(1.0, mc.c3 / std::min(mc.c1, mc.c2));
  const double ln_T = std::log(res.threshold);
  const auto s_grid = logspace(1e-6, 1e6, 73);
  const auto sig_grid = logspace(1.0, 1e6, 49);
  auto ln_infE = [&](double A) {
    BarrierParams q = p;
    q.A = A;
    q.B = A * A;
    double inf = std::numeric_limits<double>::infinity();
    for (double s : s_grid) {
      const double ls = std::log(s);
      const double lhp = lnHp_of(q, ls), lhpp = lnmHpp_of(q, ls);
      for (double sg : sig_grid) {
        const double lsg = std::log(sg);
        const double t1 = ls + lhpp - lhp + lsg;
        const double t2 = 2 * lhp + p.g_exp * ls - p.M_exp * lsg;
        inf = std::min(inf, log_add_exp(t1, t2));
      }
    }
    return inf;
  };
  // gradient condition |grad ubar| >= 2 sqrt(A) cg_lo and psi_bar > 1 with margin 2
  double A0 = 4.0;
  const double Amin_grad = sq(1.0 / (mc.c_sphere_lo * mc.cg_lo));
  while (A0 < Amin_grad) A0 *= 2.0;
  for (double A = A0; A <= double(1 << 20); A *= 2.0) {
    const double inf = ln_infE(A);
    if (inf >= ln_T) {
      p.A = A;
      p.B = A * A;
      res.accepted = A;
      for (double m : {1.0, 2.0, 4.0, 8.0}) res.ln_infE.push_back(ln_infE(A * m));
      return res;
    }
  }
  fail(ErrorCode::ScanExhausted, "no A <= 2^20 passes (DesiredSuper) on the grid");
}

ScanResult choose_C(BarrierParams& p, const ModelConstants& mc, const IntegrandStack& stack) {
  (void)stack;
  ScanResult res;
  res.threshold = 2.0 * std::max(1.0, mc.c3 / std::min(0.25 * mc.c1, mc.c2));
  const double ln_T = std::log(res.threshold);
  const auto sig_grid = logspace(1.0, 1e6, 49);
  const double mu = p.mu;

  auto edge_for = [&](double C) {
    // I(s_edge) = ln2/C  =>  s_edge^delta = cot(delta ln2 / C)
    const double arg = p.delta * std::log(2.0) / C;
    double ln_edge = std::log(1.0 / std::tan(arg)) / p.delta;
    // shrink lambda_C until the gradient condition holds with margin 2:
    // psi_bar(grad u0) >= (1/2) c_sphere cg_lo lambda^{-mu} >= 2
    double ln_lam = -ln_edge / (1.0 + mu);
    const double ln_lam_grad = std::log(mc.c_sphere_lo * mc.cg_lo / 4.0) / mu;
    ln_lam = std::min(ln_lam, ln_lam_grad);
    return std::pair{-(1.0 + mu) * ln_lam, ln_lam};
  };

  auto ln_infE = [&](double C) {
    BarrierParams q = p;
    q.C = C;
    const auto [ln_edge, ln_lam] = edge_for(C);
    (void)ln_lam;
    HUnder hu(q);
    double inf = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= 72; ++i) {
      const double ls = ln_edge + i * (12.0 * std::log(10.0)) / 72.0;
      const double lhpp = hu.ln_Hpp(ls);
      for (double sg : sig_grid) {
        const double lsg = std::log(sg);
        const double t1 = ls + lhpp + lsg;
        const double t2 = p.g_exp * ls - p.M_exp * lsg;
        inf = std::min(inf, log_add_exp(t1, t2));
      }
    }
    return inf;
  };

  for (double C = 4.0; C <= double(1 << 24); C *= 2.0) {
    const double inf = ln_infE(C);
    if (inf >= ln_T) {
      p.C = C;
      const auto [ln_edge, ln_lam] = edge_for(C);
      p.ln_s_edge = ln_edge;
      p.ln_lambda_C = ln_lam;
      res.accepted = C;
      for (double m : {1.0, 2.0, 4.0, 8.0}) res.ln_infE.push_back(ln_infE(C * m));
      return res;
    }
  }
  fail(ErrorCode::ScanExhausted, "no C <= 2^24 passes (DesiredSub) on the grid");
}

// ---------------------------------------------------------------------------

BarrierSet assemble_barriers(std::shared_ptr<const IntegrandStack> stack,
                             std::shared_ptr<const PerturbedPair> pair, double margin) {
  (void)margin;
  BarrierSet bs;
  bs.stack = stack;
  bs.pair = pair;
  const double mu = pair->mu();
  bs.params = make_barrier_params(stack->area_kind(), mu, pair->beta);
  bs.constants = measure_model_constants(*pair, *stack);
  bs.scanA = choose_A(bs.params, bs.constants);
  bs.scanC = choose_C(bs.params, bs.constants, *stack);
  bs.upper = std::make_shared<HomogeneousModel>(pair, Side::Upper);
  bs.lower = std::make_shared<HomogeneousModel>(pair, Side::Lower);
  bs.hbar = std::make_shared<HBar>(bs.params);
  bs.hunder = std::make_shared<HUnder>(bs.params);
  bs.params.ln_K = bs.hunder->ln_H(bs.params.ln_s_edge);
  return bs;
}

double BarrierSet::ln_ubar(double xi, double zeta) const {
  return ln_ubar_log(xi > 0 ? std::log(xi) : -std::numeric_limits<double>::infinity(),
                     std::log(zeta));
}

double BarrierSet::ln_ubar_log(double ln_xi, double ln_zeta) const {
  const double ln_w = upper->ln_value(ln_xi, ln_zeta);
  return hbar->ln_H(ln_w);
}

double BarrierSet::ln_ubar_leaf(double ln_lambda) const {
  return hbar->ln_H(-(1.0 + params.mu) * ln_lambda);
}

double BarrierSet::uunder(double xi, double zeta) const {
  const double v = ln_uunder_log(
      xi > 0 ? std::log(xi) : -std::numeric_limits<double>::infinity(), std::log(zeta));
  return v == -std::numeric_limits<double>::infinity() ? 0.0 : std::exp(v);
}

double BarrierSet::ln_uunder_log(double ln_xi, double ln_zeta) const {
  const double lnR = std::log(params.R_scale);
  const double ln_w = lower->ln_value(ln_xi + lnR, ln_zeta + lnR);
  if (ln_w <= params.ln_s_edge) return -std::numeric_limits<double>::infinity();
  return hunder->ln_H_diff(params.ln_s_edge, ln_w) - lnR;
}

SignReport BarrierSet::verify_pointwise(int n_samples, uint64_t seed) const {
  SignReport rep;
  rep.n_samples = n_samples;
  rep.margin_super = rep.margin_sub = std::numeric_limits<double>::infinity();
  rep.min_ln_psibar_grad_super = rep.min_ln_psibar_grad_sub =
      std::numeric_limits<double>::infinity();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const double mu = params.mu;
  const double tau_max = pair->tau_max();
  const double neg_inf = -std::numeric_limits<double>::infinity();

  for (int i = 0; i < n_samples; ++i) {
    const double tau =
        (i % 17 == 0) ? 0.0 : std::exp(std::log(1e-3) + uni(rng) * std::log(tau_max / 1e-3));
    // ---- supersolution sample, lambda in [1e-3, 1e3]
    {
      const double ln_lam = std::log(1e-3) + uni(rng) * std::log(1e6);
      const LeafData d = upper->at_leaf(std::exp(ln_lam), tau, *stack);
      const double ln_w = -(1.0 + mu) * ln_lam;
      const double lnHp = hbar->ln_Hp(ln_w), lnHpp = hbar->ln_mHpp(ln_w);
      const double lnPsi = std::log(d.psibar_grad);
      const double lnX = lnHp + lnPsi;  // psi_bar(grad ubar)
      rep.min_ln_psibar_grad_super = std::min(rep.min_ln_psibar_grad_super, lnX);
      const double lnFp = std::log(stack->Fp_at_log(lnX));
      const double lnF2X3 =
          stack->area_kind() ? -1.5 * std::log1p(std::exp(-2 * lnX)) : std::log(0.25);
      // I < 0 (curvature), II < 0 (Hbar concave), III sign of K3
      const double lnI = lnFp + ln_lam + std::log(-d.curvature);
      const double lnII = lnF2X3 - 3 * lnX + lnHpp + 2 * lnPsi;
      const double lnIII = d.K3 > 0 ? lnF2X3 - 3 * lnX + lnHp + std::log(d.K3) : neg_inf;
      rep.margin_super = std::min(rep.margin_super, log_add_exp(lnI, lnII) - lnIII);
    }
    // ---- subsolution sample, lambda in Omega_C
    {
      const double ln_lam = params.ln_lambda_C - uni(rng) * std::log(1e6);
      const LeafData d = lower->at_leaf(std::exp(ln_lam), tau, *stack);
      const double ln_w = -(1.0 + mu) * ln_lam;
      const double lnHp = hunder->ln_Hp(ln_w), lnHpp = hunder->ln_Hpp(ln_w);
      const double lnPsi = std::log(d.psibar_grad);
      const double lnX = lnHp + lnPsi;
      rep.min_ln_psibar_grad_sub = std::min(rep.min_ln_psibar_grad_sub, lnX);
      const double lnFp = std::log(stack->Fp_at_log(lnX));
      const double lnF2X3 =
          stack->area_kind() ? -1.5 * std::log1p(std::exp(-2 * lnX)) : std::log(0.25);
      // I > 0 (curvature of the lower leaf), II > 0 (Hunder convex), III sign of -K3
      const double lnI = lnFp + ln_lam + std::log(d.curvature);
      const double lnII = lnF2X3 - 3 * lnX + lnHpp + 2 * lnPsi;
      const double lnIII = d.K3 < 0 ? lnF2X3 - 3 * lnX + lnHp + std::log(-d.K3) : neg_inf;
      rep.margin_sub = std::min(rep.margin_sub, log_add_exp(lnI, lnII) - lnIII);
    }
  }
  rep.pass = rep.margin_super > 0 && rep.margin_sub > 0 &&
             rep.min_ln_psibar_grad_super > 0 && rep.min_ln_psibar_grad_sub > 0;
  if (!rep.pass) fail(ErrorCode::SignViolation, "barrier sign verification failed");
  return rep;
}

BarrierSet::GrowthReport BarrierSet::growth() const {
  GrowthReport g;
  const double mu = params.mu;
  const double lnR = std::log(params.R_scale);
  // smallest axis radius with uunder > 0: (R r / sigma_under(0))^{1+mu} = s_edge
  g.ln_r_star = params.ln_s_edge / (1.0 + mu) - lnR;
  {
    std::vector<double> x, y;
    double cmin = std::numeric_limits<double>::infinity();
    for (int j = 1; j <= 3; ++j) {
      const double ln_r = g.ln_r_star + j * std::log(10.0);
      const double lnu = ln_uunder_log(-std::numeric_limits<double>::infinity(), ln_r);
      x.push_back(ln_r);
      y.push_back(lnu);
      cmin = std::min(cmin, lnu - (1.0 + mu) * ln_r);
    }
    g.slope_uunder = fit_line(x, y).slope;
    g.c_growth = std::exp(cmin);
  }
  {
    // ubar beyond its additive plateau: sample where H(s) ~ s
    const double ln_plateau = hbar->ln_H(0.0);
    std::vector<double> x, y;
    for (int j = 1; j <= 4; ++j) {
      const double ln_w = ln_plateau + 3.0 * j;
      const double ln_r = ln_w / (1.0 + mu);  // axis: w = (r/sigma(0))^{1+mu}
      x.push_back(ln_r);
      y.push_back(hbar->ln_H(ln_w));
    }
    g.slope_ubar = fit_line(x, y).slope;
  }
  return g;
}

void BarrierSet::check_ordering(int n_samples, uint64_t seed) const {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const double mu = params.mu;
  for (int i = 0; i < n_samples; ++i) {
    // half desk-scale points, half on the subsolution's own scale
    double ln_xi, ln_zeta;
    if (i % 2 == 0) {
      const double ln_r = std::log(1e-2) + uni(rng) * std::log(1e5);
      const double th = kPi / 4 + uni(rng) * kPi / 4;
      ln_zeta = ln_r + std::log(std::sin(th));
      ln_xi = ln_r + std::log(std::max(std::cos(th), 1e-300));
    } else {
      const double ln_lam = params.ln_lambda_C - uni(rng) * std::log(1e4);
      const double tau = std::exp(std::log(1e-2) + uni(rng) * std::log(1e5));
      const SigmaState st = pair->sigma_side(tau, Side::Lower);
      ln_xi = std::log(tau) - ln_lam;
      ln_zeta = std::log(st.sigma) - ln_lam;
    }
    if (!(ln_zeta > ln_xi)) continue;
    const double lnu_under = ln_uunder_log(ln_xi, ln_zeta);
    if (lnu_under == -std::numeric_limits<double>::infinity()) continue;
    const double lnu_bar = ln_ubar_log(ln_xi, ln_zeta);
    if (!(lnu_under <= lnu_bar))
      fail(ErrorCode::OrderingViolation, "uunder > ubar at a sample point");
  }
  (void)mu;
}

}  // namespace aniso
