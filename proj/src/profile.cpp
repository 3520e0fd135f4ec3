#include "aniso/profile.hpp"

#include <cmath>

namespace aniso {

namespace {

// sqrt(1+s^2) and three derivatives
PhiDerivs area_base(double s) {
  const double r = std::sqrt(1.0 + s * s);
  return {r, s / r, 1.0 / (r * r * r), -3.0 * s / std::pow(r, 5)};
}

// Bump term kappa (s^2-1)^2 exp(-(s^2-1)^2/w^2) via beta(v) = v^2 e^{-v^2},
// v = (s^2-1)/w.
PhiDerivs bump_term(double s, double kappa, double w) {
  const double u = s * s - 1.0;
  const double v = u / w;
  const double E = std::exp(-v * v);
  const double beta = v * v * E;
  const double beta1 = E * (2 * v - 2 * v * v * v);
  const double beta2 = E * (2 - 10 * v * v + 4 * std::pow(v, 4));
  const double beta3 = E * (-24 * v + 36 * std::pow(v, 3) - 8 * std::pow(v, 5));
  PhiDerivs b;
  b.f = kappa * w * w * beta;
  b.d1 = kappa * w * beta1 * 2 * s;
  b.d2 = kappa * (4 * s * s * beta2 + 2 * w * beta1);
  b.d3 = kappa * (8 * s * s * s * beta3 / w + 12 * s * beta2);
  return b;
}

PhiDerivs series_eval(const std::vector<double>& c, double s) {
  PhiDerivs r{0, 0, 0, 0};
  // Horner in s^2 for the value; direct sums for derivatives
  for (size_t j = 0; j < c.size(); ++j) {
    const double p = 2.0 * j;
    const double sp = std::pow(s, p);
    r.f += c[j] * sp;
    if (j >= 1) {
      r.d1 += c[j] * p * std::pow(s, p - 1);
      r.d2 += c[j] * p * (p - 1) * std::pow(s, p - 2);
      if (j == 1)
        ;  // s^0 term of d3 vanishes: p(p-1)(p-2) = 0 for p = 2
      else
        r.d3 += c[j] * p * (p - 1) * (p - 2) * std::pow(s, p - 3);
    }
  }
  return r;
}

}  // namespace

PhiDerivs PhiProfile::eval(double s) const {
  s = std::abs(s);  // even family; callers only use s >= 0
  switch (kind) {
    case ProfileKind::Area:
      return area_base(s);
    case ProfileKind::Bump: {
      PhiDerivs a = area_base(s), b = bump_term(s, kappa, width);
      return {a.f + b.f, a.d1 + b.d1, a.d2 + b.d2, a.d3 + b.d3};
    }
    case ProfileKind::EvenSeries:
      return series_eval(even_coeffs, s);
  }
  fail(ErrorCode::BadConfig, "unknown profile kind");
}

std::pair<double, double> PhiProfile::PQ(double s) const {
  const PhiDerivs d = eval(s);
  if (!(d.d2 > 0))
    fail(ErrorCode::DegenerateConvexity,
         "phi''(" + std::to_string(s) + ") = " + std::to_string(d.d2));
  return {d.d1 / d.d2, (s * d.d1 - d.f) / d.d2};
}

PhiProfile::PreCheck PhiProfile::pre_check(double s_max, int n) const {
  PreCheck r;
  r.min_ddphi = std::numeric_limits<double>::infinity();
  r.min_dphi = std::numeric_limits<double>::infinity();
  r.min_phi_minus = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    const double s = s_max * i / double(n - 1);
    const PhiDerivs d = eval(s);
    if (d.d2 < r.min_ddphi) {
      r.min_ddphi = d.d2;
      r.argmin_ddphi = s;
    }
    if (s > 0 && s <= 1.0) {
      r.min_dphi = std::min(r.min_dphi, d.d1);
      r.min_phi_minus = std::min(r.min_phi_minus, d.f - s * d.d1);
    }
  }
  r.pass = r.min_ddphi > 0 && r.min_dphi > 0 && r.min_phi_minus > 0;
  return r;
}

void PhiProfile::validate() const {
  const PhiDerivs d0 = eval(0.0);
  if (std::abs(d0.d1) > 1e-12 || std::abs(d0.d3) > 1e-12)
    fail(ErrorCode::InfeasibleFamily, "profile not even at 0");
  const PhiDerivs d1 = eval(1.0);
  if (std::abs(2 * d1.d1 - d1.f) > 1e-12)
    fail(ErrorCode::InfeasibleFamily, "compatibility 2 phi'(1) = phi(1) violated");
  if (kind != ProfileKind::Area && mudef_compatible) {
    const double lhs = d1.f / (2 * d1.d2);
    if (std::abs(lhs - mu_target * (1 - mu_target)) > 1e-12)
      fail(ErrorCode::InfeasibleFamily, "exponent identity violated");
  }
  for (int i = 0; i <= 1000; ++i) {
    const double s = 10.0 * i / 1000.0;
    if (!(eval(s).f > 0)) fail(ErrorCode::InfeasibleFamily, "phi not positive on [0,10]");
  }
}

double area_mu(int k) {
  const double h = k - 0.5;
  const double disc = h * h - 2.0 * k;
  if (disc < 0) fail(ErrorCode::InvalidMu, "area exponent complex for k = " + std::to_string(k));
  return h - std::sqrt(disc);
}

double area_alpha(int k) {
  const double h = k - 0.5;
  const double disc = h * h - 2.0 * k;
  if (disc < 0) fail(ErrorCode::InvalidMu, "area exponent complex for k = " + std::to_string(k));
  return std::min(h + std::sqrt(disc), 2.0 * area_mu(k) + 1.0);
}

PhiProfile build_phi_area(int k) {
  if (k < 1) fail(ErrorCode::BadConfig, "area multiplicity k must be >= 1");
  PhiProfile p;
  p.kind = ProfileKind::Area;
  p.k = k;
  // phi(1)/(2 phi''(1)) = 2 for sqrt(1+s^2); no mu in (0,1/2) satisfies it.
  p.mudef_compatible = false;
  p.mu_target = k >= 3 ? area_mu(k) : 0.0;
  p.validate();
  return p;
}

PhiProfile build_phi_bump(double mu, double width) {
  if (!(mu > 0 && mu < 0.5)) fail(ErrorCode::InvalidMu, "mu must be in (0, 1/2)");
  if (!(width > 0)) fail(ErrorCode::BadConfig, "bump width must be > 0");
  PhiProfile p;
  p.kind = ProfileKind::Bump;
  p.k = 1;
  p.mu_target = mu;
  p.width = width;
  // Bump vanishes to second order at s = 1 except in phi''; its contribution
  // there is 8 kappa, so (mudef) fixes kappa in closed form.
  const double phi1 = std::sqrt(2.0);
  const double need = phi1 / (2 * mu * (1 - mu));
  p.kappa = (need - std::pow(2.0, -1.5)) / 8.0;
  if (!(p.kappa >= 0)) fail(ErrorCode::InfeasibleFamily, "bump kappa negative");
  p.validate();
  return p;
}

PhiProfile build_phi_even_poly(double mu, int n) {
  if (!(mu > 0 && mu < 0.5)) fail(ErrorCode::InvalidMu, "mu must be in (0, 1/2)");
  if (n < 1) fail(ErrorCode::BadConfig, "even-poly degree parameter n must be >= 1");
  const double m = mu * (1 - mu);
  const double b = 1.0;
  const double denom = 1.0 - m;
  const double num = m - 1.0 / (2.0 * n + 1.0);
  if (!(num > 0))
    fail(ErrorCode::InfeasibleFamily,
         "even-poly needs mu(1-mu) > 1/(2n+1); increase n");
  const double a = b * num / denom;
  const double c0 = 1.5 * a + b * (4.0 * n + 3.0) / ((2.0 * n + 1.0) * (2.0 * n + 2.0));
  PhiProfile p;
  p.kind = ProfileKind::EvenSeries;
  p.k = 1;
  p.mu_target = mu;
  p.even_coeffs.assign(n + 2, 0.0);
  p.even_coeffs[0] = c0;
  p.even_coeffs[1] = a / 2.0;
  p.even_coeffs[n + 1] = b / ((2.0 * n + 1.0) * (2.0 * n + 2.0));
  p.validate();
  return p;
}

PhiProfile build_phi_even_series(double mu, std::vector<double> coeffs) {
  if (!(mu > 0 && mu < 0.5)) fail(ErrorCode::InvalidMu, "mu must be in (0, 1/2)");
  PhiProfile p;
  p.kind = ProfileKind::EvenSeries;
  p.k = 1;
  p.mu_target = mu;
  p.even_coeffs = std::move(coeffs);
  p.validate();
  return p;
}

}  // namespace aniso
