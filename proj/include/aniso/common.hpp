#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace aniso {

// ---------------------------------------------------------------------------
// Errors. Each stage failure carries a code so reports can name it.
// ---------------------------------------------------------------------------

enum class ErrorCode {
  InvalidMu,
  InfeasibleFamily,
  DegenerateConvexity,
  NotElliptic,
  BlowUp,
  Stiffness,
  NegativeA,
  QuadratureFailure,
  NoEpsilon,
  OutOfChart,
  OnCone,
  ScanExhausted,
  SignViolation,
  OrderingViolation,
  NoConvergence,
  GradientOutOfDomain,
  Unstable,
  MissingUpstream,
  BadConfig,
};

inline const char* to_string(ErrorCode c) {
  switch (c) {
    case ErrorCode::InvalidMu: return "InvalidMu";
    case ErrorCode::InfeasibleFamily: return "InfeasibleFamily";
    case ErrorCode::DegenerateConvexity: return "DegenerateConvexity";
    case ErrorCode::NotElliptic: return "NotElliptic";
    case ErrorCode::BlowUp: return "BlowUp";
    case ErrorCode::Stiffness: return "Stiffness";
    case ErrorCode::NegativeA: return "NegativeA";
    case ErrorCode::QuadratureFailure: return "QuadratureFailure";
    case ErrorCode::NoEpsilon: return "NoEpsilon";
    case ErrorCode::OutOfChart: return "OutOfChart";
    case ErrorCode::OnCone: return "OnCone";
    case ErrorCode::ScanExhausted: return "ScanExhausted";
    case ErrorCode::SignViolation: return "SignViolation";
    case ErrorCode::OrderingViolation: return "OrderingViolation";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::GradientOutOfDomain: return "GradientOutOfDomain";
    case ErrorCode::Unstable: return "Unstable";
    case ErrorCode::MissingUpstream: return "MissingUpstream";
    case ErrorCode::BadConfig: return "BadConfig";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& msg)
      : std::runtime_error(std::string(to_string(code)) + ": " + msg), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& msg) { throw Error(code, msg); }

// ---------------------------------------------------------------------------
// Small numerics
// ---------------------------------------------------------------------------

inline constexpr double kPi = std::numbers::pi;

inline double sgn(double x) { return x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0); }
inline double sq(double x) { return x * x; }
inline double cube(double x) { return x * x * x; }

// log(e^a + e^b), safe for very large/small magnitudes
inline double log_add_exp(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  double m = std::max(a, b);
  return m + std::log1p(std::exp(std::min(a, b) - m));
}

inline std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = a + (b - a) * i / double(n - 1);
  return v;
}

inline std::vector<double> logspace(double a, double b, int n) {
  std::vector<double> v(n);
  double la = std::log(a), lb = std::log(b);
  for (int i = 0; i < n; ++i) v[i] = std::exp(la + (lb - la) * i / double(n - 1));
  return v;
}

// Least-squares line y = intercept + slope*x.
struct LineFit {
  double slope = 0;
  double intercept = 0;
  double rms = 0;
};

inline LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const size_t n = x.size();
  if (n < 2 || y.size() != n) fail(ErrorCode::BadConfig, "fit_line needs >= 2 points");
  double sx = 0, sy = 0;
  for (size_t i = 0; i < n; ++i) { sx += x[i]; sy += y[i]; }
  double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0;
  for (size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss = 0;
  for (size_t i = 0; i < n; ++i) ss += sq(y[i] - f.intercept - f.slope * x[i]);
  f.rms = std::sqrt(ss / n);
  return f;
}

// ---------------------------------------------------------------------------
// Quadrature: 15-point Gauss-Kronrod panel with embedded 7-point Gauss
// estimate, plus an adaptive driver.
// ---------------------------------------------------------------------------

namespace gk {
// Kronrod-15 nodes/weights on [-1,1]; Gauss-7 weights on the odd-index nodes.
inline constexpr double xk[15] = {
    -0.991455371120813, -0.949107912342759, -0.864864423359769, -0.741531185599394,
    -0.586087235467691, -0.405845151377397, -0.207784955007898, 0.0,
    0.207784955007898,  0.405845151377397,  0.586087235467691,  0.741531185599394,
    0.864864423359769,  0.949107912342759,  0.991455371120813};
inline constexpr double wk[15] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728,
    0.204432940075298, 0.190350578064785, 0.169004726639267, 0.140653259715525,
    0.104790010322250, 0.063092092629979, 0.022935322010529};
inline constexpr double wg[7] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119, 0.417959183673469,
    0.381830050505119, 0.279705391489277, 0.129484966168870};
}  // namespace gk

template <class F>
std::pair<double, double> gk15(F&& f, double a, double b) {
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  double k = 0, g = 0;
  for (int i = 0; i < 15; ++i) {
    double v = f(c + h * gk::xk[i]);
    k += gk::wk[i] * v;
    if (i % 2 == 1) g += gk::wg[i / 2] * v;
  }
  return {k * h, std::abs(k - g) * std::abs(h)};
}

// Adaptive quadrature; tol is on the absolute error unless rel_scale > 0, in
// which case the target is tol * max(rel_scale, |integral so far|).
template <class F>
double integrate_adaptive(F&& f, double a, double b, double tol, int max_depth = 48) {
  struct Seg { double a, b, val, err; int depth; };
  auto eval = [&](double lo, double hi, int d) {
    auto [v, e] = gk15(f, lo, hi);
    return Seg{lo, hi, v, e, d};
  };
  std::vector<Seg> stack{eval(a, b, 0)};
  double total = 0;
  double err_budget = tol;
  while (!stack.empty()) {
    Seg s = stack.back();
    stack.pop_back();
    double local_tol = err_budget * std::abs(s.b - s.a) / std::max(std::abs(b - a), 1e-300);
    if (s.err <= local_tol || s.depth >= max_depth) {
      if (s.depth >= max_depth && s.err > 1e3 * local_tol)
        fail(ErrorCode::QuadratureFailure, "adaptive quadrature did not converge");
      total += s.val;
      continue;
    }
    double m = 0.5 * (s.a + s.b);
    stack.push_back(eval(s.a, m, s.depth + 1));
    stack.push_back(eval(m, s.b, s.depth + 1));
  }
  return total;
}

// ---------------------------------------------------------------------------
// Hermite interpolation on one interval using value/first/second derivative
// at both ends (degree 5, O(h^6) accuracy).
// ---------------------------------------------------------------------------

struct QuinticHermite {
  // coefficients of p(u) in the local variable u = (x - x0), u in [0, h]
  double c[6];

  static QuinticHermite build(double h, double f0, double d0, double s0, double f1,
                              double d1, double s1) {
    QuinticHermite q;
    q.c[0] = f0;
    q.c[1] = d0;
    q.c[2] = 0.5 * s0;
    // remaining three coefficients from conditions at u = h
    const double h2 = h * h, h3 = h2 * h, h4 = h3 * h, h5 = h4 * h;
    const double r0 = f1 - (q.c[0] + q.c[1] * h + q.c[2] * h2);
    const double r1 = d1 - (q.c[1] + 2 * q.c[2] * h);
    const double r2 = s1 - 2 * q.c[2];
    // [h3 h4 h5; 3h2 4h3 5h4; 6h 12h2 20h3] * (c3,c4,c5) = (r0,r1,r2)
    q.c[3] = (10 * r0 / h3 - 4 * r1 / h2 + 0.5 * r2 / h);
    q.c[4] = (-15 * r0 / h4 + 7 * r1 / h3 - r2 / h2);
    q.c[5] = (6 * r0 / h5 - 3 * r1 / h4 + 0.5 * r2 / h3);
    return q;
  }
  double value(double u) const {
    return c[0] + u * (c[1] + u * (c[2] + u * (c[3] + u * (c[4] + u * c[5]))));
  }
  double deriv(double u) const {
    return c[1] + u * (2 * c[2] + u * (3 * c[3] + u * (4 * c[4] + u * 5 * c[5])));
  }
  double deriv2(double u) const {
    return 2 * c[2] + u * (6 * c[3] + u * (12 * c[4] + u * 20 * c[5]));
  }
};

// ---------------------------------------------------------------------------
// FNV-1a content hash for stage caching
// ---------------------------------------------------------------------------

inline uint64_t fnv1a(const std::string& s, uint64_t seed = 1469598103934665603ull) {
  uint64_t h = seed;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

// Central-difference derivative helpers used by tests and oracles.
template <class F>
double central_diff1(F&& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2 * h);
}
template <class F>
double central_diff2(F&& f, double x, double h) {
  return (f(x + h) - 2 * f(x) + f(x - h)) / (h * h);
}
// 5-point stencils (4th order)
template <class F>
double central_diff1_4(F&& f, double x, double h) {
  return (-f(x + 2 * h) + 8 * f(x + h) - 8 * f(x - h) + f(x - 2 * h)) / (12 * h);
}
template <class F>
double central_diff2_4(F&& f, double x, double h) {
  return (-f(x + 2 * h) + 16 * f(x + h) - 30 * f(x) + 16 * f(x - h) - f(x - 2 * h)) /
         (12 * h * h);
}

}  // namespace aniso
