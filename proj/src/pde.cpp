#include "aniso/pde.hpp"

#include <Eigen/Sparse>

namespace aniso {

SectorGrid SectorGrid::make(int n_rho, int n_theta, double R_ball, int k, bool quarter) {
  if (n_rho < 16 || n_theta < 16) fail(ErrorCode::BadConfig, "grid too coarse");
  SectorGrid g;
  g.n_rho = n_rho;
  g.n_theta = n_theta;
  g.R_ball = R_ball;
  g.rho_min = R_ball * 1e-3;
  g.quarter = quarter;
  g.k = g.l = k;
  g.eta = linspace(std::log(g.rho_min), std::log(R_ball), n_rho + 1);
  g.theta = linspace(quarter ? 0.0 : kPi / 4, kPi / 2, n_theta + 1);
  return g;
}

double reduced_operator(const IntegrandStack& stack, int k, double xi, double zeta,
                        const PointDerivs& d) {
  const double r = std::abs(d.U_xi), s = std::abs(d.U_zeta);
  const Radial2 ps = stack.psi(r, s);
  if (!stack.area_kind() && !(stack.varphi(r, s).v > 1.0))
    fail(ErrorCode::GradientOutOfDomain, "gradient in {psi_bar <= 1}");
  double acc = ps.v11 * d.U_xixi + 2 * sgn(d.U_xi) * sgn(d.U_zeta) * ps.v12 * d.U_xizeta +
               ps.v22 * d.U_zetazeta;
  // tangential terms with their r -> 0 limits psi1(r,s)/r -> psi11(0+, s)
  const double lim0 = stack.profile().ddphi(0.0);
  if (r > 1e-10 * std::max(s, 1.0))
    acc += k * sgn(d.U_xi) * ps.v1 / xi;
  else
    acc += k * (stack.F(stack.varphi(0, s).v).d1 * lim0 / s) * (d.U_xi / xi);
  if (s > 1e-10 * std::max(r, 1.0))
    acc += k * sgn(d.U_zeta) * ps.v2 / zeta;
  else
    acc += k * (stack.F(stack.varphi(r, 0).v).d1 * lim0 / r) * (d.U_zeta / zeta);
  return acc;
}

namespace {

struct NodeCoeffs {
  double a11, a12, a22, adv1, adv2;
};

// finite-difference gradient (q_xi, q_zeta) of the scaled field at node (i,j),
// using ghost reflection across Neumann axes
struct GradField {
  const SectorGrid& g;
  const std::vector<double>& U;
  double deta, dth;

  double at(int i, int j) const {
    // reflect across the axes; clamp radially (one-sided at the ends)
    if (j < 0) j = -j;
    if (j > g.n_theta) j = 2 * g.n_theta - j;
    i = std::clamp(i, 0, g.n_rho);
    return U[g.idx(i, j)];
  }
  // theta ghost only valid at Neumann edges; diagonal edge is Dirichlet
  std::pair<double, double> grad(int i, int j) const {
    const double c = std::cos(g.theta[j]), s = std::sin(g.theta[j]);
    const double rho = g.rho(i);
    double Ue, Ut;
    if (i == 0)
      Ue = (at(1, j) - at(0, j)) / deta;
    else if (i == g.n_rho)
      Ue = (at(i, j) - at(i - 1, j)) / deta;
    else
      Ue = (at(i + 1, j) - at(i - 1, j)) / (2 * deta);
    if (!g.quarter && j == 0)
      Ut = (at(i, 1) - at(i, 0)) / dth;  // one-sided at the Dirichlet diagonal
    else
      Ut = (at(i, j + 1) - at(i, j - 1)) / (2 * dth);
    const double Ur = Ue / rho;
    const double q_xi = c * Ur - s * Ut / rho;
    const double q_zeta = s * Ur + c * Ut / rho;
    return {q_xi, q_zeta};
  }
};

}  // namespace

PdeSolution solve_dirichlet(const BarrierSet& barriers, const SectorGrid& grid,
                            const SolveOptions& opts) {
  const IntegrandStack& stack = *barriers.stack;
  const int N = grid.n_rho, M = grid.n_theta;
  const int k = grid.k;
  const double deta = grid.eta[1] - grid.eta[0];
  const double dth = grid.theta[1] - grid.theta[0];
  const int n_nodes = (N + 1) * (M + 1);

  PdeSolution sol;
  sol.grid = grid;

  // boundary data on the arc, in scaled form
  std::vector<double> arc(M + 1, 0.0);
  double ln_scale = 0.0;
  if (opts.data != BoundaryData::Zero) {
    std::vector<double> ln_arc(M + 1, -std::numeric_limits<double>::infinity());
    double mx = -std::numeric_limits<double>::infinity();
    for (int j = 0; j <= M; ++j) {
      const double th = grid.theta[j];
      const double xi = grid.R_ball * std::cos(th), zeta = grid.R_ball * std::sin(th);
      if (std::abs(zeta - xi) < 1e-12 * grid.R_ball) continue;  // odd data vanishes
      const double a = std::min(std::abs(xi), zeta), b = std::max(std::abs(xi), zeta);
      double v = barriers.ln_ubar(a, b) + std::log(opts.data_factor);
      ln_arc[j] = v;
      mx = std::max(mx, v);
    }
    ln_scale = mx;
    for (int j = 0; j <= M; ++j) {
      if (ln_arc[j] == -std::numeric_limits<double>::infinity()) { arc[j] = 0.0; continue; }
      double v = std::exp(ln_arc[j] - ln_scale);
      // odd sign below the diagonal in quarter mode
      if (grid.quarter && grid.theta[j] < kPi / 4) v = -v;
      arc[j] = v;
    }
  }
  sol.ln_scale = ln_scale;

  // initial guess: (ubar + uunder)/2 in scaled units (0 for the zero problem)
  std::vector<double> U(n_nodes, 0.0);
  if (opts.data != BoundaryData::Zero) {
    for (int i = 0; i <= N; ++i)
      for (int j = 0; j <= M; ++j) {
        const double th = grid.theta[j];
        const double rho = grid.rho(i);
        const double xi = rho * std::cos(th), zeta = rho * std::sin(th);
        if (std::abs(zeta - std::abs(xi)) < 1e-12 * rho) continue;
        const double a = std::min(std::abs(xi), zeta), b = std::max(std::abs(xi), zeta);
        const double lu = barriers.ln_ubar(a, b) + std::log(opts.data_factor);
        double v = 0.5 * (std::exp(lu - ln_scale) + barriers.uunder(a, b) *
                                                        std::exp(-ln_scale) * opts.data_factor);
        if (grid.quarter && th < kPi / 4) v = -v;
        U[grid.idx(i, j)] = v;
      }
    for (int j = 0; j <= M; ++j) U[grid.idx(N, j)] = arc[j];
    if (!grid.quarter)
      for (int i = 0; i <= N; ++i) U[grid.idx(i, 0)] = 0.0;
  }

  // unknowns: everything except the arc (i = N) and the sector diagonal (j = 0)
  std::vector<int> unknown(n_nodes, -1);
  int n_unk = 0;
  for (int i = 0; i < N; ++i)
    for (int j = 0; j <= M; ++j) {
      if (!grid.quarter && j == 0) continue;
      unknown[grid.idx(i, j)] = n_unk++;
    }

  using Trip = Eigen::Triplet<double>;
  Eigen::SparseMatrix<double> A(n_unk, n_unk);
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  bool analyzed = false;

  GradField gf{grid, U, deta, dth};
  const double qscale_floor = 1e-280;

  auto coeffs_at = [&](int i, int j, bool first_iter) -> NodeCoeffs {
    auto [qx, qz] = gf.grad(i, j);
    if (std::hypot(qx, qz) < qscale_floor) {
      // degenerate (identically zero) iterate: fall back to the cone operator
      // coefficients in a reference direction; any elliptic choice works here
      qx = -0.5;
      qz = 1.0;
    }
    try {
      const auto rc = stack.reduced_coeffs(qx, qz, ln_scale);
      return {rc.a11, rc.a12, rc.a22, rc.adv1, rc.adv2};
    } catch (const Error& e) {
      if (e.code() == ErrorCode::GradientOutOfDomain && first_iter) {
        // seed freeze only: pure cone coefficients (F' = 1, F'' = 0)
        const double r = std::abs(qx), s = std::abs(qz);
        const Radial2 v = stack.varphi(std::max(r, 1e-30), std::max(s, 1e-30));
        const double lim = stack.profile().ddphi(0.0);
        const double adv1 = r > 1e-10 * std::max(s, 1e-300) ? v.v1 / r : lim / s;
        const double adv2 = s > 1e-10 * std::max(r, 1e-300) ? v.v2 / s : lim / r;
        return {v.v11, v.v12 * sgn(qx) * sgn(qz), v.v22, adv1, adv2};
      }
      throw;
    }
  };

  // nonlinear residual, relative to the largest term magnitude over the grid
  auto residual = [&]() -> double {
    double worst = 0, scale = 1e-300;
    for (int i = 1; i < N; ++i)
      for (int j = (grid.quarter ? 0 : 1); j <= M; ++j) {
        const NodeCoeffs nc = coeffs_at(i, j, false);
        const double c = std::cos(grid.theta[j]), s = std::sin(grid.theta[j]);
        auto Uat = [&](int ii, int jj) { return gf.at(ii, jj); };
        const double Ue = (Uat(i + 1, j) - Uat(i - 1, j)) / (2 * deta);
        const double Ut = (j == 0 && !grid.quarter)
                              ? (Uat(i, 1) - Uat(i, 0)) / dth
                              : (Uat(i, j + 1) - Uat(i, j - 1)) / (2 * dth);
        const double Uee = (Uat(i + 1, j) - 2 * Uat(i, j) + Uat(i - 1, j)) / (deta * deta);
        const double Utt = (Uat(i, j + 1) - 2 * Uat(i, j) + Uat(i, j - 1)) / (dth * dth);
        const double Uet = (Uat(i + 1, j + 1) - Uat(i + 1, j - 1) - Uat(i - 1, j + 1) +
                            Uat(i - 1, j - 1)) /
                           (4 * deta * dth);
        double terms[5];
        const bool axis_hi = (j == M), axis_lo = (grid.quarter && j == 0);
        if (axis_hi || axis_lo) {
          // axis rows: U_xz = 0, tangential term becomes a second derivative
          const double a_t = axis_hi ? nc.a11 + k * nc.adv1 : nc.a22 + k * nc.adv2;
          const double a_r = axis_hi ? nc.a22 : nc.a11;
          const double adv = axis_hi ? k * nc.adv2 : k * nc.adv1;
          terms[0] = a_t * (Utt + Ue);
          terms[1] = a_r * (Uee - Ue);
          terms[2] = adv * Ue;
          terms[3] = terms[4] = 0;
        } else {
          const double b_ee = nc.a11 * c * c + 2 * nc.a12 * c * s + nc.a22 * s * s;
          const double b_et = -2 * nc.a11 * c * s + 2 * nc.a12 * (c * c - s * s) +
                              2 * nc.a22 * c * s;
          const double b_tt = nc.a11 * s * s - 2 * nc.a12 * c * s + nc.a22 * c * c;
          const double b_e = b_tt - b_ee + k * (nc.adv1 + nc.adv2);
          const double b_t = 2 * c * s * (nc.a11 - nc.a22) - 2 * nc.a12 * (c * c - s * s) -
                             k * nc.adv1 * s / c + k * nc.adv2 * c / s;
          terms[0] = b_ee * Uee;
          terms[1] = b_et * Uet;
          terms[2] = b_tt * Utt;
          terms[3] = b_e * Ue;
          terms[4] = b_t * Ut;
        }
        double r = 0, m = 0;
        for (double t : terms) {
          r += t;
          m += std::abs(t);
        }
        worst = std::max(worst, std::abs(r));
        scale = std::max(scale, m);
      }
    return worst / scale;
  };

  double omega = opts.omega;
  double prev_res = std::numeric_limits<double>::infinity();
  for (int iter = 0; iter <= opts.max_iters; ++iter) {
    const double res = residual();
    sol.rel_residual = res;
    sol.iters = iter;
    if (res < opts.tol) break;
    if (iter == opts.max_iters)
      fail(ErrorCode::NoConvergence, "Picard residual " + std::to_string(res));
    if (res > prev_res * 1.2) omega = std::max(0.2, omega * 0.6);
    prev_res = std::min(prev_res, res);

    // assemble frozen linear system
    std::vector<Trip> trips;
    trips.reserve(size_t(n_unk) * 9);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n_unk);
    auto add = [&](int row, int i, int j, double v) {
      if (v == 0) return;
      if (j < 0) j = -j;  // ghost reflection at theta edges
      if (j > M) j = 2 * M - j;
      const int id = grid.idx(i, j);
      if (unknown[id] >= 0)
        trips.emplace_back(row, unknown[id], v);
      else
        rhs[row] -= v * U[id];
    };
    for (int i = 0; i < N; ++i)
      for (int j = 0; j <= M; ++j) {
        const int id = grid.idx(i, j);
        if (unknown[id] < 0) continue;
        const int row = unknown[id];
        if (i == 0) {
          // inner cutout: linear interpolation toward U(0) = 0 from ring 1
          add(row, 0, j, 1.0);
          add(row, 1, j, -std::exp(grid.eta[0] - grid.eta[1]));
          continue;
        }
        const NodeCoeffs nc = coeffs_at(i, j, iter == 0);
        const bool axis_hi = (j == M), axis_lo = (grid.quarter && j == 0);
        if (axis_hi || axis_lo) {
          const double a_t = axis_hi ? nc.a11 + k * nc.adv1 : nc.a22 + k * nc.adv2;
          const double a_r = axis_hi ? nc.a22 : nc.a11;
          const double adv = axis_hi ? k * nc.adv2 : k * nc.adv1;
          const int dj = axis_hi ? -1 : 1;  // interior neighbor
          // a_t (U_tt + U_e) + a_r (U_ee - U_e) + adv U_e = 0, ghost-reflected
          add(row, i, j + dj, 2 * a_t / (dth * dth));
          add(row, i, j, -2 * a_t / (dth * dth));
          const double ce = a_t - a_r + adv;
          add(row, i + 1, j, a_r / (deta * deta) + ce / (2 * deta));
          add(row, i, j, -2 * a_r / (deta * deta));
          add(row, i - 1, j, a_r / (deta * deta) - ce / (2 * deta));
          continue;
        }
        const double c = std::cos(grid.theta[j]), s = std::sin(grid.theta[j]);
        const double b_ee = nc.a11 * c * c + 2 * nc.a12 * c * s + nc.a22 * s * s;
        const double b_et =
            -2 * nc.a11 * c * s + 2 * nc.a12 * (c * c - s * s) + 2 * nc.a22 * c * s;
        const double b_tt = nc.a11 * s * s - 2 * nc.a12 * c * s + nc.a22 * c * c;
        const double b_e = b_tt - b_ee + k * (nc.adv1 + nc.adv2);
        const double b_t = 2 * c * s * (nc.a11 - nc.a22) - 2 * nc.a12 * (c * c - s * s) -
                           k * nc.adv1 * s / c + k * nc.adv2 * c / s;
        // second derivatives
        add(row, i + 1, j, b_ee / (deta * deta));
        add(row, i, j, -2 * b_ee / (deta * deta));
        add(row, i - 1, j, b_ee / (deta * deta));
        add(row, i, j + 1, b_tt / (dth * dth));
        add(row, i, j, -2 * b_tt / (dth * dth));
        add(row, i, j - 1, b_tt / (dth * dth));
        add(row, i + 1, j + 1, b_et / (4 * deta * dth));
        add(row, i + 1, j - 1, -b_et / (4 * deta * dth));
        add(row, i - 1, j + 1, -b_et / (4 * deta * dth));
        add(row, i - 1, j - 1, b_et / (4 * deta * dth));
        // advection: central unless the cell Peclet number is large
        const double pe_e = std::abs(b_e) * deta / std::max(b_ee, 1e-300);
        if (pe_e <= 1.9) {
          add(row, i + 1, j, b_e / (2 * deta));
          add(row, i - 1, j, -b_e / (2 * deta));
        } else if (b_e > 0) {
          add(row, i + 1, j, b_e / deta);
          add(row, i, j, -b_e / deta);
        } else {
          add(row, i, j, b_e / deta);
          add(row, i - 1, j, -b_e / deta);
        }
        const double pe_t = std::abs(b_t) * dth / std::max(b_tt, 1e-300);
        if (pe_t <= 1.9) {
          add(row, i, j + 1, b_t / (2 * dth));
          add(row, i, j - 1, -b_t / (2 * dth));
        } else if (b_t > 0) {
          add(row, i, j + 1, b_t / dth);
          add(row, i, j, -b_t / dth);
        } else {
          add(row, i, j, b_t / dth);
          add(row, i, j - 1, -b_t / dth);
        }
      }

    A.setFromTriplets(trips.begin(), trips.end());
    if (!analyzed) {
      lu.analyzePattern(A);
      analyzed = true;
    }
    lu.factorize(A);
    if (lu.info() != Eigen::Success) fail(ErrorCode::NoConvergence, "sparse factorization failed");
    Eigen::VectorXd x = lu.solve(rhs);
    for (int id = 0; id < n_nodes; ++id)
      if (unknown[id] >= 0) U[id] = (1.0 - omega) * U[id] + omega * x[unknown[id]];
  }

  sol.U = U;

  // trapping and growth samples
  if (opts.data == BoundaryData::Ubar && !grid.quarter) {
    sol.margin_upper = std::numeric_limits<double>::infinity();
    sol.margin_lower = std::numeric_limits<double>::infinity();
    bool ok = true;
    for (int i = 0; i <= N; ++i)
      for (int j = 0; j <= M; ++j) {
        const double th = grid.theta[j];
        const double rho = grid.rho(i);
        const double xi = rho * std::cos(th), zeta = rho * std::sin(th);
        const double u = U[grid.idx(i, j)];
        double ub = 1.0;  // scaled upper barrier
        if (std::abs(zeta - xi) > 1e-12 * rho)
          ub = std::exp(barriers.ln_ubar(std::min(xi, zeta), std::max(xi, zeta)) - ln_scale);
        else
          ub = 0.0;
        const double un = std::abs(zeta - xi) > 1e-12 * rho
                              ? barriers.uunder(std::min(xi, zeta), std::max(xi, zeta)) *
                                    std::exp(-ln_scale)
                              : 0.0;
        sol.margin_upper = std::min(sol.margin_upper, ub - u);
        sol.margin_lower = std::min(sol.margin_lower, u - un);
        if (!(u <= ub) || !(u >= un)) ok = false;
      }
    sol.trapped = ok;
    for (double r : logspace(grid.rho_min * 2, grid.R_ball / 2, 17)) {
      double sup = 0;
      for (int i = 0; i <= N; ++i) {
        if (grid.rho(i) > r) break;
        for (int j = 0; j <= M; ++j) sup = std::max(sup, U[grid.idx(i, j)]);
      }
      if (sup > 0) sol.growth_samples.emplace_back(r, std::log(sup) + ln_scale);
    }
  }
  return sol;
}

GrowthResult growth_exponent(const std::vector<PdeSolution>& solutions) {
  if (solutions.size() < 3) fail(ErrorCode::BadConfig, "growth fit needs >= 3 solves");
  GrowthResult res;
  // fit on the largest ball over its interior window
  const PdeSolution& big = solutions.back();
  std::vector<double> x, y;
  for (auto& [r, ln_sup] : big.growth_samples) {
    if (r < big.grid.R_ball / 50 || r > big.grid.R_ball / 2) continue;
    x.push_back(std::log(r));
    y.push_back(ln_sup);
  }
  res.slope = fit_line(x, y).slope;
  res.samples = big.growth_samples;

  // Cauchy stability between successive solves on the smallest window
  for (size_t m = 0; m + 1 < solutions.size(); ++m) {
    const PdeSolution& a = solutions[m];
    const PdeSolution& b = solutions[m + 1];
    const double rmax = a.grid.R_ball / 2;
    double diff = 0, scale = 1e-300;
    for (int i = 0; i <= a.grid.n_rho; ++i) {
      const double rho = a.grid.rho(i);
      if (rho > rmax || rho < b.grid.rho_min * 1.01) continue;
      // locate rho in b's eta grid (uniform)
      const double t = (std::log(rho) - b.grid.eta.front()) /
                       (b.grid.eta[1] - b.grid.eta[0]);
      const int ib = std::clamp(int(t), 0, b.grid.n_rho - 1);
      const double w = t - ib;
      for (int j = 0; j <= a.grid.n_theta; ++j) {
        // same theta nodes when n_theta matches
        const double ua = a.at(i, j) * std::exp(a.ln_scale);
        const double ub = (b.at(ib, j) * (1 - w) + b.at(ib + 1, j) * w) * std::exp(b.ln_scale);
        diff = std::max(diff, std::abs(ua - ub));
        scale = std::max(scale, std::abs(ua));
      }
    }
    res.max_rel_diff = std::max(res.max_rel_diff, diff / scale);
  }
  if (res.max_rel_diff >= 0.05)
    fail(ErrorCode::Unstable, "successive solutions differ by " +
                                  std::to_string(100 * res.max_rel_diff) + "%");
  return res;
}

double refinement_order(const BarrierSet& barriers, int n_rho, int n_theta, double R_ball,
                        const SolveOptions& opts) {
  std::vector<PdeSolution> sols;
  for (int m : {1, 2, 4})
    sols.push_back(
        solve_dirichlet(barriers, SectorGrid::make(n_rho * m, n_theta * m, R_ball,
                                                   barriers.pair->curve().k, false),
                        opts));
  auto err = [&](const PdeSolution& coarse, const PdeSolution& fine) {
    double e = 0;
    const int f = fine.grid.n_rho / coarse.grid.n_rho;
    for (int i = 0; i <= coarse.grid.n_rho; ++i)
      for (int j = 0; j <= coarse.grid.n_theta; ++j)
        e = std::max(e, std::abs(coarse.at(i, j) - fine.at(f * i, f * j)));
    return e;
  };
  const double e1 = err(sols[0], sols[1]);
  const double e2 = err(sols[1], sols[2]);
  return std::log2(e1 / e2);
}

}  // namespace aniso
