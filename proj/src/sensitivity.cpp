#include "ocsens/sensitivity.hpp"

#include <cmath>

#include <Eigen/SVD>

#include "ocsens/fourier_motzkin.hpp"
#include "ocsens/lp.hpp"

namespace ocsens {
namespace {

// Above this lifted dimension the projection pass is abandoned in favour
// of interval propagation.
constexpr int kLiftCap = 60;

// Interval hull of a zonotope model { g0 + G s : slo <= s <= shi }.
void model_box(const ConvexExpr::AffineBox& m, Vec& lo, Vec& hi) {
  lo = m.g0;
  hi = m.g0;
  for (int j = 0; j < m.G.cols(); ++j) {
    for (int i = 0; i < m.G.rows(); ++i) {
      const double a = m.G(i, j) * m.slo[j];
      const double b = m.G(i, j) * m.shi[j];
      lo[i] += std::min(a, b);
      hi[i] += std::max(a, b);
    }
  }
}

// Interval image [lo2, hi2] = M [lo, hi] (entrywise interval arithmetic).
void interval_map(const Mat& M, const Vec& lo, const Vec& hi, Vec& lo2,
                  Vec& hi2) {
  lo2 = Vec::Zero(M.rows());
  hi2 = Vec::Zero(M.rows());
  for (int i = 0; i < M.rows(); ++i) {
    for (int j = 0; j < M.cols(); ++j) {
      const double c = M(i, j);
      if (c == 0.0) continue;
      const double a = c * lo[j];
      const double b = c * hi[j];
      lo2[i] += std::min(a, b);
      hi2[i] += std::max(a, b);
    }
  }
}

// Does the box [lo, hi] meet the cone { G lam + L mu : lam >= 0 }?
bool cone_meets_box(const ConeRep& c, const Vec& lo, const Vec& hi) {
  if (c.is_trivial()) {
    for (int i = 0; i < lo.size(); ++i)
      if (lo[i] > Tol::cone_residual || hi[i] < -Tol::cone_residual)
        return false;
    return true;
  }
  const int k = static_cast<int>(c.generators.cols());
  const int l = static_cast<int>(c.lineality.cols());
  Mat G(c.dim, k + l);
  if (k) G.leftCols(k) = c.generators;
  if (l) G.rightCols(l) = c.lineality;
  std::vector<int> rows;
  for (int i = 0; i < c.dim; ++i) {
    if (std::isfinite(hi[i])) rows.push_back(i);
    if (std::isfinite(lo[i])) rows.push_back(~i);
  }
  LinearProgram lp;
  lp.c = Vec::Zero(k + l);
  lp.A_ub = Mat::Zero(rows.size(), k + l);
  lp.b_ub = Vec::Zero(rows.size());
  for (size_t r = 0; r < rows.size(); ++r) {
    if (rows[r] >= 0) {
      lp.A_ub.row(r) = G.row(rows[r]);
      lp.b_ub[r] = hi[rows[r]] + Tol::cone_residual;
    } else {
      const int i = ~rows[r];
      lp.A_ub.row(r) = -G.row(i);
      lp.b_ub[r] = -lo[i] + Tol::cone_residual;
    }
  }
  lp.lb = Vec::Constant(k + l, -kInf);
  lp.lb.head(k).setZero();
  LpResult res = solve_lp(lp);
  return res.status != LpStatus::Infeasible;
}

struct StageModels {
  std::vector<ConvexExpr::AffineBox> mx, mu, mw;  // per stage k
  ConvexExpr::AffineBox mN;
};

StageModels stage_models(const ControlProblem& p, const ParameterVector& wbar,
                         const Solution& sol) {
  StageModels sm{{}, {}, {}, p.terminal_cost.subdiff_model(sol.x[p.N])};
  const Vec z = sol.z(p);
  for (int k = 0; k < p.N; ++k) {
    const Vec arg = p.stage_arg(k, z, wbar);
    const int n = p.state_dims[k];
    const int m = p.control_dims[k];
    const int q = p.param_dims[k];
    sm.mx.push_back(p.stage_costs[k].subdiff_model(arg, 0, n));
    sm.mu.push_back(p.stage_costs[k].subdiff_model(arg, n, m));
    sm.mw.push_back(p.stage_costs[k].subdiff_model(arg, n + m, q));
  }
  return sm;
}

}  // namespace

Vec AdjointChain::wstar_stacked() const {
  int total = 0;
  for (const Vec& w : wstar) total += static_cast<int>(w.size());
  Vec out(total);
  int at = 0;
  for (const Vec& w : wstar) {
    out.segment(at, w.size()) = w;
    at += static_cast<int>(w.size());
  }
  return out;
}

RegularityReport check_regularity(const ControlProblem& p,
                                  const AssembledSystem& sys) {
  RegularityReport rep;
  rep.ker_T_star_basis = kernel_basis(sys.T.transpose());
  rep.ker_M_star_basis = kernel_basis(sys.M.transpose());
  const double mscale = std::max(1.0, sys.M.norm());
  rep.kernel_inclusion_holds = true;
  for (const Vec& v : rep.ker_T_star_basis) {
    if ((sys.M.transpose() * v).norm() > 1e-9 * mscale) {
      rep.kernel_inclusion_holds = false;
      break;
    }
  }
  for (int k = 0; k < p.N; ++k) {
    Eigen::JacobiSVD<Mat> svd(p.T[k]);
    const Vec& sv = svd.singularValues();
    int rank = 0;
    const double smax = sv.size() ? sv[0] : 0.0;
    for (int i = 0; i < sv.size(); ++i)
      if (sv[i] > Tol::rank_rel * std::max(1.0, smax)) ++rank;
    rep.surjectivity_shortcut.push_back(rank == p.state_dims[k + 1]);
  }
  return rep;
}

SensitivityReport subdiff_V_smooth(const ControlProblem& p,
                                   const ParameterVector& wbar,
                                   const Solution& sol) {
  const int N = p.N;
  const Vec z = sol.z(p);
  std::vector<Vec> gx(N), gu(N), gw(N);
  for (int k = 0; k < N; ++k) {
    const Vec arg = p.stage_arg(k, z, wbar);
    auto g = p.stage_costs[k].grad(arg);
    if (!g) throw NotSmoothError();
    const int n = p.state_dims[k];
    const int m = p.control_dims[k];
    gx[k] = g->head(n);
    gu[k] = g->segment(n, m);
    gw[k] = g->tail(p.param_dims[k]);
  }
  auto gN = p.terminal_cost.grad(sol.x[N]);
  if (!gN) throw NotSmoothError();

  // Backward recursion for the state multipliers.
  std::vector<Vec> xt(N + 1);
  xt[N] = *gN;
  for (int k = N - 1; k >= 1; --k)
    xt[k] = gx[k] + p.A[k].transpose() * xt[k + 1];

  AdjointChain chain;
  chain.xtilde.assign(xt.begin() + 1, xt.end());
  chain.x0star = -(gx[0] + p.A[0].transpose() * xt[1]);
  for (int k = 0; k < N; ++k) {
    chain.ustar.push_back(-(gu[k] + p.B[k].transpose() * xt[k + 1]));
    chain.wstar.push_back(gw[k] + p.T[k].transpose() * xt[k + 1]);
  }

  SensitivityReport rep;
  rep.mode = SensMode::SmoothExact;
  bool all_ok = true;
  {
    const bool ok =
        cone_contains(normal_cone_at(p.initial_set, sol.x[0]), chain.x0star);
    rep.cone_checks.emplace_back("x0* in N(x0; C)", ok);
    all_ok = all_ok && ok;
  }
  for (int k = 0; k < N; ++k) {
    const bool ok = cone_contains(normal_cone_at(p.control_sets[k], sol.u[k]),
                                  chain.ustar[k]);
    rep.cone_checks.emplace_back("u*_" + std::to_string(k) + " in N(u; Omega)",
                                 ok);
    all_ok = all_ok && ok;
  }
  rep.subdiff_V = SetRep::singleton(chain.wstar_stacked());
  rep.singular_subdiff_V = SetRep::singleton(Vec::Zero(p.dim_w()));
  rep.chain = std::move(chain);
  if (!all_ok) rep.error = "CONE_CHECK_FAILED";
  return rep;
}

namespace {

SensitivityReport outer_interval(const ControlProblem& p,
                                 const ParameterVector& /*wbar*/,
                                 const Solution& sol, const StageModels& sm) {
  const int N = p.N;
  SensitivityReport rep;
  rep.mode = SensMode::OuterInterval;

  // Interval propagation of the state multipliers, backwards.
  std::vector<Vec> xlo(N + 1), xhi(N + 1);
  model_box(sm.mN, xlo[N], xhi[N]);
  for (int k = N - 1; k >= 1; --k) {
    Vec blo, bhi, plo, phi;
    model_box(sm.mx[k], blo, bhi);
    interval_map(p.A[k].transpose(), xlo[k + 1], xhi[k + 1], plo, phi);
    xlo[k] = blo + plo;
    xhi[k] = bhi + phi;
  }

  // Candidate x0* / u* boxes must meet the corresponding normal cones.
  {
    Vec blo, bhi, plo, phi;
    model_box(sm.mx[0], blo, bhi);
    interval_map(p.A[0].transpose(), xlo[1], xhi[1], plo, phi);
    const Vec lo = -(bhi + phi);
    const Vec hi = -(blo + plo);
    const bool ok =
        cone_meets_box(normal_cone_at(p.initial_set, sol.x[0]), lo, hi);
    rep.cone_checks.emplace_back("x0* box meets N(x0; C)", ok);
    if (!ok) rep.empty_estimate = true;
  }
  for (int k = 0; k < N; ++k) {
    Vec blo, bhi, plo, phi;
    model_box(sm.mu[k], blo, bhi);
    interval_map(p.B[k].transpose(), xlo[k + 1], xhi[k + 1], plo, phi);
    const Vec lo = -(bhi + phi);
    const Vec hi = -(blo + plo);
    const bool ok =
        cone_meets_box(normal_cone_at(p.control_sets[k], sol.u[k]), lo, hi);
    rep.cone_checks.emplace_back(
        "u*_" + std::to_string(k) + " box meets N(u; Omega)", ok);
    if (!ok) rep.empty_estimate = true;
  }

  Vec wlo(p.dim_w()), whi(p.dim_w());
  int at = 0;
  for (int k = 0; k < N; ++k) {
    Vec blo, bhi, plo, phi;
    model_box(sm.mw[k], blo, bhi);
    interval_map(p.T[k].transpose(), xlo[k + 1], xhi[k + 1], plo, phi);
    wlo.segment(at, p.param_dims[k]) = blo + plo;
    whi.segment(at, p.param_dims[k]) = bhi + phi;
    at += p.param_dims[k];
  }
  rep.subdiff_V =
      (wlo == whi) ? SetRep::singleton(wlo) : SetRep::box(wlo, whi);
  rep.singular_subdiff_V = SetRep::singleton(Vec::Zero(p.dim_w()));
  return rep;
}

SensitivityReport outer_polytope(const ControlProblem& p,
                                 const ParameterVector& wbar,
                                 const Solution& sol, const StageModels& sm) {
  const int N = p.N;
  const int nw = p.dim_w();
  const int nxt = p.dim_xtilde();

  // Variable layout of the lifted inclusion system:
  //   [ w* | xtilde* | s (one block per zonotope model) | lam, mu (cones) ]
  std::vector<int> xtoff(N + 1, 0);
  {
    int acc = nw;
    for (int k = 1; k <= N; ++k) {
      xtoff[k] = acc;
      acc += p.state_dims[k];
    }
  }
  int dim = nw + nxt;
  auto alloc = [&dim](int n) {
    const int at = dim;
    dim += n;
    return at;
  };
  const int sN = alloc(static_cast<int>(sm.mN.G.cols()));
  std::vector<int> sx(N), su(N), sw(N);
  for (int k = 0; k < N; ++k) sx[k] = alloc(static_cast<int>(sm.mx[k].G.cols()));
  for (int k = 0; k < N; ++k) su[k] = alloc(static_cast<int>(sm.mu[k].G.cols()));
  for (int k = 0; k < N; ++k) sw[k] = alloc(static_cast<int>(sm.mw[k].G.cols()));
  const ConeRep coneC = normal_cone_at(p.initial_set, sol.x[0]);
  std::vector<ConeRep> coneU;
  for (int k = 0; k < N; ++k)
    coneU.push_back(normal_cone_at(p.control_sets[k], sol.u[k]));
  const int lamC = alloc(static_cast<int>(coneC.generators.cols()));
  const int muC = alloc(static_cast<int>(coneC.lineality.cols()));
  std::vector<int> lamU(N), muU(N);
  for (int k = 0; k < N; ++k) {
    lamU[k] = alloc(static_cast<int>(coneU[k].generators.cols()));
    muU[k] = alloc(static_cast<int>(coneU[k].lineality.cols()));
  }

  if (dim > kLiftCap) {
    SensitivityReport rep = outer_interval(p, wbar, sol, sm);
    rep.mode = SensMode::OuterPolytope;
    rep.interval_fallback = true;
    return rep;
  }

  std::vector<Vec> erows;
  std::vector<double> ef;
  auto add_eq = [&](const Vec& row, double rhs) {
    erows.push_back(row);
    ef.push_back(rhs);
  };
  auto put_model = [&](Vec& row, int i, const ConvexExpr::AffineBox& m,
                       int soff, double sign) {
    for (int j = 0; j < m.G.cols(); ++j) row[soff + j] += sign * m.G(i, j);
  };
  auto put_cone = [&](Vec& row, int i, const ConeRep& c, int loff, int moff) {
    for (int j = 0; j < c.generators.cols(); ++j)
      row[loff + j] += c.generators(i, j);
    for (int j = 0; j < c.lineality.cols(); ++j)
      row[moff + j] += c.lineality(i, j);
  };

  // Terminal: xtilde*_N = g0_N + G_N s_N.
  for (int i = 0; i < p.state_dims[N]; ++i) {
    Vec row = Vec::Zero(dim);
    row[xtoff[N] + i] = 1.0;
    put_model(row, i, sm.mN, sN, -1.0);
    add_eq(row, sm.mN.g0[i]);
  }
  // Interior states: xtilde*_k = d_x h_k + A_k' xtilde*_{k+1}.
  for (int k = 1; k < N; ++k) {
    for (int i = 0; i < p.state_dims[k]; ++i) {
      Vec row = Vec::Zero(dim);
      row[xtoff[k] + i] = 1.0;
      for (int j = 0; j < p.state_dims[k + 1]; ++j)
        row[xtoff[k + 1] + j] -= p.A[k](j, i);
      put_model(row, i, sm.mx[k], sx[k], -1.0);
      add_eq(row, sm.mx[k].g0[i]);
    }
  }
  // Initial state: -d_x h_0 - A_0' xtilde*_1 = x0* in N(x0; C).
  for (int i = 0; i < p.state_dims[0]; ++i) {
    Vec row = Vec::Zero(dim);
    for (int j = 0; j < p.state_dims[1]; ++j)
      row[xtoff[1] + j] += p.A[0](j, i);
    put_model(row, i, sm.mx[0], sx[0], 1.0);
    put_cone(row, i, coneC, lamC, muC);
    add_eq(row, -sm.mx[0].g0[i]);
  }
  // Controls: -d_u h_k - B_k' xtilde*_{k+1} = u*_k in N(u_k; Omega_k).
  for (int k = 0; k < N; ++k) {
    for (int i = 0; i < p.control_dims[k]; ++i) {
      Vec row = Vec::Zero(dim);
      for (int j = 0; j < p.state_dims[k + 1]; ++j)
        row[xtoff[k + 1] + j] += p.B[k](j, i);
      put_model(row, i, sm.mu[k], su[k], 1.0);
      put_cone(row, i, coneU[k], lamU[k], muU[k]);
      add_eq(row, -sm.mu[k].g0[i]);
    }
  }
  // Parameters: w*_k = d_w h_k + T_k' xtilde*_{k+1}.
  for (int k = 0; k < N; ++k) {
    for (int i = 0; i < p.param_dims[k]; ++i) {
      Vec row = Vec::Zero(dim);
      row[p.w_offset(k) + i] = 1.0;
      for (int j = 0; j < p.state_dims[k + 1]; ++j)
        row[xtoff[k + 1] + j] -= p.T[k](j, i);
      put_model(row, i, sm.mw[k], sw[k], -1.0);
      add_eq(row, sm.mw[k].g0[i]);
    }
  }

  // Inequalities: s bounds and lam >= 0.
  std::vector<Vec> arows;
  std::vector<double> ab;
  auto add_bound = [&](int col, double lo, double hi) {
    if (std::isfinite(hi)) {
      Vec row = Vec::Zero(dim);
      row[col] = 1.0;
      arows.push_back(row);
      ab.push_back(hi);
    }
    if (std::isfinite(lo)) {
      Vec row = Vec::Zero(dim);
      row[col] = -1.0;
      arows.push_back(row);
      ab.push_back(-lo);
    }
  };
  auto bound_model = [&](const ConvexExpr::AffineBox& m, int soff) {
    for (int j = 0; j < m.G.cols(); ++j)
      add_bound(soff + j, m.slo[j], m.shi[j]);
  };
  bound_model(sm.mN, sN);
  for (int k = 0; k < N; ++k) bound_model(sm.mx[k], sx[k]);
  for (int k = 0; k < N; ++k) bound_model(sm.mu[k], su[k]);
  for (int k = 0; k < N; ++k) bound_model(sm.mw[k], sw[k]);
  auto bound_cone = [&](const ConeRep& c, int loff) {
    for (int j = 0; j < c.generators.cols(); ++j)
      add_bound(loff + j, 0.0, kInf);
  };
  bound_cone(coneC, lamC);
  for (int k = 0; k < N; ++k) bound_cone(coneU[k], lamU[k]);

  HSystem lifted;
  lifted.A = Mat::Zero(arows.size(), dim);
  lifted.b = Vec::Zero(arows.size());
  for (size_t r = 0; r < arows.size(); ++r) {
    lifted.A.row(r) = arows[r].transpose();
    lifted.b[r] = ab[r];
  }
  lifted.E = Mat::Zero(erows.size(), dim);
  lifted.f = Vec::Zero(erows.size());
  for (size_t r = 0; r < erows.size(); ++r) {
    lifted.E.row(r) = erows[r].transpose();
    lifted.f[r] = ef[r];
  }

  std::vector<int> keep(nw);
  for (int i = 0; i < nw; ++i) keep[i] = i;
  HSystem proj = fm_project(lifted, keep);

  SensitivityReport rep;
  rep.mode = SensMode::OuterPolytope;
  rep.singular_subdiff_V = SetRep::singleton(Vec::Zero(nw));
  if (proj.infeasible) {
    rep.empty_estimate = true;
    rep.subdiff_V = hsystem_to_set(proj);
    return rep;
  }
  SetRep S = hsystem_to_set(proj);
  if (nw <= kExactDimCap && S.is_bounded()) {
    Mat V = enumerate_vertices(S.poly());
    if (V.cols() == 1) {
      rep.subdiff_V = SetRep::singleton(V.col(0));
      return rep;
    }
  }
  rep.subdiff_V = S;
  return rep;
}

}  // namespace

SensitivityReport subdiff_V_outer(const ControlProblem& p,
                                  const ParameterVector& wbar,
                                  const Solution& sol, SensMode mode) {
  const StageModels sm = stage_models(p, wbar, sol);
  if (mode == SensMode::OuterInterval) return outer_interval(p, wbar, sol, sm);
  if (mode == SensMode::OuterPolytope) return outer_polytope(p, wbar, sol, sm);
  return subdiff_V_smooth(p, wbar, sol);
}

SetRep singular_subdiff_V(const ControlProblem& p,
                          const ParameterVector& /*wbar*/,
                          const Solution& /*sol*/) {
  // Horizontal chain: every singular partial is {0}, so the recursion
  // starting from the zero terminal multiplier stays at zero. Run it
  // anyway as a self-check.
  const int N = p.N;
  std::vector<Vec> xt(N + 1);
  xt[N] = Vec::Zero(p.state_dims[N]);
  for (int k = N - 1; k >= 1; --k) xt[k] = p.A[k].transpose() * xt[k + 1];
  double drift = 0.0;
  for (int k = 0; k < N; ++k)
    drift = std::max(drift, (p.T[k].transpose() * xt[k + 1]).norm());
  if (drift > 1e-12)
    throw std::logic_error("singular_subdiff_V: zero chain drifted");
  return SetRep::singleton(Vec::Zero(p.dim_w()));
}

Membership membership_general(const ControlProblem& p,
                              const AssembledSystem& sys, const Vec& zbar,
                              const ParameterVector& wbar, const Vec& cand) {
  ConeRep cone;
  try {
    cone = normal_cone_at(sys.K, zbar);
  } catch (const std::domain_error&) {
    return Membership::NotMember;
  }
  const ConvexExpr::AffineBox mz = objective_subdiff_z(p, wbar, zbar);
  const ConvexExpr::AffineBox mw = objective_subdiff_w(p, wbar, zbar);
  const int nxt = static_cast<int>(sys.M.rows());
  const int nz = static_cast<int>(sys.M.cols());
  const int nw = static_cast<int>(sys.T.cols());
  const int cz = static_cast<int>(mz.G.cols());
  const int cw = static_cast<int>(mw.G.cols());
  const int ng = static_cast<int>(cone.generators.cols());
  const int nl = static_cast<int>(cone.lineality.cols());
  const int nvar = nxt + cz + cw + ng + nl;
  if (nvar > 2000) return Membership::Undecided;

  // Feasibility of  M' x* = z* + v*,  cand = w* + T' x*  with
  // z* = g0z + Gz sz, w* = g0w + Gw sw, v* = Gen lam + Lin mu.
  Mat Big = Mat::Zero(nz + nw, nvar);
  Vec rhs(nz + nw);
  Big.block(0, 0, nz, nxt) = sys.M.transpose();
  if (cz) Big.block(0, nxt, nz, cz) = -mz.G;
  if (ng) Big.block(0, nxt + cz + cw, nz, ng) = -cone.generators;
  if (nl) Big.block(0, nxt + cz + cw + ng, nz, nl) = -cone.lineality;
  rhs.head(nz) = mz.g0;
  Big.block(nz, 0, nw, nxt) = sys.T.transpose();
  if (cw) Big.block(nz, nxt + cz, nw, cw) = mw.G;
  rhs.tail(nw) = cand - mw.g0;

  Vec lb = Vec::Constant(nvar, -kInf);
  Vec ub = Vec::Constant(nvar, kInf);
  if (cz) {
    lb.segment(nxt, cz) = mz.slo;
    ub.segment(nxt, cz) = mz.shi;
  }
  if (cw) {
    lb.segment(nxt + cz, cw) = mw.slo;
    ub.segment(nxt + cz, cw) = mw.shi;
  }
  if (ng) lb.segment(nxt + cz + cw, ng).setZero();

  const double resid = linf_residual(Big, rhs, lb, ub);
  if (!std::isfinite(resid)) return Membership::Undecided;
  return resid <= Tol::cone_residual ? Membership::Member
                                     : Membership::NotMember;
}

CheckReport oracle_check_set(const SetRep& S, const ParameterVector& wbar,
                             double Vbar, const OracleGrid& grid) {
  const Mat V = S.vertex_list();
  CheckReport out;
  out.pass = true;
  out.worst_margin = kInf;
  bool all_pass = true;
  for (int j = 0; j < V.cols(); ++j) {
    const CheckReport r =
        subgradient_inequality_check(wbar, Vbar, V.col(j), grid);
    all_pass = all_pass && r.pass;
    if (r.worst_margin < out.worst_margin) out = r;
  }
  out.pass = all_pass;
  if (V.cols() == 0) out.worst_margin = 0.0;
  return out;
}

}  // namespace ocsens
