#include "ocsens/solver.hpp"

#include <cmath>

#include "ocsens/lp.hpp"
#include "ocsens/qp.hpp"

namespace ocsens {
namespace {

// Reduced parameterization z = S v + d with v = (x_0, u_0, ..., u_{N-1});
// the dynamics rows of M z = T w hold identically in v.
struct ReducedMap {
  Mat S;
  Vec d;
  int nv = 0;
  std::vector<int> v_u_offset;  // offset of u_k inside v
};

ReducedMap reduce_states(const ControlProblem& p, const Vec& w) {
  ReducedMap rm;
  const int n0 = p.state_dims[0];
  rm.nv = n0 + p.dim_u();
  rm.S = Mat::Zero(p.dim_z(), rm.nv);
  rm.d = Vec::Zero(p.dim_z());
  rm.v_u_offset.resize(p.N);
  int off = n0;
  for (int k = 0; k < p.N; ++k) {
    rm.v_u_offset[k] = off;
    off += p.control_dims[k];
  }
  rm.S.block(p.x_offset(0), 0, n0, n0).setIdentity();
  for (int k = 0; k < p.N; ++k)
    rm.S.block(p.u_offset(k), rm.v_u_offset[k], p.control_dims[k],
               p.control_dims[k])
        .setIdentity();
  for (int k = 0; k < p.N; ++k) {
    rm.S.middleRows(p.x_offset(k + 1), p.state_dims[k + 1]) =
        p.A[k] * rm.S.middleRows(p.x_offset(k), p.state_dims[k]) +
        p.B[k] * rm.S.middleRows(p.u_offset(k), p.control_dims[k]);
    rm.d.segment(p.x_offset(k + 1), p.state_dims[k + 1]) =
        p.A[k] * rm.d.segment(p.x_offset(k), p.state_dims[k]) +
        p.T[k] * w.segment(p.w_offset(k), p.param_dims[k]);
  }
  return rm;
}

struct ZObjective {
  Mat P;                       // quadratic part over z
  Vec q;
  double c = 0.0;
  std::vector<AbsAtom> atoms;  // atoms over z (w folded into b)
};

// Fold the fixed parameter into the stacked-z objective.
ZObjective objective_in_z(const ControlProblem& p, const Vec& w) {
  const int nz = p.dim_z();
  ZObjective f;
  f.P = Mat::Zero(nz, nz);
  f.q = Vec::Zero(nz);

  auto add_expr = [&](const ConvexExpr& e, const std::vector<int>& zidx,
                      const Vec& wvals) {
    // zidx[i] >= 0: z coordinate; zidx[i] == -1: fixed at wvals[i].
    const int d = e.dim();
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) {
        const double Qij = e.Q()(i, j);
        if (Qij == 0.0) continue;
        if (zidx[i] >= 0 && zidx[j] >= 0)
          f.P(zidx[i], zidx[j]) += Qij;
        else if (zidx[i] >= 0)
          f.q[zidx[i]] += 0.5 * Qij * wvals[j];
        else if (zidx[j] >= 0)
          f.q[zidx[j]] += 0.5 * Qij * wvals[i];
        else
          f.c += 0.5 * Qij * wvals[i] * wvals[j];
      }
      if (zidx[i] >= 0)
        f.q[zidx[i]] += e.q()[i];
      else
        f.c += e.q()[i] * wvals[i];
    }
    f.c += e.constant();
    for (const auto& at : e.atoms()) {
      AbsAtom za;
      za.a = Vec::Zero(nz);
      za.b = at.b;
      za.weight = at.weight;
      for (int i = 0; i < d; ++i) {
        if (zidx[i] >= 0)
          za.a[zidx[i]] += at.a[i];
        else
          za.b -= at.a[i] * wvals[i];
      }
      f.atoms.push_back(std::move(za));
    }
  };

  for (int k = 0; k < p.N; ++k) {
    const int nk = p.state_dims[k], mk = p.control_dims[k], pk = p.param_dims[k];
    std::vector<int> zidx(nk + mk + pk, -1);
    Vec wvals = Vec::Zero(nk + mk + pk);
    for (int i = 0; i < nk; ++i) zidx[i] = p.x_offset(k) + i;
    for (int i = 0; i < mk; ++i) zidx[nk + i] = p.u_offset(k) + i;
    for (int i = 0; i < pk; ++i)
      wvals[nk + mk + i] = w[p.w_offset(k) + i];
    add_expr(p.stage_costs[k], zidx, wvals);
  }
  {
    const int nN = p.state_dims[p.N];
    std::vector<int> zidx(nN);
    for (int i = 0; i < nN; ++i) zidx[i] = p.x_offset(p.N) + i;
    add_expr(p.terminal_cost, zidx, Vec::Zero(nN));
  }
  return f;
}

// Append rows of a polyhedral set acting on a sub-block of v, equalities
// expanded into opposing inequality pairs.
void append_set_rows(const PolyhedralSet& S, int offset, int nv,
                     std::vector<Vec>& rows, std::vector<double>& rhs) {
  for (int i = 0; i < S.num_ineq(); ++i) {
    Vec r = Vec::Zero(nv);
    r.segment(offset, S.dim) = S.A.row(i).transpose();
    rows.push_back(r);
    rhs.push_back(S.b[i]);
  }
  for (int j = 0; j < S.num_eq(); ++j) {
    Vec r = Vec::Zero(nv);
    r.segment(offset, S.dim) = S.E.row(j).transpose();
    rows.push_back(r);
    rhs.push_back(S.f[j]);
    rows.push_back(-r);
    rhs.push_back(-S.f[j]);
  }
}

}  // namespace

SolveResult solve(const ControlProblem& p, const ParameterVector& w) {
  SolveResult out;
  auto x0f = p.initial_set.feasible_point();
  if (!x0f) {
    out.status = SolveStatus::Infeasible;
    return out;
  }
  std::vector<Vec> u0(p.N);
  for (int k = 0; k < p.N; ++k) {
    auto uf = p.control_sets[k].feasible_point();
    if (!uf) {
      out.status = SolveStatus::Infeasible;
      return out;
    }
    u0[k] = *uf;
  }

  ReducedMap rm = reduce_states(p, w);
  ZObjective f = objective_in_z(p, w);

  // Reduce the quadratic part onto v.
  Mat Pz = 0.5 * (f.P + f.P.transpose());
  Mat Pv = rm.S.transpose() * Pz * rm.S;
  Pv = 0.5 * (Pv + Pv.transpose());
  Vec qv = rm.S.transpose() * (Pz * rm.d + f.q);
  double c0 = f.c + 0.5 * rm.d.dot(Pz * rm.d) + f.q.dot(rm.d);

  // Epigraph lift of the atoms that still depend on v.
  struct Epi {
    Vec a;
    double b;
    double weight;
  };
  std::vector<Epi> epis;
  for (const auto& at : f.atoms) {
    Vec av = rm.S.transpose() * at.a;
    const double bv = at.b - at.a.dot(rm.d);
    if (av.lpNorm<Eigen::Infinity>() <= 1e-13 * (1.0 + at.a.norm())) {
      c0 += at.weight * std::abs(bv);
    } else if (at.weight != 0.0) {
      epis.push_back({av, bv, at.weight});
    }
  }

  const int nv = rm.nv;
  const int nt = static_cast<int>(epis.size());
  const int ny = nv + nt;
  Mat Py = Mat::Zero(ny, ny);
  Py.topLeftCorner(nv, nv) = Pv;
  Vec ry = Vec::Zero(ny);
  ry.head(nv) = qv;
  for (int i = 0; i < nt; ++i) ry[nv + i] = epis[i].weight;

  std::vector<Vec> rows;
  std::vector<double> rhs;
  append_set_rows(p.initial_set, 0, ny, rows, rhs);
  for (int k = 0; k < p.N; ++k)
    append_set_rows(p.control_sets[k], rm.v_u_offset[k], ny, rows, rhs);
  for (int i = 0; i < nt; ++i) {
    Vec r = Vec::Zero(ny);
    r.head(nv) = epis[i].a;
    r[nv + i] = -1.0;
    rows.push_back(r);
    rhs.push_back(epis[i].b);
    Vec r2 = Vec::Zero(ny);
    r2.head(nv) = -epis[i].a;
    r2[nv + i] = -1.0;
    rows.push_back(r2);
    rhs.push_back(-epis[i].b);
  }
  Mat G(rows.size(), ny);
  Vec g(rows.size());
  for (size_t i = 0; i < rows.size(); ++i) {
    G.row(i) = rows[i].transpose();
    g[i] = rhs[i];
  }

  Vec y0 = Vec::Zero(ny);
  y0.head(p.state_dims[0]) = *x0f;
  for (int k = 0; k < p.N; ++k)
    y0.segment(rm.v_u_offset[k], p.control_dims[k]) = u0[k];
  for (int i = 0; i < nt; ++i)
    y0[nv + i] = std::abs(epis[i].a.dot(y0.head(nv)) - epis[i].b) + 1.0;

  QpResult qp = solve_qp(Py, ry, G, g, y0);
  out.iterations = qp.iterations;
  out.objective_trace = qp.objective_trace;
  if (qp.status == QpStatus::Unbounded) {
    out.status = SolveStatus::Unbounded;
    return out;
  }
  Vec v = qp.y.head(nv);
  Vec z = rm.S * v + rm.d;
  out.solution = Solution::from_z(p, z);
  out.solution.objective = evaluate_objective(p, out.solution, w);
  out.value = out.solution.objective;
  if (qp.status == QpStatus::MaxIter) {
    out.status = (out.value < -1e12) ? SolveStatus::Unbounded : SolveStatus::MaxIter;
    return out;
  }
  out.status = SolveStatus::Optimal;
  out.kkt = kkt_verify(p, w, out.solution);
  return out;
}

double optimal_value(const ControlProblem& p, const ParameterVector& w) {
  SolveResult r = solve(p, w);
  switch (r.status) {
    case SolveStatus::Optimal:
      return r.value;
    case SolveStatus::Infeasible:
      return kInf;
    case SolveStatus::Unbounded:
      return -kInf;
    default:
      return r.value;
  }
}

int OracleGrid::num_points() const {
  int n = 1;
  for (int i = 0; i < center.size(); ++i) n *= points_per_axis;
  return n;
}

Vec OracleGrid::point(int flat_index) const {
  Vec w = center;
  if (points_per_axis == 1) return w;
  int rem = flat_index;
  for (int i = 0; i < center.size(); ++i) {
    const int idx = rem % points_per_axis;
    rem /= points_per_axis;
    w[i] += radii[i] * (-1.0 + 2.0 * idx / (points_per_axis - 1));
  }
  return w;
}

OracleGrid grid_oracle(const ControlProblem& p, OracleGrid g) {
  if (g.points_per_axis % 2 == 0)
    throw std::invalid_argument("grid_oracle: points_per_axis must be odd");
  if (g.center.size() != p.dim_w())
    throw std::invalid_argument("grid_oracle: center dim mismatch");
  const int n = g.num_points();
  if (n > 100000) throw std::invalid_argument("grid_oracle: point cap exceeded");
  g.values.assign(n, 0.0);
  for (int i = 0; i < n; ++i) g.values[i] = optimal_value(p, g.point(i));
  return g;
}

CheckReport subgradient_inequality_check(const ParameterVector& wbar,
                                         double Vbar, const Vec& cand,
                                         const OracleGrid& g) {
  CheckReport rep;
  rep.worst_margin = kInf;
  for (int i = 0; i < g.num_points(); ++i) {
    const double V = g.values[i];
    if (!std::isfinite(V)) continue;
    const Vec w = g.point(i);
    const double margin = V - Vbar - cand.dot(w - wbar);
    if (margin < rep.worst_margin) {
      rep.worst_margin = margin;
      rep.worst_point = w;
    }
  }
  rep.pass = rep.worst_margin >= -1e-6;
  return rep;
}

ConvexExpr::AffineBox objective_subdiff_z(const ControlProblem& p,
                                          const ParameterVector& w,
                                          const Vec& zbar) {
  const int nz = p.dim_z();
  Vec g0 = Vec::Zero(nz);
  std::vector<Vec> cols;
  for (int k = 0; k < p.N; ++k) {
    const Vec arg = p.stage_arg(k, zbar, w);
    const int zu = p.state_dims[k] + p.control_dims[k];
    auto m = p.stage_costs[k].subdiff_model(arg, 0, zu);
    g0.segment(p.x_offset(k), p.state_dims[k]) += m.g0.head(p.state_dims[k]);
    g0.segment(p.u_offset(k), p.control_dims[k]) += m.g0.tail(p.control_dims[k]);
    for (int j = 0; j < m.G.cols(); ++j) {
      Vec col = Vec::Zero(nz);
      col.segment(p.x_offset(k), p.state_dims[k]) =
          m.G.col(j).head(p.state_dims[k]);
      col.segment(p.u_offset(k), p.control_dims[k]) =
          m.G.col(j).tail(p.control_dims[k]);
      cols.push_back(col);
    }
  }
  {
    const Vec xN = zbar.segment(p.x_offset(p.N), p.state_dims[p.N]);
    auto m = p.terminal_cost.subdiff_model(xN);
    g0.segment(p.x_offset(p.N), p.state_dims[p.N]) += m.g0;
    for (int j = 0; j < m.G.cols(); ++j) {
      Vec col = Vec::Zero(nz);
      col.segment(p.x_offset(p.N), p.state_dims[p.N]) = m.G.col(j);
      cols.push_back(col);
    }
  }
  ConvexExpr::AffineBox box;
  box.g0 = g0;
  box.G = Mat::Zero(nz, cols.size());
  for (size_t j = 0; j < cols.size(); ++j) box.G.col(j) = cols[j];
  box.slo = Vec::Constant(cols.size(), -1.0);
  box.shi = Vec::Constant(cols.size(), 1.0);
  return box;
}

ConvexExpr::AffineBox objective_subdiff_w(const ControlProblem& p,
                                          const ParameterVector& w,
                                          const Vec& zbar) {
  const int nw = p.dim_w();
  Vec g0 = Vec::Zero(nw);
  std::vector<Vec> cols;
  for (int k = 0; k < p.N; ++k) {
    const Vec arg = p.stage_arg(k, zbar, w);
    const int zu = p.state_dims[k] + p.control_dims[k];
    auto m = p.stage_costs[k].subdiff_model(arg, zu, p.param_dims[k]);
    g0.segment(p.w_offset(k), p.param_dims[k]) += m.g0;
    for (int j = 0; j < m.G.cols(); ++j) {
      Vec col = Vec::Zero(nw);
      col.segment(p.w_offset(k), p.param_dims[k]) = m.G.col(j);
      cols.push_back(col);
    }
  }
  ConvexExpr::AffineBox box;
  box.g0 = g0;
  box.G = Mat::Zero(nw, cols.size());
  for (size_t j = 0; j < cols.size(); ++j) box.G.col(j) = cols[j];
  box.slo = Vec::Constant(cols.size(), -1.0);
  box.shi = Vec::Constant(cols.size(), 1.0);
  return box;
}

std::optional<FarkasCertificate> kkt_verify(const ControlProblem& p,
                                            const ParameterVector& w,
                                            const Solution& sol) {
  AssembledSystem sys = assemble_operators(p);
  const Vec z = sol.z(p);
  if ((sys.M * z - sys.T * w).lpNorm<Eigen::Infinity>() > Tol::feas)
    return std::nullopt;
  if (!sys.K.contains(z, Tol::feas)) return std::nullopt;

  const int ne = p.dim_xtilde() + sys.K.num_eq();
  Mat E(ne, p.dim_z());
  Vec beta(ne);
  E.topRows(p.dim_xtilde()) = sys.M;
  beta.head(p.dim_xtilde()) = sys.T * w;
  E.bottomRows(sys.K.num_eq()) = sys.K.E;
  beta.tail(sys.K.num_eq()) = sys.K.f;

  auto target = objective_subdiff_z(p, w, z);
  return farkas_certificate(sys.K.A, sys.K.b, E, beta, z, target);
}

}  // namespace ocsens
