// Acceptance gate: one line per criterion, nonzero exit on any failure.
// Every expected number is produced by the independent grid oracle or a
// closed-form hand derivation; the solver is never used to grade itself.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <vector>

#include "ocsens/json_io.hpp"
#include "ocsens/sensitivity.hpp"

using namespace ocsens;

namespace {

int failures = 0;

double now() {
  using clock = std::chrono::steady_clock;
  static const auto t0 = clock::now();
  return std::chrono::duration<double>(clock::now() - t0).count();
}

struct Criterion {
  int id;
  const char* title;
  double t_start;
  bool ok = true;
  std::string note;

  Criterion(int id_, const char* title_) : id(id_), title(title_), t_start(now()) {}
  void expect(bool cond, const std::string& what) {
    if (!cond && ok) note = what;
    ok = ok && cond;
  }
  ~Criterion() {
    std::printf("criterion %d: %s (%.2fs) %s%s%s\n", id, ok ? "PASS" : "FAIL",
                now() - t_start, title, note.empty() ? "" : " -- ",
                note.c_str());
    if (!ok) ++failures;
  }
};

ProblemFile p1() { return load_problem(OCSENS_PROBLEM_DIR "/p1.json"); }
ProblemFile p2() { return load_problem(OCSENS_PROBLEM_DIR "/p2.json"); }

Solution must_solve(const ProblemFile& f, Criterion& c) {
  SolveResult r = solve(f.problem, f.wbar);
  c.expect(r.status == SolveStatus::Optimal, "solver did not return OPTIMAL");
  return r.solution;
}

// ---------------------------------------------------------------------------
// Random instance generators

Mat rand_mat(std::mt19937& rng, int r, int cdim) {
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  Mat m(r, cdim);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < cdim; ++j) m(i, j) = U(rng);
  return m;
}

ConvexExpr rand_strictly_convex(std::mt19937& rng, int d) {
  Mat L = rand_mat(rng, d, d);
  Mat Q = L.transpose() * L + 0.1 * Mat::Identity(d, d);
  std::uniform_real_distribution<double> U(-0.5, 0.5);
  Vec q(d);
  for (int i = 0; i < d; ++i) q[i] = U(rng);
  return ConvexExpr(Q, q, 0.0);
}

// Smooth instance: strictly convex quadratics, wide boxes, N <= 3,
// per-stage dims <= 2, total parameter dimension kept small so the
// oracle grids stay cheap.
ControlProblem random_smooth(std::mt19937& rng) {
  ControlProblem p;
  p.N = 1 + static_cast<int>(rng() % 3);
  int wtotal = 0;
  for (int k = 0; k <= p.N; ++k)
    p.state_dims.push_back(1 + static_cast<int>(rng() % 2));
  for (int k = 0; k < p.N; ++k) {
    p.control_dims.push_back(1 + static_cast<int>(rng() % 2));
    const int pk = (wtotal < 3) ? 1 : 1;  // one parameter per stage
    p.param_dims.push_back(pk);
    wtotal += pk;
  }
  for (int k = 0; k < p.N; ++k) {
    p.A.push_back(rand_mat(rng, p.state_dims[k + 1], p.state_dims[k]));
    p.B.push_back(rand_mat(rng, p.state_dims[k + 1], p.control_dims[k]));
    p.T.push_back(rand_mat(rng, p.state_dims[k + 1], p.param_dims[k]));
    p.stage_costs.push_back(rand_strictly_convex(
        rng, p.state_dims[k] + p.control_dims[k] + p.param_dims[k]));
    p.control_sets.push_back(PolyhedralSet::box(
        Vec::Constant(p.control_dims[k], -10.0),
        Vec::Constant(p.control_dims[k], 10.0)));
  }
  p.terminal_cost = rand_strictly_convex(rng, p.state_dims[p.N]);
  p.initial_set = PolyhedralSet::box(Vec::Constant(p.state_dims[0], -10.0),
                                     Vec::Constant(p.state_dims[0], 10.0));
  return p;
}

OracleGrid oracle(const ControlProblem& p, const Vec& wbar, double radius,
                  int pts) {
  OracleGrid g;
  g.center = wbar;
  g.radii = Vec::Constant(p.dim_w(), radius);
  g.points_per_axis = pts;
  return grid_oracle(p, g);
}

// ---------------------------------------------------------------------------

void criterion1() {
  Criterion c(1, "reference problem 1 end-to-end");
  auto f = p1();
  Solution sol = must_solve(f, c);
  c.expect(std::abs(sol.x[0][0] + 0.4) <= 1e-6 &&
               std::abs(sol.x[1][0] + 0.8) <= 1e-6 &&
               std::abs(sol.u[0][0] - 0.4) <= 1e-6,
           "minimizer not (-0.4, -0.8, 0.4)");
  SensitivityReport rep = subdiff_V_smooth(f.problem, f.wbar, sol);
  c.expect(std::abs(rep.chain->xtilde[0][0] - 0.4) <= 1e-9, "xtilde*_1 != 0.4");
  c.expect(std::abs(rep.chain->x0star[0]) <= 1e-9, "x0* != 0");
  c.expect(std::abs(rep.chain->ustar[0][0]) <= 1e-9, "u*_0 != 0");
  c.expect(rep.subdiff_V.kind() == SetRep::Kind::Singleton &&
               std::abs(rep.subdiff_V.point()[0] - 1.3) <= 1e-9,
           "dV(0) != {1.3}");
  c.expect(now() - c.t_start < 1.0, "runtime over 1 s");
}

void criterion2() {
  Criterion c(2, "oracle finite-difference cross-check of the slope");
  auto f = p1();
  for (auto [h, tol] : {std::pair{1e-2, 5e-3}, std::pair{1e-3, 5e-4}}) {
    OracleGrid g = oracle(f.problem, f.wbar, h, 3);
    const double fd = (g.values[2] - g.values[0]) / (2 * h);
    c.expect(std::abs(fd - 1.3) <= tol,
             "central difference at step " + std::to_string(h) + " off: " +
                 std::to_string(fd));
  }
  c.expect(now() - c.t_start < 5.0, "runtime over 5 s");
}

void criterion3() {
  Criterion c(3, "interval outer estimate reproduces the hand bound");
  auto f = p2();
  Solution sol = must_solve(f, c);
  // Intermediate subdifferentials first.
  SetRep dN = f.problem.terminal_cost.subdiff(sol.x[2]);
  Vec lo, hi;
  bounding_box(dN, lo, hi);
  c.expect(lo[0] == -1.0 && hi[0] == 1.0, "d h2(0) != [-1, 1]");
  const Vec arg1 = f.problem.stage_arg(1, sol.z(f.problem), f.wbar);
  auto mx1 = f.problem.stage_costs[1].subdiff_model(arg1, 0, 1);
  bounding_box(mx1.to_set(), lo, hi);
  c.expect(lo[0] == -1.0 && hi[0] == 1.0, "d_x1 h1 != [-1, 1]");
  const Vec arg0 = f.problem.stage_arg(0, sol.z(f.problem), f.wbar);
  for (int off = 0; off < 3; ++off) {
    auto m = f.problem.stage_costs[0].subdiff_model(arg0, off, 1);
    c.expect(m.G.cols() == 0 && std::abs(m.g0[0]) <= 1e-9,
             "stage-0 partial not the zero singleton");
  }
  SensitivityReport rep =
      subdiff_V_outer(f.problem, f.wbar, sol, SensMode::OuterInterval);
  c.expect(rep.subdiff_V.kind() == SetRep::Kind::Box, "estimate not a box");
  if (rep.subdiff_V.kind() == SetRep::Kind::Box) {
    c.expect(rep.subdiff_V.lo().isApprox(Vec::Constant(2, -2.0), 0) &&
                 rep.subdiff_V.hi().isApprox(Vec::Constant(2, 2.0), 0),
             "box != [-2,2]x[-2,2]");
  }
}

void criterion4() {
  Criterion c(4, "projected polytope estimate is {0} x [-1, 1]");
  auto f = p2();
  // Confirm the analytic value function on the oracle grid first.
  OracleGrid g = oracle(f.problem, f.wbar, 0.5, 21);
  double worst = 0.0;
  for (int i = 0; i < g.num_points(); ++i) {
    const Vec w = g.point(i);
    const double analytic = 0.5 * w[0] * w[0] + std::abs(w[1]);
    worst = std::max(worst, std::abs(g.values[i] - analytic));
  }
  c.expect(worst <= 1e-6,
           "V != w0^2/2 + |w1| on the grid, worst " + std::to_string(worst));

  Solution sol = must_solve(f, c);
  SensitivityReport rep =
      subdiff_V_outer(f.problem, f.wbar, sol, SensMode::OuterPolytope);
  Mat V = rep.subdiff_V.vertex_list();
  Mat Tgt(2, 2);
  Tgt << 0, 0, -1, 1;
  double hausdorff = 0.0;
  auto dir_h = [](const Mat& A, const Mat& B) {
    double h = 0.0;
    for (int i = 0; i < A.cols(); ++i) {
      double best = kInf;
      for (int j = 0; j < B.cols(); ++j)
        best = std::min(best, (A.col(i) - B.col(j)).norm());
      h = std::max(h, best);
    }
    return h;
  };
  hausdorff = std::max(dir_h(V, Tgt), dir_h(Tgt, V));
  c.expect(hausdorff <= 1e-8,
           "Hausdorff distance " + std::to_string(hausdorff));

  // (i) contained in the interval box.
  SensitivityReport ib =
      subdiff_V_outer(f.problem, f.wbar, sol, SensMode::OuterInterval);
  for (int j = 0; j < V.cols(); ++j)
    c.expect(ib.subdiff_V.contains_point(V.col(j), 1e-9),
             "vertex escapes the interval box");
  // (ii) contains the finite-difference-sampled limiting gradients.
  for (double s : {0.05, -0.05}) {
    Vec w(2);
    w << 0.0, s;
    const double h = 1e-5;
    Vec fd(2);
    for (int a = 0; a < 2; ++a) {
      Vec wp = w, wm = w;
      wp[a] += h;
      wm[a] -= h;
      fd[a] = (optimal_value(f.problem, wp) - optimal_value(f.problem, wm)) /
              (2 * h);
    }
    c.expect(rep.subdiff_V.contains_point(fd, 1e-6),
             "FD subgradient outside the estimate");
  }
  // (iii) every vertex passes the subgradient inequality on the grid.
  CheckReport chk = oracle_check_set(rep.subdiff_V, f.wbar, 0.0, g);
  c.expect(chk.pass && chk.worst_margin >= -1e-6,
           "vertex fails the subgradient inequality");
}

void criterion5() {
  Criterion c(5, "singular subdifferential is always the zero singleton");
  for (auto f : {p1(), p2()}) {
    Solution sol = must_solve(f, c);
    SetRep s = singular_subdiff_V(f.problem, f.wbar, sol);
    c.expect(s.kind() == SetRep::Kind::Singleton && s.point().norm() == 0.0,
             "fixture singular subdifferential not {0}");
  }
  std::mt19937 rng(20240817);
  for (int t = 0; t < 20; ++t) {
    ControlProblem p = random_smooth(rng);
    Vec wbar = Vec::Zero(p.dim_w());
    SolveResult r = solve(p, wbar);
    c.expect(r.status == SolveStatus::Optimal, "random instance unsolved");
    if (r.status != SolveStatus::Optimal) continue;
    SetRep s = singular_subdiff_V(p, wbar, r.solution);
    c.expect(s.kind() == SetRep::Kind::Singleton && s.point().norm() == 0.0,
             "random singular subdifferential not {0}");
  }
}

void criterion6() {
  Criterion c(6, "kernel-inclusion regularity checks");
  {
    auto f = p1();
    RegularityReport reg =
        check_regularity(f.problem, assemble_operators(f.problem));
    c.expect(reg.ker_T_star_basis.empty(), "p1 ker T* not {0}");
    c.expect(reg.ker_M_star_basis.empty(), "p1 ker M* not {0}");
    c.expect(reg.holds(), "p1 regularity should hold");
  }
  {
    auto f = p2();
    RegularityReport reg =
        check_regularity(f.problem, assemble_operators(f.problem));
    c.expect(reg.ker_T_star_basis.empty() && reg.ker_M_star_basis.empty(),
             "p2 kernels not trivial");
    c.expect(reg.holds(), "p2 regularity should hold");
  }
  {
    auto f = p1();
    f.problem.T[0] = Mat::Zero(1, 1);
    RegularityReport reg =
        check_regularity(f.problem, assemble_operators(f.problem));
    c.expect(!reg.kernel_inclusion_holds, "T = 0 must break the inclusion");
  }
}

void criterion7() {
  Criterion c(7, "property suite on random smooth instances");
  std::mt19937 rng(7451);
  std::normal_distribution<double> N01(0.0, 1.0);
  for (int t = 0; t < 50; ++t) {
    ControlProblem p = random_smooth(rng);
    const int dw = p.dim_w();
    Vec wbar = Vec::Zero(dw);
    SolveResult r = solve(p, wbar);
    c.expect(r.status == SolveStatus::Optimal, "instance unsolved");
    if (r.status != SolveStatus::Optimal) continue;
    SensitivityReport rep = subdiff_V_smooth(p, wbar, r.solution);
    const Vec ws = rep.subdiff_V.point();

    OracleGrid g = oracle(p, wbar, 0.1, 3);
    CheckReport chk = subgradient_inequality_check(wbar, r.value, ws, g);
    c.expect(chk.pass, "w* fails the subgradient inequality");

    // One-sided difference along a random direction, Richardson step.
    Vec d(dw);
    for (int i = 0; i < dw; ++i) d[i] = N01(rng);
    d.normalize();
    const double h = 1e-4;
    auto slope = [&](double step) {
      return (optimal_value(p, (wbar + step * d).eval()) - r.value) / step;
    };
    const double fd = 2.0 * slope(h) - slope(2 * h);
    c.expect(std::abs(fd - ws.dot(d)) <= 1e-3,
             "directional slope off by " + std::to_string(fd - ws.dot(d)));

    AssembledSystem sys = assemble_operators(p);
    const Vec zbar = r.solution.z(p);
    c.expect(membership_general(p, sys, zbar, wbar, ws) == Membership::Member,
             "w* rejected by the membership test");
    Vec u(dw);
    for (int i = 0; i < dw; ++i) u[i] = N01(rng);
    u.normalize();
    const Vec cand = ws + 0.1 * u;
    const bool fd_rejects = !subgradient_inequality_check(wbar, r.value, cand, g).pass;
    if (fd_rejects)
      c.expect(membership_general(p, sys, zbar, wbar, cand) ==
                   Membership::NotMember,
               "perturbed candidate accepted despite oracle rejection");
  }
  c.expect(now() - c.t_start < 60.0, "runtime over 60 s");
}

void criterion8() {
  Criterion c(8, "KKT certificate agrees with brute-force grid search");
  std::mt19937 rng(99331);
  for (int t = 0; t < 30; ++t) {
    // One-step problem, z = (x0, x1, u0) with m in {1, 2} (z-dim <= 4).
    ControlProblem p;
    p.N = 1;
    const int m = 1 + static_cast<int>(rng() % 2);
    p.state_dims = {1, 1};
    p.control_dims = {m};
    p.param_dims = {1};
    p.A.push_back(rand_mat(rng, 1, 1));
    p.B.push_back(rand_mat(rng, 1, m));
    p.T.push_back(rand_mat(rng, 1, 1));
    p.initial_set = PolyhedralSet::box(Vec::Constant(1, -1.0), Vec::Ones(1));
    p.control_sets.push_back(
        PolyhedralSet::box(Vec::Constant(m, -1.0), Vec::Ones(m)));

    // Target trajectory anchored at a grid point of the 0.5-spaced lattice.
    const int pts = 5;
    auto lattice = [&](int i) { return -1.0 + 0.5 * i; };
    Vec x0hat = Vec::Constant(1, lattice(static_cast<int>(rng() % pts)));
    Vec uhat(m);
    for (int i = 0; i < m; ++i) uhat[i] = lattice(static_cast<int>(rng() % pts));
    Vec wbar = Vec::Zero(1);
    Vec x1hat = p.A[0] * x0hat + p.B[0] * uhat;

    const int d0 = 1 + m + 1;
    Mat Q0 = Mat::Zero(d0, d0);
    Q0.topLeftCorner(1 + m, 1 + m) = Mat::Identity(1 + m, 1 + m);
    Vec q0 = Vec::Zero(d0);
    q0[0] = -x0hat[0];
    q0.segment(1, m) = -uhat;
    p.stage_costs.push_back(ConvexExpr(Q0, q0, 0.0));
    p.terminal_cost = ConvexExpr(Mat::Identity(1, 1), -x1hat, 0.0);

    // Brute-force search over the simulated lattice.
    double best = kInf;
    std::vector<std::pair<Solution, double>> grid;
    std::vector<int> idx(1 + m, 0);
    const int total = static_cast<int>(std::pow(pts, 1 + m));
    for (int flat = 0; flat < total; ++flat) {
      int rem = flat;
      Vec x0 = Vec::Constant(1, lattice(rem % pts));
      rem /= pts;
      Vec u(m);
      for (int i = 0; i < m; ++i) {
        u[i] = lattice(rem % pts);
        rem /= pts;
      }
      Solution s;
      s.u = {u};
      s.x = p.simulate(x0, s.u, wbar);
      const double v = evaluate_objective(p, s, wbar);
      grid.emplace_back(s, v);
      best = std::min(best, v);
    }
    for (auto& [s, v] : grid) {
      const bool accepted = kkt_verify(p, wbar, s).has_value();
      const bool is_min = v <= best + 1e-4;
      c.expect(accepted == is_min,
               accepted ? "suboptimal grid point accepted"
                        : "grid minimizer rejected");
    }
  }
}

}  // namespace

int main() {
  criterion1();
  criterion2();
  criterion3();
  criterion4();
  criterion5();
  criterion6();
  criterion7();
  criterion8();
  if (failures) std::printf("%d criterion(s) FAILED\n", failures);
  return failures;
}
