#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ocsens/json_io.hpp"
#include "ocsens/solver.hpp"

using namespace ocsens;

namespace {

ProblemFile p1() { return load_problem(OCSENS_PROBLEM_DIR "/p1.json"); }
ProblemFile p2() { return load_problem(OCSENS_PROBLEM_DIR "/p2.json"); }

}  // namespace

TEST_CASE("p1 minimizer and value") {
  auto f = p1();
  SolveResult r = solve(f.problem, f.wbar);
  REQUIRE(r.status == SolveStatus::Optimal);
  CHECK(r.solution.x[0][0] == doctest::Approx(-0.4).epsilon(1e-6));
  CHECK(r.solution.x[1][0] == doctest::Approx(-0.8).epsilon(1e-6));
  CHECK(r.solution.u[0][0] == doctest::Approx(0.4).epsilon(1e-6));
  CHECK(r.value == doctest::Approx(0.2).epsilon(1e-8));
  REQUIRE(r.kkt.has_value());
  CHECK(r.kkt->residual <= Tol::kkt_residual);
}

TEST_CASE("p2 minimizer and value") {
  auto f = p2();
  SolveResult r = solve(f.problem, f.wbar);
  REQUIRE(r.status == SolveStatus::Optimal);
  CHECK(r.value == doctest::Approx(0.0).epsilon(1e-8));
  const Vec z = r.solution.z(f.problem);
  Vec zbar(5);
  zbar << -1, 1, 0, 1, 1;  // (x0, x1, x2, u0, u1)
  CHECK((z - zbar).lpNorm<Eigen::Infinity>() == doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("infeasible initial set reported as +inf") {
  auto f = p1();
  // C = { x <= 2 } and { x >= 5 } simultaneously.
  f.problem.initial_set.A.conservativeResize(2, 1);
  f.problem.initial_set.A(1, 0) = -1.0;
  f.problem.initial_set.b.conservativeResize(2);
  f.problem.initial_set.b[1] = -5.0;
  CHECK(optimal_value(f.problem, f.wbar) == kInf);
}

TEST_CASE("linear drift with no curvature is unbounded below") {
  auto f = p1();
  // Replace the costs with a pure linear pull on u.
  f.problem.stage_costs[0] = ConvexExpr(Mat::Zero(3, 3), Vec::Zero(3), 0.0);
  Vec q(3);
  q << 0, 1, 0;  // reward u -> -inf? u is bounded below, use +u with u free
  f.problem.stage_costs[0] = ConvexExpr(Mat::Zero(3, 3), q, 0.0);
  f.problem.terminal_cost = ConvexExpr(Mat::Zero(1, 1), Vec::Zero(1), 0.0);
  f.problem.control_sets[0] = PolyhedralSet::whole_space(1);
  CHECK(optimal_value(f.problem, f.wbar) == -kInf);
}

TEST_CASE("grid oracle centers on V(wbar) and stays convex on the line") {
  auto f = p1();
  OracleGrid g;
  g.center = f.wbar;
  g.radii = Vec::Constant(1, 0.1);
  g.points_per_axis = 5;
  g = grid_oracle(f.problem, g);
  REQUIRE(g.filled());
  CHECK(g.values[2] == doctest::Approx(0.2).epsilon(1e-8));
  // Midpoint convexity along the sweep.
  for (int i = 1; i + 1 < 5; ++i)
    CHECK(g.values[i] <= 0.5 * (g.values[i - 1] + g.values[i + 1]) + 1e-9);
}

TEST_CASE("subgradient inequality screen separates good and bad slopes") {
  auto f = p1();
  OracleGrid g;
  g.center = f.wbar;
  g.radii = Vec::Constant(1, 0.2);
  g.points_per_axis = 9;
  g = grid_oracle(f.problem, g);
  auto good = subgradient_inequality_check(f.wbar, 0.2, Vec::Constant(1, 1.3), g);
  CHECK(good.pass);
  CHECK(good.worst_margin >= -1e-6);
  auto bad = subgradient_inequality_check(f.wbar, 0.2, Vec::Constant(1, 5.0), g);
  CHECK(!bad.pass);
}

TEST_CASE("kkt_verify accepts the optimum and rejects feasible suboptima") {
  auto f = p1();
  SolveResult r = solve(f.problem, f.wbar);
  REQUIRE(r.status == SolveStatus::Optimal);
  CHECK(kkt_verify(f.problem, f.wbar, r.solution).has_value());

  // A feasible but suboptimal trajectory: start at 0, control 0.
  Solution bad;
  bad.x = {Vec::Zero(1), Vec::Zero(1)};
  bad.u = {Vec::Zero(1)};
  CHECK(!kkt_verify(f.problem, f.wbar, bad).has_value());
}

TEST_CASE("p2 objective subdifferential models at the reference point") {
  auto f = p2();
  SolveResult r = solve(f.problem, f.wbar);
  REQUIRE(r.status == SolveStatus::Optimal);
  const Vec zbar = r.solution.z(f.problem);
  // d_w f(zbar, .): w0 enters smoothly (derivative 0 at wbar = 0), |w1|
  // sits on its kink, so the model is {0} x [-1, 1].
  auto mw = objective_subdiff_w(f.problem, f.wbar, zbar);
  SetRep sw = mw.to_set();
  Vec lo, hi;
  bounding_box(sw, lo, hi);
  CHECK(lo[0] == doctest::Approx(0.0));
  CHECK(hi[0] == doctest::Approx(0.0));
  CHECK(lo[1] == doctest::Approx(-1.0));
  CHECK(hi[1] == doctest::Approx(1.0));
  // d_z f: |x1 - 1| and |x2| both at kinks, quadratic term flat at zbar
  // because x0 + u0 = 0.
  auto mz = objective_subdiff_z(f.problem, f.wbar, zbar);
  CHECK(mz.G.cols() == 2);
  CHECK(mz.g0.lpNorm<Eigen::Infinity>() == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("solver tracks parameter shifts of p1 smoothly") {
  auto f = p1();
  const double h = 1e-3;
  const double v0 = optimal_value(f.problem, Vec::Constant(1, -h));
  const double v1 = optimal_value(f.problem, Vec::Zero(1));
  const double v2 = optimal_value(f.problem, Vec::Constant(1, h));
  // Central difference approximates the known slope 1.3.
  CHECK((v2 - v0) / (2 * h) == doctest::Approx(1.3).epsilon(1e-4));
  CHECK(v1 == doctest::Approx(0.2).epsilon(1e-8));
}

TEST_CASE("objective trace is non-increasing") {
  auto f = p1();
  SolveResult r = solve(f.problem, f.wbar);
  REQUIRE(r.status == SolveStatus::Optimal);
  for (size_t i = 1; i < r.objective_trace.size(); ++i)
    CHECK(r.objective_trace[i] <= r.objective_trace[i - 1] + 1e-10);
}

TEST_CASE("value matches brute force over the reduced variables") {
  auto f = p1();
  SolveResult r = solve(f.problem, f.wbar);
  REQUIRE(r.status == SolveStatus::Optimal);
  // Coarse pass over feasible (x0, u0), then a fine pass near the argmin.
  auto objective = [&](double x0, double u0) {
    Solution s;
    s.u = {Vec::Constant(1, u0)};
    s.x = f.problem.simulate(Vec::Constant(1, x0), s.u, f.wbar);
    return evaluate_objective(f.problem, s, f.wbar);
  };
  double bx = 0, bu = 0, best = kInf;
  for (double x0 = -3.0; x0 <= 2.0; x0 += 0.05)
    for (double u0 = -1.0; u0 <= 2.0; u0 += 0.05)
      if (double v = objective(x0, u0); v < best) best = v, bx = x0, bu = u0;
  for (double x0 = bx - 0.05; x0 <= bx + 0.05; x0 += 0.002)
    for (double u0 = bu - 0.05; u0 <= bu + 0.05; u0 += 0.002) {
      if (x0 > 2.0 || u0 < -1.0) continue;
      best = std::min(best, objective(x0, u0));
    }
  CHECK(r.value == doctest::Approx(best).epsilon(1e-4));
  CHECK(r.value <= best + 1e-12);  // solver can only do better
}
