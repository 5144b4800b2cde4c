#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ocsens/lp.hpp"

using namespace ocsens;

TEST_CASE("1d bounded minimum sits at the lower bound") {
  LinearProgram lp;
  lp.c = Vec::Ones(1);
  lp.lb = Vec::Constant(1, -3.0);
  lp.ub = Vec::Constant(1, 5.0);
  auto r = solve_lp(lp);
  REQUIRE(r.status == LpStatus::Optimal);
  CHECK(r.x[0] == doctest::Approx(-3.0));
  CHECK(r.objective == doctest::Approx(-3.0));
}

TEST_CASE("free variables, equality rows") {
  // min x + y  s.t.  x + y = 1, x - y <= 0  => x = y = 1/2 not needed:
  // objective constant 1 on the equality line; any feasible point works.
  LinearProgram lp;
  lp.c = Vec::Ones(2);
  lp.A_eq = Mat::Zero(1, 2);
  lp.A_eq << 1, 1;
  lp.b_eq = Vec::Ones(1);
  lp.A_ub = Mat::Zero(1, 2);
  lp.A_ub << 1, -1;
  lp.b_ub = Vec::Zero(1);
  auto r = solve_lp(lp);
  REQUIRE(r.status == LpStatus::Optimal);
  CHECK(r.objective == doctest::Approx(1.0));
  CHECK(r.x.sum() == doctest::Approx(1.0));
  CHECK(r.x[0] <= r.x[1] + 1e-9);
}

TEST_CASE("classic 2d polytope vertex optimum") {
  // max x + 2y  s.t.  x + y <= 4, x <= 3, y <= 2, x, y >= 0  => (2, 2).
  LinearProgram lp;
  lp.c = Vec(2);
  lp.c << -1, -2;
  lp.A_ub = Mat(3, 2);
  lp.A_ub << 1, 1, 1, 0, 0, 1;
  lp.b_ub = Vec(3);
  lp.b_ub << 4, 3, 2;
  lp.lb = Vec::Zero(2);
  lp.ub = Vec::Constant(2, kInf);
  auto r = solve_lp(lp);
  REQUIRE(r.status == LpStatus::Optimal);
  CHECK(r.x[0] == doctest::Approx(2.0));
  CHECK(r.x[1] == doctest::Approx(2.0));
}

TEST_CASE("infeasible system detected") {
  LinearProgram lp;
  lp.c = Vec::Zero(1);
  lp.A_ub = Mat(2, 1);
  lp.A_ub << 1, -1;
  lp.b_ub = Vec(2);
  lp.b_ub << -1, -1;  // x <= -1 and x >= 1
  auto r = solve_lp(lp);
  CHECK(r.status == LpStatus::Infeasible);
}

TEST_CASE("unbounded ray detected") {
  LinearProgram lp;
  lp.c = Vec::Constant(1, -1.0);
  lp.lb = Vec::Zero(1);
  lp.ub = Vec::Constant(1, kInf);
  auto r = solve_lp(lp);
  CHECK(r.status == LpStatus::Unbounded);
}

TEST_CASE("redundant equality rows do not break phase 1") {
  LinearProgram lp;
  lp.c = Vec::Ones(2);
  lp.A_eq = Mat(2, 2);
  lp.A_eq << 1, 1, 2, 2;  // duplicate constraint
  lp.b_eq = Vec(2);
  lp.b_eq << 1, 2;
  lp.lb = Vec::Zero(2);
  lp.ub = Vec::Constant(2, kInf);
  auto r = solve_lp(lp);
  REQUIRE(r.status == LpStatus::Optimal);
  CHECK(r.x.sum() == doctest::Approx(1.0));
}

TEST_CASE("degenerate vertex does not cycle (Bland)") {
  // Klee-Minty style small instance with degenerate pivots.
  LinearProgram lp;
  lp.c = Vec(3);
  lp.c << -100, -10, -1;
  lp.A_ub = Mat(3, 3);
  lp.A_ub << 1, 0, 0, 20, 1, 0, 200, 20, 1;
  lp.b_ub = Vec(3);
  lp.b_ub << 1, 100, 10000;
  lp.lb = Vec::Zero(3);
  lp.ub = Vec::Constant(3, kInf);
  auto r = solve_lp(lp);
  REQUIRE(r.status == LpStatus::Optimal);
  CHECK(r.objective == doctest::Approx(-10000.0));
}

TEST_CASE("linf_residual: consistent system fits exactly") {
  Mat M(2, 2);
  M << 1, 0, 0, 1;
  Vec t(2);
  t << 0.5, -0.25;
  Vec lb = Vec::Constant(2, -1.0), ub = Vec::Constant(2, 1.0);
  Vec y;
  double r = linf_residual(M, t, lb, ub, Mat(), Vec(), &y);
  CHECK(r == doctest::Approx(0.0).epsilon(1e-9));
  CHECK((y - t).norm() == doctest::Approx(0.0).epsilon(1e-8));
}

TEST_CASE("linf_residual: bound-limited fit has the right residual") {
  // y in [0, 1], target 2 => residual 1 at y = 1.
  Mat M = Mat::Ones(1, 1);
  Vec t = Vec::Constant(1, 2.0);
  double r = linf_residual(M, t, Vec::Zero(1), Vec::Ones(1));
  CHECK(r == doctest::Approx(1.0));
}

TEST_CASE("linf_residual: infeasible side constraints give +inf") {
  // Equality y = 5 contradicts y in [0, 1].
  Mat M = Mat::Ones(1, 1);
  Vec t = Vec::Zero(1);
  double r = linf_residual(M, t, Vec::Zero(1), Vec::Ones(1),
                           Mat::Ones(1, 1), Vec::Constant(1, 5.0));
  CHECK(r == kInf);
}
