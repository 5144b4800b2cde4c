#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ocsens/json_io.hpp"
#include "ocsens/sensitivity.hpp"

using namespace ocsens;

namespace {

ProblemFile p1() { return load_problem(OCSENS_PROBLEM_DIR "/p1.json"); }
ProblemFile p2() { return load_problem(OCSENS_PROBLEM_DIR "/p2.json"); }

Solution solved(const ProblemFile& f) {
  SolveResult r = solve(f.problem, f.wbar);
  REQUIRE(r.status == SolveStatus::Optimal);
  return r.solution;
}

}  // namespace

TEST_CASE("p1 smooth chain and exact subdifferential") {
  auto f = p1();
  Solution sol = solved(f);
  SensitivityReport rep = subdiff_V_smooth(f.problem, f.wbar, sol);
  REQUIRE(rep.chain.has_value());
  CHECK(rep.chain->xtilde[0][0] == doctest::Approx(0.4).epsilon(1e-9));
  CHECK(rep.chain->x0star[0] == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(rep.chain->ustar[0][0] == doctest::Approx(0.0).epsilon(1e-9));
  REQUIRE(rep.subdiff_V.kind() == SetRep::Kind::Singleton);
  CHECK(rep.subdiff_V.point()[0] == doctest::Approx(1.3).epsilon(1e-9));
  CHECK(!rep.error.has_value());
  for (const auto& [name, ok] : rep.cone_checks) CHECK(ok);
  CHECK(rep.singular_subdiff_V.point().norm() == 0.0);
}

TEST_CASE("nonsmooth point raises NotSmoothError") {
  auto f = p2();
  Solution sol = solved(f);
  CHECK_THROWS_AS(subdiff_V_smooth(f.problem, f.wbar, sol), NotSmoothError);
}

TEST_CASE("p2 interval mode reproduces the hand bound") {
  auto f = p2();
  Solution sol = solved(f);
  SensitivityReport rep =
      subdiff_V_outer(f.problem, f.wbar, sol, SensMode::OuterInterval);
  REQUIRE(rep.subdiff_V.kind() == SetRep::Kind::Box);
  CHECK(rep.subdiff_V.lo()[0] == doctest::Approx(-2.0));
  CHECK(rep.subdiff_V.hi()[0] == doctest::Approx(2.0));
  CHECK(rep.subdiff_V.lo()[1] == doctest::Approx(-2.0));
  CHECK(rep.subdiff_V.hi()[1] == doctest::Approx(2.0));
  CHECK(!rep.empty_estimate);
}

TEST_CASE("p2 polytope mode tightens to {0} x [-1, 1]") {
  auto f = p2();
  Solution sol = solved(f);
  SensitivityReport rep =
      subdiff_V_outer(f.problem, f.wbar, sol, SensMode::OuterPolytope);
  CHECK(!rep.interval_fallback);
  CHECK(!rep.empty_estimate);
  const SetRep& S = rep.subdiff_V;
  // Support function of {0} x [-1, 1] in the four axis directions.
  Vec d = Vec::Zero(2);
  d[0] = 1;
  CHECK(S.support(d) == doctest::Approx(0.0).epsilon(1e-8));
  CHECK(S.support((-d).eval()) == doctest::Approx(0.0).epsilon(1e-8));
  d.setZero();
  d[1] = 1;
  CHECK(S.support(d) == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(S.support((-d).eval()) == doctest::Approx(1.0).epsilon(1e-8));
  // Contained in the interval bound.
  SensitivityReport ib =
      subdiff_V_outer(f.problem, f.wbar, sol, SensMode::OuterInterval);
  Mat V = S.vertex_list();
  for (int j = 0; j < V.cols(); ++j)
    CHECK(ib.subdiff_V.contains_point(V.col(j), 1e-9));
}

TEST_CASE("regularity kernels on both fixtures and a broken variant") {
  auto f = p1();
  AssembledSystem sys = assemble_operators(f.problem);
  RegularityReport reg = check_regularity(f.problem, sys);
  CHECK(reg.holds());
  CHECK(reg.ker_T_star_basis.empty());  // ker T* = {0}
  CHECK(reg.ker_M_star_basis.empty());
  CHECK(reg.surjectivity_shortcut[0]);

  auto g = p2();
  AssembledSystem sys2 = assemble_operators(g.problem);
  RegularityReport reg2 = check_regularity(g.problem, sys2);
  CHECK(reg2.holds());
  CHECK(reg2.ker_T_star_basis.empty());

  // T = 0 keeps M = I full rank but kills the kernel inclusion.
  auto h = p1();
  h.problem.T[0] = Mat::Zero(1, 1);
  AssembledSystem sys3 = assemble_operators(h.problem);
  RegularityReport reg3 = check_regularity(h.problem, sys3);
  CHECK(!reg3.kernel_inclusion_holds);
  CHECK(!reg3.holds());
  CHECK(!reg3.surjectivity_shortcut[0]);
}

TEST_CASE("membership test on p1 separates the true slope") {
  auto f = p1();
  Solution sol = solved(f);
  AssembledSystem sys = assemble_operators(f.problem);
  const Vec zbar = sol.z(f.problem);
  CHECK(membership_general(f.problem, sys, zbar, f.wbar,
                           Vec::Constant(1, 1.3)) == Membership::Member);
  CHECK(membership_general(f.problem, sys, zbar, f.wbar,
                           Vec::Constant(1, 2.0)) == Membership::NotMember);
  CHECK(membership_general(f.problem, sys, zbar, f.wbar,
                           Vec::Constant(1, 0.0)) == Membership::NotMember);
}

TEST_CASE("membership test on p2 matches the projected polytope") {
  auto f = p2();
  Solution sol = solved(f);
  AssembledSystem sys = assemble_operators(f.problem);
  const Vec zbar = sol.z(f.problem);
  Vec in(2), out(2);
  in << 0.0, 0.5;
  out << 0.5, 0.0;
  CHECK(membership_general(f.problem, sys, zbar, f.wbar, in) ==
        Membership::Member);
  CHECK(membership_general(f.problem, sys, zbar, f.wbar, out) ==
        Membership::NotMember);
}

TEST_CASE("polytope vertices pass the oracle margin screen") {
  auto f = p2();
  Solution sol = solved(f);
  SensitivityReport rep =
      subdiff_V_outer(f.problem, f.wbar, sol, SensMode::OuterPolytope);
  OracleGrid g;
  g.center = f.wbar;
  g.radii = Vec::Constant(2, 0.5);
  g.points_per_axis = 7;
  g = grid_oracle(f.problem, g);
  CheckReport chk = oracle_check_set(rep.subdiff_V, f.wbar, 0.0, g);
  CHECK(chk.pass);
  CHECK(chk.worst_margin >= -1e-6);
}

TEST_CASE("singular subdifferential is the zero singleton") {
  for (auto f : {p1(), p2()}) {
    Solution sol = solved(f);
    SetRep s = singular_subdiff_V(f.problem, f.wbar, sol);
    REQUIRE(s.kind() == SetRep::Kind::Singleton);
    CHECK(s.point().norm() == 0.0);
  }
}

TEST_CASE("outer modes collapse to the smooth singleton on p1") {
  auto f = p1();
  Solution sol = solved(f);
  for (SensMode m : {SensMode::OuterInterval, SensMode::OuterPolytope}) {
    SensitivityReport rep = subdiff_V_outer(f.problem, f.wbar, sol, m);
    REQUIRE(rep.subdiff_V.kind() == SetRep::Kind::Singleton);
    CHECK(rep.subdiff_V.point()[0] == doctest::Approx(1.3).epsilon(1e-9));
  }
}

TEST_CASE("membership is sharp around the smooth singleton") {
  auto f = p1();
  Solution sol = solved(f);
  AssembledSystem sys = assemble_operators(f.problem);
  const Vec zbar = sol.z(f.problem);
  CHECK(membership_general(f.problem, sys, zbar, f.wbar,
                           Vec::Constant(1, 1.3 + 1e-5)) ==
        Membership::NotMember);
  CHECK(membership_general(f.problem, sys, zbar, f.wbar,
                           Vec::Constant(1, 1.3 - 1e-5)) ==
        Membership::NotMember);
}

TEST_CASE("w* scales linearly with the parameter map") {
  // Costs independent of w: the smooth chain's w* is T_k' xtilde*_{k+1},
  // linear in T. Scale T by c and compare.
  auto build = [](double c) {
    ControlProblem p;
    p.N = 2;
    p.state_dims = {1, 1, 1};
    p.control_dims = {1, 1};
    p.param_dims = {1, 1};
    for (int k = 0; k < 2; ++k) {
      p.A.push_back(Mat::Constant(1, 1, 0.8));
      p.B.push_back(Mat::Constant(1, 1, 1.0));
      p.T.push_back(Mat::Constant(1, 1, c * (k + 1.0)));
      Mat Q = Mat::Identity(3, 3);
      Q(2, 2) = 0.0;  // no w dependence
      Vec q = Vec::Zero(3);
      q[0] = 0.3;
      p.stage_costs.push_back(ConvexExpr(Q, q, 0.0));
      p.control_sets.push_back(PolyhedralSet::whole_space(1));
    }
    p.terminal_cost = ConvexExpr(Mat::Identity(1, 1), Vec::Ones(1), 0.0);
    p.initial_set = PolyhedralSet::whole_space(1);
    return p;
  };
  Vec wbar = Vec::Zero(2);
  ControlProblem p1x = build(1.0), p25x = build(2.5);
  SolveResult r1 = solve(p1x, wbar);
  SolveResult r2 = solve(p25x, wbar);
  REQUIRE(r1.status == SolveStatus::Optimal);
  REQUIRE(r2.status == SolveStatus::Optimal);
  Vec w1 = subdiff_V_smooth(p1x, wbar, r1.solution).subdiff_V.point();
  Vec w2 = subdiff_V_smooth(p25x, wbar, r2.solution).subdiff_V.point();
  CHECK((w2 - 2.5 * w1).lpNorm<Eigen::Infinity>() ==
        doctest::Approx(0.0).epsilon(1e-9));
}
