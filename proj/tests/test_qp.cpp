#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "ocsens/qp.hpp"

using namespace ocsens;

TEST_CASE("unconstrained strictly convex QP hits the Newton point") {
  Mat P(2, 2);
  P << 2, 0, 0, 4;
  Vec r(2);
  r << -2, -8;  // minimizer (1, 2)
  auto res = solve_qp(P, r, Mat::Zero(0, 2), Vec::Zero(0), Vec::Zero(2));
  REQUIRE(res.status == QpStatus::Optimal);
  CHECK(res.y[0] == doctest::Approx(1.0));
  CHECK(res.y[1] == doctest::Approx(2.0));
}

TEST_CASE("active bound pins the solution") {
  // min 1/2 x^2 - 3x  s.t.  x <= 1: unconstrained min 3, clipped to 1.
  Mat P = Mat::Identity(1, 1);
  Vec r = Vec::Constant(1, -3.0);
  Mat G = Mat::Ones(1, 1);
  Vec g = Vec::Ones(1);
  auto res = solve_qp(P, r, G, g, Vec::Zero(1));
  REQUIRE(res.status == QpStatus::Optimal);
  CHECK(res.y[0] == doctest::Approx(1.0));
}

TEST_CASE("constraint drop: start at the wrong vertex") {
  // min (x-2)^2 + (y-2)^2 over the unit box, started at the origin with
  // both bounds inactive; optimum is the corner (1, 1).
  Mat P = 2 * Mat::Identity(2, 2);
  Vec r = Vec::Constant(2, -4.0);
  Mat G(4, 2);
  G << 1, 0, 0, 1, -1, 0, 0, -1;
  Vec g(4);
  g << 1, 1, 0, 0;
  auto res = solve_qp(P, r, G, g, Vec::Zero(2));
  REQUIRE(res.status == QpStatus::Optimal);
  CHECK(res.y[0] == doctest::Approx(1.0));
  CHECK(res.y[1] == doctest::Approx(1.0));
  // Monotone objective trace.
  for (size_t i = 1; i < res.objective_trace.size(); ++i)
    CHECK(res.objective_trace[i] <= res.objective_trace[i - 1] + 1e-10);
}

TEST_CASE("singular P with bounded flat direction") {
  // min 1/2 x^2 + y  s.t.  y >= -1, |x| <= 2: flat in y, optimum y = -1.
  Mat P = Mat::Zero(2, 2);
  P(0, 0) = 1.0;
  Vec r(2);
  r << 0, 1;
  Mat G(3, 2);
  G << 0, -1, 1, 0, -1, 0;
  Vec g(3);
  g << 1, 2, 2;
  auto res = solve_qp(P, r, G, g, Vec::Zero(2));
  REQUIRE(res.status == QpStatus::Optimal);
  CHECK(res.y[0] == doctest::Approx(0.0));
  CHECK(res.y[1] == doctest::Approx(-1.0));
}

TEST_CASE("singular P with unbounded flat direction") {
  Mat P = Mat::Zero(1, 1);
  Vec r = Vec::Ones(1);
  auto res = solve_qp(P, r, Mat::Zero(0, 1), Vec::Zero(0), Vec::Zero(1));
  CHECK(res.status == QpStatus::Unbounded);
}

TEST_CASE("random strictly convex QPs agree with projection") {
  // min 1/2 |y - t|^2 over a box is the clamp of t; cross-check 25 cases.
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> U(-2.0, 2.0);
  for (int trial = 0; trial < 25; ++trial) {
    const int d = 1 + trial % 3;
    Vec t(d);
    for (int i = 0; i < d; ++i) t[i] = U(rng);
    Mat G(2 * d, d);
    G.setZero();
    Vec g(2 * d);
    for (int i = 0; i < d; ++i) {
      G(2 * i, i) = 1.0;
      g[2 * i] = 1.0;
      G(2 * i + 1, i) = -1.0;
      g[2 * i + 1] = 1.0;
    }
    auto res = solve_qp(Mat::Identity(d, d), -t, G, g, Vec::Zero(d));
    REQUIRE(res.status == QpStatus::Optimal);
    for (int i = 0; i < d; ++i)
      CHECK(res.y[i] ==
            doctest::Approx(std::clamp(t[i], -1.0, 1.0)).epsilon(1e-8));
  }
}
