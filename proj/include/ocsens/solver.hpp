#pragma once

#include <optional>

#include "ocsens/farkas.hpp"
#include "ocsens/model.hpp"
#include "ocsens/types.hpp"

namespace ocsens {

enum class SolveStatus { Optimal, Infeasible, Unbounded, MaxIter };

struct SolveResult {
  SolveStatus status = SolveStatus::MaxIter;
  Solution solution;
  double value = 0.0;  // V(w) when Optimal
  std::optional<FarkasCertificate> kkt;
  int iterations = 0;
  std::vector<double> objective_trace;
};

/// Solve problem at fixed w. Absolute-value atoms are lifted to epigraph
/// variables, states are eliminated through the dynamics, and the
/// resulting inequality-constrained convex QP is solved by an active-set
/// method. The KKT certificate is recomputed on the original formulation.
SolveResult solve(const ControlProblem& p, const ParameterVector& w);

/// V(w); +inf on Infeasible, -inf on Unbounded.
double optimal_value(const ControlProblem& p, const ParameterVector& w);

/// Uniform tensor grid of parameter values around `center`.
struct OracleGrid {
  Vec center;
  Vec radii;                 // per coordinate
  int points_per_axis = 3;   // odd, center included
  std::vector<double> values;  // filled by grid_oracle; +-inf allowed

  int num_points() const;
  Vec point(int flat_index) const;
  bool filled() const { return static_cast<int>(values.size()) == num_points(); }
};

/// Evaluate V over the grid by independent solves (total points capped
/// at 1e5). This is the verification arbiter: it never reuses results
/// from the object under test.
OracleGrid grid_oracle(const ControlProblem& p, OracleGrid g);

struct CheckReport {
  bool pass = false;
  double worst_margin = 0.0;
  Vec worst_point;
};

/// PASS iff V(w) - Vbar >= <cand, w - wbar> - 1e-6 on every finite grid
/// value.
CheckReport subgradient_inequality_check(const ParameterVector& wbar,
                                         double Vbar, const Vec& cand,
                                         const OracleGrid& g);

/// Optimality certificate for a feasible candidate, over the combined
/// system (dynamics equalities, C rows, Omega rows). Presence <=>
/// optimality.
std::optional<FarkasCertificate> kkt_verify(const ControlProblem& p,
                                            const ParameterVector& w,
                                            const Solution& sol);

/// Subdifferential of z |-> f(z, w) at zbar as an affine box model.
ConvexExpr::AffineBox objective_subdiff_z(const ControlProblem& p,
                                          const ParameterVector& w,
                                          const Vec& zbar);

/// Subdifferential of w |-> f(zbar, w) at w as an affine box model.
ConvexExpr::AffineBox objective_subdiff_w(const ControlProblem& p,
                                          const ParameterVector& w,
                                          const Vec& zbar);

}  // namespace ocsens
