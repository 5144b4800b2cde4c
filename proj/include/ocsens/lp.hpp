#pragma once

#include "ocsens/types.hpp"

namespace ocsens {

/// Dense linear program
///   minimize    c'x
///   subject to  A_ub x <= b_ub,  A_eq x == b_eq,  lb <= x <= ub.
/// Empty matrices / vectors stand for absent blocks; +-inf bounds allowed.
struct LinearProgram {
  Vec c;
  Mat A_ub;
  Vec b_ub;
  Mat A_eq;
  Vec b_eq;
  Vec lb;  // if size 0, all -inf
  Vec ub;  // if size 0, all +inf

  int num_vars() const { return static_cast<int>(c.size()); }
};

enum class LpStatus { Optimal, Infeasible, Unbounded, MaxIter };

struct LpResult {
  LpStatus status = LpStatus::MaxIter;
  Vec x;
  double objective = 0.0;
};

/// Two-phase primal simplex with Bland's rule (deterministic, anti-cycling).
/// Intended for the desk-scale systems this library produces.
LpResult solve_lp(const LinearProgram& lp, int max_iter = 20000);

/// min |M y - t|_inf  s.t.  lb <= y <= ub,  A_eq y = b_eq.
/// Returns +inf when the constraints themselves are infeasible.
double linf_residual(const Mat& M, const Vec& t, const Vec& lb, const Vec& ub,
                     const Mat& A_eq = Mat(), const Vec& b_eq = Vec(),
                     Vec* y_out = nullptr);

}  // namespace ocsens
