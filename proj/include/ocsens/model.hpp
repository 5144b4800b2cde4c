#pragma once

#include <string>
#include <vector>

#include "ocsens/convex_expr.hpp"
#include "ocsens/set_rep.hpp"
#include "ocsens/types.hpp"

namespace ocsens {

/// Parametric convex discrete-time optimal control problem
///   minimize  sum_k h_k(x_k, u_k, w_k) + h_N(x_N)
///   s.t.      x_{k+1} = A_k x_k + B_k u_k + T_k w_k,
///             x_0 in C,  u_k in Omega_k.
/// Stage cost k is a ConvexExpr over the concatenated (x_k, u_k, w_k).
struct ControlProblem {
  int N = 0;
  std::vector<int> state_dims;    // n_0 .. n_N
  std::vector<int> control_dims;  // m_0 .. m_{N-1}
  std::vector<int> param_dims;    // p_0 .. p_{N-1}
  std::vector<Mat> A, B, T;
  std::vector<ConvexExpr> stage_costs;
  ConvexExpr terminal_cost{0};
  PolyhedralSet initial_set;
  std::vector<PolyhedralSet> control_sets;

  int dim_x() const;       // sum n_k, k=0..N
  int dim_u() const;       // sum m_k
  int dim_w() const;       // sum p_k
  int dim_z() const { return dim_x() + dim_u(); }
  int dim_xtilde() const;  // sum n_k, k=1..N

  // Offsets into the stacked z = (x_0..x_N, u_0..u_{N-1}) vector.
  int x_offset(int k) const;
  int u_offset(int k) const;
  int w_offset(int k) const;
  int xtilde_offset(int k) const;  // row offset of state equation k+... (k=1..N)

  /// Simulate x from (x0, u, w).
  std::vector<Vec> simulate(const Vec& x0, const std::vector<Vec>& u,
                            const Vec& w) const;
  /// Stage-k cost argument (x_k, u_k, w_k) pulled from stacked vectors.
  Vec stage_arg(int k, const Vec& z, const Vec& w) const;
};

using ParameterVector = Vec;

struct Solution {
  std::vector<Vec> x;  // x_0 .. x_N
  std::vector<Vec> u;  // u_0 .. u_{N-1}
  double objective = 0.0;

  Vec z(const ControlProblem& p) const;  // stacked (x, u)
  static Solution from_z(const ControlProblem& p, const Vec& z);
};

/// Block operators of the reduction V(w) = inf { f(z,w) : Mz = Tw, z in K }.
struct AssembledSystem {
  Mat M;            // dim_xtilde x dim_z
  Mat T;            // dim_xtilde x dim_w
  PolyhedralSet K;  // C x Xtilde x Omega in z-space
};

struct ValidationCheck {
  std::string name;
  bool passed = false;
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;
  bool all_passed() const {
    for (const auto& c : checks)
      if (!c.passed) return false;
    return true;
  }
};

/// Shape consistency, convexity certificates, nonempty interior of each
/// Omega_k. Structurally malformed input (ragged matrices) throws.
ValidationReport validate_problem(const ControlProblem& p);

AssembledSystem assemble_operators(const ControlProblem& p);

double evaluate_objective(const ControlProblem& p, const Solution& sol,
                          const ParameterVector& w);

/// Orthonormal basis of ker M via SVD, singular values below
/// Tol::rank_rel * sigma_max treated as zero.
std::vector<Vec> kernel_basis(const Mat& M);

}  // namespace ocsens
