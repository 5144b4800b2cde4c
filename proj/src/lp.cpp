#include "ocsens/lp.hpp"

#include <cassert>
#include <cmath>

namespace ocsens {
namespace {

constexpr double kPivotTol = 1e-10;
constexpr double kZeroTol = 1e-9;

// Standard-form problem: minimize c'y s.t. Ay = b, y >= 0, b >= 0.
struct StandardForm {
  Mat A;
  Vec b;
  Vec c;
  // Map back to the original variables: x = shift + S y  (S sparse in
  // practice, stored dense here).
  Mat S;
  Vec shift;
};

// Rewrite the general LP into standard form.
//   finite lb:      x = lb + y,           y >= 0
//   free variable:  x = y+ - y-,          y+, y- >= 0
//   finite ub:      extra row y <= ub - lb (slacked)
//   <= row:         slack variable
StandardForm to_standard(const LinearProgram& lp) {
  const int n = lp.num_vars();
  Vec lb = lp.lb.size() ? lp.lb : Vec::Constant(n, -kInf);
  Vec ub = lp.ub.size() ? lp.ub : Vec::Constant(n, kInf);

  // Column layout of y: one or two columns per original variable.
  std::vector<int> col_pos(n), col_neg(n, -1);
  Vec shift = Vec::Zero(n);
  int ny = 0;
  for (int j = 0; j < n; ++j) {
    if (std::isfinite(lb[j])) {
      shift[j] = lb[j];
      col_pos[j] = ny++;
    } else if (std::isfinite(ub[j])) {
      // x = ub - y, y >= 0
      shift[j] = ub[j];
      col_pos[j] = ny++;
      col_neg[j] = -2;  // marker: negated single column
    } else {
      col_pos[j] = ny++;
      col_neg[j] = ny++;
    }
  }

  const int m_ub = static_cast<int>(lp.b_ub.size());
  const int m_eq = static_cast<int>(lp.b_eq.size());
  int m_bnd = 0;
  for (int j = 0; j < n; ++j)
    if (std::isfinite(lb[j]) && std::isfinite(ub[j])) ++m_bnd;

  const int m = m_ub + m_eq + m_bnd;
  const int ntot = ny + m_ub + m_bnd;  // slacks for <= rows and bound rows

  Mat A = Mat::Zero(m, ntot);
  Vec b = Vec::Zero(m);
  Vec c = Vec::Zero(ntot);
  Mat S = Mat::Zero(n, ntot);

  auto scatter_var = [&](int row_or_obj, double coef, int j, Mat& target,
                         int r) {
    // Adds coef * x_j expressed in y into row r of `target`.
    if (col_neg[j] == -1) {
      target(r, col_pos[j]) += coef;
    } else if (col_neg[j] == -2) {
      target(r, col_pos[j]) -= coef;
    } else {
      target(r, col_pos[j]) += coef;
      target(r, col_neg[j]) -= coef;
    }
    (void)row_or_obj;
  };

  for (int j = 0; j < n; ++j) scatter_var(0, 1.0, j, S, j);

  // Objective: c'x = c'shift + (c expressed in y)'y.
  Vec cy = Vec::Zero(ntot);
  {
    Mat tmp = Mat::Zero(1, ntot);
    for (int j = 0; j < n; ++j) scatter_var(0, lp.c[j], j, tmp, 0);
    cy = tmp.row(0).transpose();
  }
  c = cy;

  int r = 0;
  for (int i = 0; i < m_ub; ++i, ++r) {
    for (int j = 0; j < n; ++j) scatter_var(0, lp.A_ub(i, j), j, A, r);
    b[r] = lp.b_ub[i] - lp.A_ub.row(i).dot(shift);
    A(r, ny + i) = 1.0;  // slack
  }
  for (int i = 0; i < m_eq; ++i, ++r) {
    for (int j = 0; j < n; ++j) scatter_var(0, lp.A_eq(i, j), j, A, r);
    b[r] = lp.b_eq[i] - lp.A_eq.row(i).dot(shift);
  }
  int bslack = 0;
  for (int j = 0; j < n; ++j) {
    if (std::isfinite(lb[j]) && std::isfinite(ub[j])) {
      A(r, col_pos[j]) = 1.0;
      A(r, ny + m_ub + bslack) = 1.0;
      b[r] = ub[j] - lb[j];
      ++r;
      ++bslack;
    }
  }
  assert(r == m);

  // Normalize b >= 0.
  for (int i = 0; i < m; ++i) {
    if (b[i] < 0) {
      A.row(i) = -A.row(i);
      b[i] = -b[i];
    }
  }
  return {A, b, c, S, shift};
}

struct Tableau {
  Mat T;                    // (m+1) x (n+1); last row = reduced costs, last col = rhs
  std::vector<int> basis;   // size m
  int m, n;
  int n_enter;              // only columns < n_enter may enter the basis

  void pivot(int row, int col) {
    T.row(row) /= T(row, col);
    for (int i = 0; i <= m; ++i) {
      if (i == row) continue;
      const double f = T(i, col);
      if (f != 0.0) T.row(i) -= f * T.row(row);
    }
    basis[row] = col;
  }

  // Bland's rule iteration. Returns status.
  LpStatus iterate(int max_iter) {
    for (int it = 0; it < max_iter; ++it) {
      int enter = -1;
      for (int j = 0; j < n_enter; ++j) {
        if (T(m, j) < -kZeroTol) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return LpStatus::Optimal;
      int leave = -1;
      double best = kInf;
      for (int i = 0; i < m; ++i) {
        const double a = T(i, enter);
        if (a > kPivotTol) {
          const double ratio = T(i, n) / a;
          if (ratio < best - 1e-12 ||
              (ratio < best + 1e-12 &&
               (leave < 0 || basis[i] < basis[leave]))) {
            best = ratio;
            leave = i;
          }
        }
      }
      if (leave < 0) return LpStatus::Unbounded;
      pivot(leave, enter);
    }
    return LpStatus::MaxIter;
  }
};

}  // namespace

LpResult solve_lp(const LinearProgram& lp, int max_iter) {
  StandardForm sf = to_standard(lp);
  const int m = static_cast<int>(sf.b.size());
  const int n = static_cast<int>(sf.c.size());

  // Phase 1 with artificial variables on every row.
  Tableau tb;
  tb.m = m;
  tb.n = n + m;
  tb.n_enter = tb.n;
  tb.T = Mat::Zero(m + 1, tb.n + 1);
  tb.T.block(0, 0, m, n) = sf.A;
  tb.T.block(0, n, m, m) = Mat::Identity(m, m);
  tb.T.col(tb.n).head(m) = sf.b;
  tb.basis.resize(m);
  for (int i = 0; i < m; ++i) tb.basis[i] = n + i;
  // Phase-1 objective: minimize sum of artificials; eliminate basics.
  for (int j = n; j < tb.n; ++j) tb.T(m, j) = 1.0;
  for (int i = 0; i < m; ++i) tb.T.row(m) -= tb.T.row(i);

  LpStatus st = tb.iterate(max_iter);
  if (st == LpStatus::MaxIter) return {LpStatus::MaxIter, Vec(), 0.0};
  if (-tb.T(m, tb.n) > 1e-7) return {LpStatus::Infeasible, Vec(), 0.0};

  // Drive remaining artificial variables out of the basis.
  for (int i = 0; i < m; ++i) {
    if (tb.basis[i] >= n) {
      int col = -1;
      for (int j = 0; j < n; ++j) {
        if (std::abs(tb.T(i, j)) > 1e-8) {
          col = j;
          break;
        }
      }
      if (col >= 0) {
        tb.pivot(i, col);
      }
      // else: redundant row, its artificial stays basic at value ~0.
    }
  }

  // Phase 2: replace the objective row; artificial columns are barred
  // from entering (they can remain basic only on redundant rows, at zero).
  tb.n_enter = n;
  tb.T.row(m).setZero();
  for (int j = 0; j < n; ++j) tb.T(m, j) = sf.c[j];
  for (int i = 0; i < m; ++i) {
    const double cb = tb.T(m, tb.basis[i]);
    if (cb != 0.0) tb.T.row(m) -= cb * tb.T.row(i);
  }
  st = tb.iterate(max_iter);
  if (st == LpStatus::Unbounded) return {LpStatus::Unbounded, Vec(), 0.0};
  if (st == LpStatus::MaxIter) return {LpStatus::MaxIter, Vec(), 0.0};

  Vec y = Vec::Zero(n);
  for (int i = 0; i < m; ++i)
    if (tb.basis[i] < n) y[tb.basis[i]] = tb.T(i, tb.n);
  Vec x = sf.shift + sf.S * y;
  LpResult res;
  res.status = LpStatus::Optimal;
  res.x = x;
  res.objective = lp.c.dot(x);
  return res;
}

double linf_residual(const Mat& M, const Vec& t, const Vec& lb, const Vec& ub,
                     const Mat& A_eq, const Vec& b_eq, Vec* y_out) {
  const int n = static_cast<int>(M.cols());
  const int r = static_cast<int>(M.rows());
  // Variables: (y, rho), with  M y - rho <= t,  -M y - rho <= -t.
  LinearProgram lp;
  lp.c = Vec::Zero(n + 1);
  lp.c[n] = 1.0;
  lp.A_ub = Mat::Zero(2 * r, n + 1);
  lp.b_ub = Vec::Zero(2 * r);
  lp.A_ub.block(0, 0, r, n) = M;
  lp.A_ub.block(r, 0, r, n) = -M;
  lp.A_ub.col(n).setConstant(-1.0);
  lp.b_ub.head(r) = t;
  lp.b_ub.tail(r) = -t;
  if (b_eq.size() > 0) {
    lp.A_eq = Mat::Zero(b_eq.size(), n + 1);
    lp.A_eq.block(0, 0, b_eq.size(), n) = A_eq;
    lp.b_eq = b_eq;
  }
  lp.lb = Vec::Constant(n + 1, -kInf);
  lp.ub = Vec::Constant(n + 1, kInf);
  if (lb.size()) lp.lb.head(n) = lb;
  if (ub.size()) lp.ub.head(n) = ub;
  lp.lb[n] = 0.0;
  LpResult res = solve_lp(lp);
  if (res.status != LpStatus::Optimal) return kInf;
  if (y_out) *y_out = res.x.head(n);
  return res.objective;
}

}  // namespace ocsens
