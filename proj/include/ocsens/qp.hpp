#pragma once

#include "ocsens/types.hpp"

namespace ocsens {

enum class QpStatus { Optimal, Unbounded, MaxIter };

struct QpResult {
  QpStatus status = QpStatus::MaxIter;
  Vec y;
  double objective = 0.0;
  int iterations = 0;
  std::vector<double> objective_trace;  // non-increasing by construction
};

/// Primal active-set method for the convex QP
///   minimize 1/2 y'Py + r'y   s.t.  G y <= g
/// started from a feasible y0. P must be PSD (possibly singular; flat
/// descent directions are followed to a blocking constraint or reported
/// as Unbounded). Deterministic: Bland-style smallest-index tie breaking.
QpResult solve_qp(const Mat& P, const Vec& r, const Mat& G, const Vec& g,
                  const Vec& y0, int max_iter = 2000);

}  // namespace ocsens
