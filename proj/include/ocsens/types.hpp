#pragma once

#include <Eigen/Dense>
#include <limits>
#include <vector>

namespace ocsens {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Global tolerances. Rank decisions are relative to the largest singular
// value; the remaining ones are absolute unless noted.
struct Tol {
  static constexpr double rank_rel = 1e-9;        // kernel / rank threshold
  static constexpr double kink_rel = 1e-9;        // |a'z - b| <= kink_rel*(1+|z|)
  static constexpr double active = 1e-7;          // active-constraint detection
  static constexpr double feas = 1e-7;            // solution feasibility
  static constexpr double kkt_residual = 1e-7;    // Farkas stationarity residual
  static constexpr double cone_residual = 1e-8;   // cone membership residual
  static constexpr double stationarity = 1e-8;    // solver stationarity gap
};

}  // namespace ocsens
