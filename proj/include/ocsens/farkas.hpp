#pragma once

#include <optional>

#include "ocsens/convex_expr.hpp"
#include "ocsens/set_rep.hpp"
#include "ocsens/types.hpp"

namespace ocsens {

/// Lagrange multiplier certificate of optimality for
///   min phi(x)  s.t.  <a_i, x> <= alpha_i,  <b_j, x> = beta_j:
/// 0 in dphi(xbar) + sum lam_i a_i + sum mu_j b_j with lam >= 0 supported
/// on active rows only (complementarity holds structurally).
struct FarkasCertificate {
  Vec lambda;  // one per inequality row, zero on inactive rows
  Vec mu;      // one per equality row
  double residual = 0.0;
};

/// Search for a certificate with a subgradient g drawn from `target`
/// (the subdifferential of the objective at xbar). Returns nullopt when
/// the stationarity LP cannot reach residual <= Tol::kkt_residual, i.e.
/// xbar fails the optimality test.
std::optional<FarkasCertificate> farkas_certificate(
    const Mat& A, const Vec& alpha, const Mat& E, const Vec& beta,
    const Vec& xbar, const SetRep& target);

/// Same, with the subdifferential given as an affine image of a box
/// (the structured form produced by ConvexExpr::subdiff_model).
std::optional<FarkasCertificate> farkas_certificate(
    const Mat& A, const Vec& alpha, const Mat& E, const Vec& beta,
    const Vec& xbar, const ConvexExpr::AffineBox& target);

}  // namespace ocsens
