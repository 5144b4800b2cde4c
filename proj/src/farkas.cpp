#include "ocsens/farkas.hpp"

#include <cmath>

#include "ocsens/lp.hpp"

namespace ocsens {
namespace {

// Unified target description: g = g0 + G s, slo <= s <= shi, S_eq s = s_rhs.
struct TargetModel {
  Vec g0;
  Mat G;
  Vec slo, shi;
  Mat S_eq;
  Vec s_rhs;
};

TargetModel model_of(const SetRep& S) {
  TargetModel t;
  const int d = S.dim();
  switch (S.kind()) {
    case SetRep::Kind::Singleton:
      t.g0 = S.point();
      t.G = Mat::Zero(d, 0);
      t.slo = t.shi = Vec::Zero(0);
      break;
    case SetRep::Kind::Box:
      t.g0 = Vec::Zero(d);
      t.G = Mat::Identity(d, d);
      t.slo = S.lo();
      t.shi = S.hi();
      break;
    case SetRep::Kind::VPoly: {
      const Mat& V = S.vertices();
      const Mat& R = S.rays();
      const int nv = static_cast<int>(V.cols());
      const int nr = static_cast<int>(R.cols());
      t.g0 = Vec::Zero(d);
      t.G = Mat::Zero(d, nv + nr);
      t.G.leftCols(nv) = V;
      if (nr) t.G.rightCols(nr) = R;
      t.slo = Vec::Zero(nv + nr);
      t.shi = Vec::Constant(nv + nr, kInf);
      t.S_eq = Mat::Zero(1, nv + nr);
      t.S_eq.leftCols(nv).setOnes();
      t.s_rhs = Vec::Ones(1);
      break;
    }
    case SetRep::Kind::HPoly:
      throw std::domain_error("farkas_certificate: HPoly target unsupported");
  }
  return t;
}

TargetModel model_of(const ConvexExpr::AffineBox& b) {
  return {b.g0, b.G, b.slo, b.shi, Mat(), Vec()};
}

std::optional<FarkasCertificate> solve_farkas(const Mat& A, const Vec& alpha,
                                              const Mat& E, const Vec& beta,
                                              const Vec& xbar,
                                              const TargetModel& t) {
  const int d = static_cast<int>(xbar.size());
  std::vector<int> active;
  for (int i = 0; i < alpha.size(); ++i)
    if (std::abs(A.row(i).dot(xbar) - alpha[i]) <= Tol::active)
      active.push_back(i);
  const int ns = static_cast<int>(t.G.cols());
  const int na = static_cast<int>(active.size());
  const int ne = static_cast<int>(beta.size());
  // Variables: (s, lam_active, mu, rho); minimize rho with
  // |g0 + G s + A_act' lam + E' mu|_inf <= rho.
  const int nv = ns + na + ne + 1;
  Mat Row = Mat::Zero(d, nv);
  if (ns) Row.leftCols(ns) = t.G;
  for (int i = 0; i < na; ++i) Row.col(ns + i) = A.row(active[i]).transpose();
  for (int j = 0; j < ne; ++j) Row.col(ns + na + j) = E.row(j).transpose();

  LinearProgram lp;
  lp.c = Vec::Zero(nv);
  lp.c[nv - 1] = 1.0;
  lp.A_ub = Mat::Zero(2 * d, nv);
  lp.b_ub = Vec::Zero(2 * d);
  lp.A_ub.block(0, 0, d, nv) = Row;
  lp.A_ub.block(d, 0, d, nv) = -Row;
  lp.A_ub.col(nv - 1).setConstant(-1.0);
  lp.b_ub.head(d) = -t.g0;
  lp.b_ub.tail(d) = t.g0;
  if (t.s_rhs.size()) {
    lp.A_eq = Mat::Zero(t.s_rhs.size(), nv);
    lp.A_eq.block(0, 0, t.s_rhs.size(), ns) = t.S_eq;
    lp.b_eq = t.s_rhs;
  }
  lp.lb = Vec::Constant(nv, -kInf);
  lp.ub = Vec::Constant(nv, kInf);
  if (ns) {
    lp.lb.head(ns) = t.slo;
    lp.ub.head(ns) = t.shi;
  }
  lp.lb.segment(ns, na).setZero();  // lam >= 0
  lp.lb[nv - 1] = 0.0;

  LpResult res = solve_lp(lp);
  if (res.status != LpStatus::Optimal || res.objective > Tol::kkt_residual)
    return std::nullopt;
  FarkasCertificate cert;
  cert.lambda = Vec::Zero(alpha.size());
  for (int i = 0; i < na; ++i) cert.lambda[active[i]] = res.x[ns + i];
  cert.mu = res.x.segment(ns + na, ne);
  cert.residual = res.objective;
  return cert;
}

}  // namespace

std::optional<FarkasCertificate> farkas_certificate(const Mat& A,
                                                    const Vec& alpha,
                                                    const Mat& E,
                                                    const Vec& beta,
                                                    const Vec& xbar,
                                                    const SetRep& target) {
  return solve_farkas(A, alpha, E, beta, xbar, model_of(target));
}

std::optional<FarkasCertificate> farkas_certificate(
    const Mat& A, const Vec& alpha, const Mat& E, const Vec& beta,
    const Vec& xbar, const ConvexExpr::AffineBox& target) {
  return solve_farkas(A, alpha, E, beta, xbar, model_of(target));
}

}  // namespace ocsens
