#include "ocsens/qp.hpp"

#include <algorithm>
#include <cmath>

namespace ocsens {
namespace {

constexpr double kDirTol = 1e-11;
constexpr double kMultTol = 1e-9;

// Orthonormal basis of ker(Gw); identity when Gw has no rows.
Mat null_space(const Mat& Gw, int n) {
  if (Gw.rows() == 0) return Mat::Identity(n, n);
  Eigen::JacobiSVD<Mat> svd(Gw, Eigen::ComputeFullV);
  const Vec& sv = svd.singularValues();
  const double smax = sv.size() ? sv[0] : 0.0;
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv[i] > 1e-11 * std::max(1.0, smax)) ++rank;
  return svd.matrixV().rightCols(n - rank);
}

}  // namespace

QpResult solve_qp(const Mat& P, const Vec& r, const Mat& G, const Vec& g,
                  const Vec& y0, int max_iter) {
  const int n = static_cast<int>(y0.size());
  const int m = static_cast<int>(g.size());
  QpResult res;
  Vec y = y0;
  auto obj = [&](const Vec& v) { return 0.5 * v.dot(P * v) + r.dot(v); };

  // Start with the active constraints at y0.
  std::vector<int> W;
  for (int i = 0; i < m; ++i)
    if (G.row(i).dot(y) > g[i] - 1e-9) W.push_back(i);

  auto build_Gw = [&]() {
    Mat Gw(W.size(), n);
    for (size_t i = 0; i < W.size(); ++i) Gw.row(i) = G.row(W[i]);
    return Gw;
  };

  res.objective_trace.push_back(obj(y));
  for (int it = 0; it < max_iter; ++it) {
    res.iterations = it + 1;
    Mat Gw = build_Gw();
    Mat Z = null_space(Gw, n);
    Vec grad = P * y + r;

    Vec p = Vec::Zero(n);
    bool flat_descent = false;
    Vec ray;
    if (Z.cols() > 0) {
      Mat H = Z.transpose() * P * Z;
      Vec gr = Z.transpose() * grad;
      Eigen::SelfAdjointEigenSolver<Mat> es(H);
      const Vec& ev = es.eigenvalues();
      const double emax = std::max(1.0, ev.size() ? ev.maxCoeff() : 0.0);
      Vec pz = Vec::Zero(Z.cols());
      Vec flat = Vec::Zero(Z.cols());
      for (int i = 0; i < ev.size(); ++i) {
        const double comp = es.eigenvectors().col(i).dot(gr);
        if (ev[i] > 1e-11 * emax)
          pz -= (comp / ev[i]) * es.eigenvectors().col(i);
        else
          flat -= comp * es.eigenvectors().col(i);
      }
      if (flat.norm() > 1e-9 * (1.0 + grad.norm())) {
        flat_descent = true;
        ray = Z * flat.normalized();
      } else {
        p = Z * pz;
      }
    }

    if (flat_descent) {
      // Objective decreases linearly along `ray` while staying in the
      // current working-set face; go to the nearest blocking constraint.
      int block = -1;
      double alpha = kInf;
      for (int i = 0; i < m; ++i) {
        const double gd = G.row(i).dot(ray);
        if (gd > 1e-12) {
          const double a = (g[i] - G.row(i).dot(y)) / gd;
          if (a < alpha - 1e-12) {
            alpha = a;
            block = i;
          }
        }
      }
      if (block < 0) {
        res.status = QpStatus::Unbounded;
        res.y = y;
        return res;
      }
      y += alpha * ray;
      if (std::find(W.begin(), W.end(), block) == W.end()) W.push_back(block);
      std::sort(W.begin(), W.end());
      res.objective_trace.push_back(obj(y));
      continue;
    }

    if (p.norm() <= kDirTol * (1.0 + y.norm())) {
      // Stationary on the face: check multipliers  Gw' lam = -grad.
      if (W.empty()) {
        res.status = QpStatus::Optimal;
        res.y = y;
        res.objective = obj(y);
        return res;
      }
      Vec lam = Gw.transpose()
                    .jacobiSvd(Eigen::ComputeThinU | Eigen::ComputeThinV)
                    .solve(-grad);
      int worst = -1;
      double worst_val = -kMultTol;
      for (size_t i = 0; i < W.size(); ++i) {
        if (lam[i] < worst_val) {
          worst_val = lam[i];
          worst = static_cast<int>(i);
        }
      }
      if (worst < 0) {
        res.status = QpStatus::Optimal;
        res.y = y;
        res.objective = obj(y);
        return res;
      }
      W.erase(W.begin() + worst);
      continue;
    }

    // Line search toward the face minimizer.
    double alpha = 1.0;
    int block = -1;
    for (int i = 0; i < m; ++i) {
      if (std::find(W.begin(), W.end(), i) != W.end()) continue;
      const double gd = G.row(i).dot(p);
      if (gd > 1e-12) {
        const double a = (g[i] - G.row(i).dot(y)) / gd;
        if (a < alpha - 1e-12) {
          alpha = a;
          block = i;
        }
      }
    }
    y += std::max(0.0, alpha) * p;
    if (block >= 0) {
      W.push_back(block);
      std::sort(W.begin(), W.end());
    }
    res.objective_trace.push_back(obj(y));
  }
  res.status = QpStatus::MaxIter;
  res.y = y;
  res.objective = obj(y);
  return res;
}

}  // namespace ocsens
