#include "ocsens/convex_expr.hpp"

#include <cmath>

namespace ocsens {

ConvexExpr::ConvexExpr(int dim)
    : dim_(dim), Q_(Mat::Zero(dim, dim)), q_(Vec::Zero(dim)), c_(0.0) {}

ConvexExpr::ConvexExpr(Mat Q, Vec q, double c)
    : dim_(static_cast<int>(q.size())), Q_(std::move(Q)), q_(std::move(q)), c_(c) {
  if (Q_.rows() != dim_ || Q_.cols() != dim_)
    throw std::invalid_argument("ConvexExpr: Q shape mismatch");
}

void ConvexExpr::add_abs(Vec a, double b, double weight) {
  if (a.size() != dim_) throw std::invalid_argument("ConvexExpr: atom dim mismatch");
  atoms_.push_back({std::move(a), b, weight});
}

bool ConvexExpr::is_convex() const {
  for (const auto& at : atoms_)
    if (at.weight < 0) return false;
  if ((Q_ - Q_.transpose()).lpNorm<Eigen::Infinity>() > 1e-10) return false;
  Eigen::SelfAdjointEigenSolver<Mat> es(Q_);
  return es.eigenvalues().minCoeff() >= -1e-10;
}

double ConvexExpr::eval(const Vec& z) const {
  double v = 0.5 * z.dot(Q_ * z) + q_.dot(z) + c_;
  for (const auto& at : atoms_) v += at.weight * std::abs(at.a.dot(z) - at.b);
  return v;
}

bool ConvexExpr::at_kink(const AbsAtom& atom, const Vec& z) const {
  return std::abs(atom.a.dot(z) - atom.b) <= Tol::kink_rel * (1.0 + z.norm());
}

std::optional<Vec> ConvexExpr::grad(const Vec& z) const {
  Vec g = Q_ * z + q_;
  for (const auto& at : atoms_) {
    const double r = at.a.dot(z) - at.b;
    if (at.weight != 0.0 && at.a.squaredNorm() > 0 && at_kink(at, z))
      return std::nullopt;
    g += at.weight * (r >= 0 ? 1.0 : -1.0) * at.a;
  }
  return g;
}

ConvexExpr::AffineBox ConvexExpr::subdiff_model(const Vec& z, int offset,
                                                int len) const {
  AffineBox m;
  m.g0 = (Q_ * z + q_).segment(offset, len);
  std::vector<Vec> cols;
  for (const auto& at : atoms_) {
    if (at.weight == 0.0) continue;
    Vec ablk = at.a.segment(offset, len);
    if (ablk.squaredNorm() == 0.0) continue;
    if (at_kink(at, z)) {
      cols.push_back(at.weight * ablk);
    } else {
      const double s = (at.a.dot(z) - at.b) >= 0 ? 1.0 : -1.0;
      m.g0 += at.weight * s * ablk;
    }
  }
  m.G = Mat::Zero(len, cols.size());
  for (size_t j = 0; j < cols.size(); ++j) m.G.col(j) = cols[j];
  m.slo = Vec::Constant(cols.size(), -1.0);
  m.shi = Vec::Constant(cols.size(), 1.0);
  return m;
}

ConvexExpr::AffineBox ConvexExpr::subdiff_model(const Vec& z) const {
  return subdiff_model(z, 0, dim_);
}

SetRep ConvexExpr::AffineBox::to_set() const {
  const int k = static_cast<int>(G.cols());
  const int d = static_cast<int>(g0.size());
  if (k == 0) return SetRep::singleton(g0);
  // Axis-aligned columns make an exact box.
  bool axis = true;
  for (int j = 0; j < k && axis; ++j) {
    int nz = 0;
    for (int i = 0; i < d; ++i)
      if (G(i, j) != 0.0) ++nz;
    if (nz > 1) axis = false;
  }
  if (axis) {
    Vec lo = g0, hi = g0;
    for (int j = 0; j < k; ++j)
      for (int i = 0; i < d; ++i) {
        const double r = std::abs(G(i, j));
        lo[i] -= r;
        hi[i] += r;
      }
    return SetRep::box(lo, hi);
  }
  if (k > 16) throw std::domain_error("subdifferential: vertex cap exceeded");
  Mat V(d, 1 << k);
  for (int mask = 0; mask < (1 << k); ++mask) {
    Vec v = g0;
    for (int j = 0; j < k; ++j) v += ((mask >> j & 1) ? 1.0 : -1.0) * G.col(j);
    V.col(mask) = v;
  }
  return SetRep::vpoly(prune_hull(V));
}

SetRep ConvexExpr::subdiff(const Vec& z) const {
  return subdiff_model(z).to_set();
}

SetRep ConvexExpr::singular_subdiff(const Vec& z) const {
  (void)z;
  return SetRep::singleton(Vec::Zero(dim_));
}

}  // namespace ocsens
