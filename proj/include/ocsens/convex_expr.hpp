#pragma once

#include <optional>
#include <vector>

#include "ocsens/set_rep.hpp"
#include "ocsens/types.hpp"

namespace ocsens {

/// One term  weight * |a'z - b|,  weight >= 0.
struct AbsAtom {
  Vec a;
  double b = 0.0;
  double weight = 1.0;
};

/// Structured convex function
///   e(z) = 1/2 z'Qz + q'z + c + sum_i w_i |a_i'z - b_i|
/// with Q symmetric PSD. Convexity is certifiable by construction; an
/// indefinite Q is representable but flagged by is_convex() so problem
/// validation can report it.
class ConvexExpr {
 public:
  explicit ConvexExpr(int dim);
  ConvexExpr(Mat Q, Vec q, double c);

  static ConvexExpr zero(int dim) { return ConvexExpr(dim); }

  void add_abs(Vec a, double b, double weight);

  int dim() const { return dim_; }
  const Mat& Q() const { return Q_; }
  const Vec& q() const { return q_; }
  double constant() const { return c_; }
  const std::vector<AbsAtom>& atoms() const { return atoms_; }

  /// Q symmetric PSD (eigenvalue floor >= -1e-10) and all weights >= 0.
  bool is_convex() const;

  double eval(const Vec& z) const;

  /// Gradient, or nullopt when some atom sits at its kink
  /// (|a'z - b| <= kink_rel * (1 + |z|)).
  std::optional<Vec> grad(const Vec& z) const;

  /// Exact subdifferential at z: Box when every kink atom is axis-aligned,
  /// VPoly otherwise, Singleton when differentiable.
  SetRep subdiff(const Vec& z) const;

  /// Singular subdifferential: {0} (the function is finite everywhere).
  SetRep singular_subdiff(const Vec& z) const;

  /// Affine-box model { g0 + G s : slo <= s <= shi } of the subdifferential
  /// restricted to coordinates [offset, offset+len). Kink atoms contribute
  /// one s column each; off-kink atoms fold into g0.
  struct AffineBox {
    Vec g0;
    Mat G;
    Vec slo, shi;
    SetRep to_set() const;  // exact set (Box / VPoly / Singleton)
  };
  AffineBox subdiff_model(const Vec& z, int offset, int len) const;
  AffineBox subdiff_model(const Vec& z) const;

  /// Restriction to a coordinate block with the remaining coordinates
  /// frozen at z (used for partial subdifferentials of stage costs).
  bool at_kink(const AbsAtom& atom, const Vec& z) const;

 private:
  int dim_;
  Mat Q_;
  Vec q_;
  double c_;
  std::vector<AbsAtom> atoms_;
};

}  // namespace ocsens
