#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ocsens/types.hpp"

namespace ocsens {

/// Polyhedral set in H-representation: { x : A x <= b, E x == f }.
struct PolyhedralSet {
  int dim = 0;
  Mat A;  // 0 x dim allowed
  Vec b;
  Mat E;
  Vec f;

  static PolyhedralSet whole_space(int d);
  static PolyhedralSet box(const Vec& lo, const Vec& hi);

  int num_ineq() const { return static_cast<int>(b.size()); }
  int num_eq() const { return static_cast<int>(f.size()); }
  bool contains(const Vec& x, double tol = Tol::feas) const;
  /// Any feasible point, or nullopt if the set is empty.
  std::optional<Vec> feasible_point() const;
  /// True iff the interior is nonempty: no equality rows and the
  /// max-min-slack program has a positive (possibly unbounded) optimum.
  bool has_interior() const;
};

/// Polyhedral cone in generator form:
///   { sum_i lam_i g_i + sum_j mu_j l_j : lam >= 0, mu free }.
struct ConeRep {
  int dim = 0;
  Mat generators;  // dim x k
  Mat lineality;   // dim x l

  static ConeRep zero(int d) { return {d, Mat::Zero(d, 0), Mat::Zero(d, 0)}; }
  bool is_trivial() const {
    return generators.cols() == 0 && lineality.cols() == 0;
  }
};

/// Membership v in cone, via a small LP (residual <= Tol::cone_residual).
bool cone_contains(const ConeRep& c, const Vec& v);

/// Normal cone of a polyhedral set at a feasible point: active inequality
/// normals as generators, equality normals as lineality.
/// Throws std::domain_error if x is infeasible beyond tolerance.
ConeRep normal_cone_at(const PolyhedralSet& S, const Vec& x);

/// Representation of a subdifferential / estimate set.
class SetRep {
 public:
  enum class Kind { Singleton, Box, HPoly, VPoly };

  static SetRep singleton(const Vec& v);
  static SetRep box(const Vec& lo, const Vec& hi);
  static SetRep hpoly(const PolyhedralSet& P);
  /// vertices: dim x nv (nv >= 1); rays: dim x nr.
  static SetRep vpoly(const Mat& vertices, const Mat& rays = Mat());

  Kind kind() const { return kind_; }
  int dim() const { return dim_; }

  const Vec& point() const;             // Singleton
  const Vec& lo() const;                // Box
  const Vec& hi() const;                // Box
  const PolyhedralSet& poly() const;    // HPoly
  const Mat& vertices() const;          // VPoly
  const Mat& rays() const;              // VPoly

  bool is_bounded() const;
  /// Vertex list of a bounded set (Singleton/Box/VPoly; HPoly via
  /// enumeration up to the dimension cap).
  Mat vertex_list() const;
  /// Support function h(d) = sup_{x in S} <d, x>; +inf if unbounded in d.
  double support(const Vec& d) const;
  bool contains_point(const Vec& x, double tol = 1e-9) const;

  std::string to_json() const;
  static SetRep from_json(const std::string& s);

 private:
  SetRep() = default;
  Kind kind_ = Kind::Singleton;
  int dim_ = 0;
  Vec v_, lo_, hi_;
  PolyhedralSet poly_;
  Mat verts_, rays_;
};

// Exact polyhedral operations are capped: above this, callers must use
// OUTER_BOX propagation.
inline constexpr int kExactDimCap = 10;
inline constexpr int kExactVertexCap = 10000;

enum class ImageMode { Exact, OuterBox };

/// Minkowski sum. Box (+) Box stays Box; Singleton translates; VPoly
/// summed vertex-wise with hull pruning.
SetRep minkowski_sum(const SetRep& A, const SetRep& B);

/// Image { A x : x in S }. Exact mode maps vertices/rays (refuses
/// unbounded non-box input); OuterBox returns the interval enclosure
/// c' = A c, r' = |A| r of a bounding box of S.
SetRep affine_image(const Mat& A, const SetRep& S, ImageMode mode);

/// Interval hull [lo, hi] of S (entries may be +-inf).
void bounding_box(const SetRep& S, Vec& lo, Vec& hi);

/// Drop vertices lying in the convex hull of the others (LP test).
Mat prune_hull(const Mat& vertices);

/// Enumerate vertices of a (possibly degenerate) H-polyhedron with no
/// unbounded directions in the region of interest; dim <= kExactDimCap.
Mat enumerate_vertices(const PolyhedralSet& P);

}  // namespace ocsens
