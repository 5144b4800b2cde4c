#include "ocsens/set_rep.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include <nlohmann/json.hpp>

#include "ocsens/lp.hpp"

namespace ocsens {

using nlohmann::json;

namespace {

// Minimize the L-inf residual of  M y = t  subject to lb <= y <= ub and
// optional extra rows  A_eq y = b_eq  enforced exactly. Returns the
// residual (or +inf if infeasible) and the minimizer.
double linf_fit(const Mat& M, const Vec& t, const Vec& lb, const Vec& ub,
                const Mat& extra_eq, const Vec& extra_rhs, Vec* y_out) {
  return linf_residual(M, t, lb, ub, extra_eq, extra_rhs, y_out);
}

json vec_to_json(const Vec& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) {
    double x = v[i];
    if (std::isinf(x))
      a.push_back(x > 0 ? json("inf") : json("-inf"));
    else
      a.push_back(x);
  }
  return a;
}

Vec vec_from_json(const json& a) {
  Vec v(a.size());
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i].is_string()) {
      const std::string s = a[i].get<std::string>();
      v[i] = (s == "-inf") ? -kInf : kInf;
    } else {
      v[i] = a[i].get<double>();
    }
  }
  return v;
}

json mat_to_json(const Mat& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) rows.push_back(vec_to_json(m.row(i)));
  return rows;
}

Mat mat_from_json(const json& rows, int cols_hint = -1) {
  const int r = static_cast<int>(rows.size());
  if (r == 0) return Mat::Zero(0, std::max(cols_hint, 0));
  const int c = static_cast<int>(rows[0].size());
  Mat m(r, c);
  for (int i = 0; i < r; ++i) m.row(i) = vec_from_json(rows[i]).transpose();
  return m;
}

}  // namespace

// ---------------------------------------------------------------------------
// PolyhedralSet

PolyhedralSet PolyhedralSet::whole_space(int d) {
  return {d, Mat::Zero(0, d), Vec::Zero(0), Mat::Zero(0, d), Vec::Zero(0)};
}

PolyhedralSet PolyhedralSet::box(const Vec& lo, const Vec& hi) {
  const int d = static_cast<int>(lo.size());
  std::vector<std::pair<Vec, double>> rows;
  for (int i = 0; i < d; ++i) {
    if (std::isfinite(hi[i])) {
      Vec a = Vec::Zero(d);
      a[i] = 1.0;
      rows.emplace_back(a, hi[i]);
    }
    if (std::isfinite(lo[i])) {
      Vec a = Vec::Zero(d);
      a[i] = -1.0;
      rows.emplace_back(a, -lo[i]);
    }
  }
  PolyhedralSet P = whole_space(d);
  P.A = Mat::Zero(rows.size(), d);
  P.b = Vec::Zero(rows.size());
  for (size_t i = 0; i < rows.size(); ++i) {
    P.A.row(i) = rows[i].first.transpose();
    P.b[i] = rows[i].second;
  }
  return P;
}

bool PolyhedralSet::contains(const Vec& x, double tol) const {
  for (int i = 0; i < num_ineq(); ++i)
    if (A.row(i).dot(x) > b[i] + tol) return false;
  for (int j = 0; j < num_eq(); ++j)
    if (std::abs(E.row(j).dot(x) - f[j]) > tol) return false;
  return true;
}

std::optional<Vec> PolyhedralSet::feasible_point() const {
  LinearProgram lp;
  lp.c = Vec::Zero(dim);
  lp.A_ub = A;
  lp.b_ub = b;
  lp.A_eq = E;
  lp.b_eq = f;
  LpResult res = solve_lp(lp);
  if (res.status == LpStatus::Infeasible) return std::nullopt;
  return res.x;
}

bool PolyhedralSet::has_interior() const {
  if (num_eq() > 0) return false;
  if (num_ineq() == 0) return true;
  // max t  s.t.  A x + t <= b
  LinearProgram lp;
  lp.c = Vec::Zero(dim + 1);
  lp.c[dim] = -1.0;
  lp.A_ub = Mat::Zero(num_ineq(), dim + 1);
  lp.A_ub.leftCols(dim) = A;
  lp.A_ub.col(dim).setOnes();
  lp.b_ub = b;
  // t is capped at 1 so the LP stays bounded on fat sets.
  lp.lb = Vec::Constant(dim + 1, -kInf);
  lp.ub = Vec::Constant(dim + 1, kInf);
  lp.ub[dim] = 1.0;
  LpResult res = solve_lp(lp);
  if (res.status == LpStatus::Infeasible) return false;
  if (res.status != LpStatus::Optimal) return false;
  return -res.objective > 1e-9;
}

// ---------------------------------------------------------------------------
// Cones

bool cone_contains(const ConeRep& c, const Vec& v) {
  if (c.is_trivial()) return v.norm() <= Tol::cone_residual;
  const int k = static_cast<int>(c.generators.cols());
  const int l = static_cast<int>(c.lineality.cols());
  Mat M(c.dim, k + l);
  if (k) M.leftCols(k) = c.generators;
  if (l) M.rightCols(l) = c.lineality;
  Vec lb = Vec::Constant(k + l, -kInf);
  lb.head(k).setZero();
  Vec ub = Vec::Constant(k + l, kInf);
  double resid = linf_fit(M, v, lb, ub, Mat(), Vec(), nullptr);
  return resid <= Tol::cone_residual;
}

ConeRep normal_cone_at(const PolyhedralSet& S, const Vec& x) {
  if (!S.contains(x, Tol::feas))
    throw std::domain_error("normal_cone_at: point not in set");
  std::vector<int> active;
  for (int i = 0; i < S.num_ineq(); ++i)
    if (std::abs(S.A.row(i).dot(x) - S.b[i]) <= Tol::active) active.push_back(i);
  ConeRep c;
  c.dim = S.dim;
  c.generators = Mat::Zero(S.dim, active.size());
  for (size_t j = 0; j < active.size(); ++j)
    c.generators.col(j) = S.A.row(active[j]).transpose();
  c.lineality = S.E.transpose();
  return c;
}

// ---------------------------------------------------------------------------
// SetRep construction / access

SetRep SetRep::singleton(const Vec& v) {
  SetRep s;
  s.kind_ = Kind::Singleton;
  s.dim_ = static_cast<int>(v.size());
  s.v_ = v;
  return s;
}

SetRep SetRep::box(const Vec& lo, const Vec& hi) {
  for (int i = 0; i < lo.size(); ++i)
    if (lo[i] > hi[i]) throw std::invalid_argument("SetRep::box: lo > hi");
  SetRep s;
  s.kind_ = Kind::Box;
  s.dim_ = static_cast<int>(lo.size());
  s.lo_ = lo;
  s.hi_ = hi;
  return s;
}

SetRep SetRep::hpoly(const PolyhedralSet& P) {
  SetRep s;
  s.kind_ = Kind::HPoly;
  s.dim_ = P.dim;
  s.poly_ = P;
  return s;
}

SetRep SetRep::vpoly(const Mat& vertices, const Mat& rays) {
  if (vertices.cols() == 0)
    throw std::invalid_argument("SetRep::vpoly: empty vertex list");
  SetRep s;
  s.kind_ = Kind::VPoly;
  s.dim_ = static_cast<int>(vertices.rows());
  s.verts_ = vertices;
  s.rays_ = rays.size() ? rays : Mat::Zero(s.dim_, 0);
  return s;
}

const Vec& SetRep::point() const { return v_; }
const Vec& SetRep::lo() const { return lo_; }
const Vec& SetRep::hi() const { return hi_; }
const PolyhedralSet& SetRep::poly() const { return poly_; }
const Mat& SetRep::vertices() const { return verts_; }
const Mat& SetRep::rays() const { return rays_; }

bool SetRep::is_bounded() const {
  switch (kind_) {
    case Kind::Singleton:
      return true;
    case Kind::Box:
      return lo_.allFinite() && hi_.allFinite();
    case Kind::VPoly:
      return rays_.cols() == 0;
    case Kind::HPoly: {
      // Bounded iff every coordinate support is finite.
      for (int i = 0; i < dim_; ++i) {
        Vec d = Vec::Zero(dim_);
        d[i] = 1.0;
        if (!std::isfinite(support(d)) || !std::isfinite(support(-d)))
          return false;
      }
      return true;
    }
  }
  return false;
}

Mat SetRep::vertex_list() const {
  switch (kind_) {
    case Kind::Singleton:
      return v_;
    case Kind::Box: {
      if (!is_bounded())
        throw std::domain_error("vertex_list: unbounded box");
      const int d = dim_;
      const int count = 1 << d;
      if (count > kExactVertexCap)
        throw std::domain_error("vertex_list: vertex cap exceeded");
      Mat V(d, count);
      for (int m = 0; m < count; ++m)
        for (int i = 0; i < d; ++i) V(i, m) = (m >> i & 1) ? hi_[i] : lo_[i];
      return prune_hull(V);
    }
    case Kind::VPoly:
      if (rays_.cols() > 0)
        throw std::domain_error("vertex_list: unbounded VPoly");
      return verts_;
    case Kind::HPoly:
      return enumerate_vertices(poly_);
  }
  throw std::logic_error("unreachable");
}

double SetRep::support(const Vec& d) const {
  switch (kind_) {
    case Kind::Singleton:
      return d.dot(v_);
    case Kind::Box: {
      double s = 0;
      for (int i = 0; i < dim_; ++i) {
        if (d[i] > 0)
          s += std::isfinite(hi_[i]) ? d[i] * hi_[i] : kInf;
        else if (d[i] < 0)
          s += std::isfinite(lo_[i]) ? d[i] * lo_[i] : kInf;
      }
      return s;
    }
    case Kind::VPoly: {
      for (int j = 0; j < rays_.cols(); ++j)
        if (d.dot(rays_.col(j)) > 1e-12) return kInf;
      double s = -kInf;
      for (int j = 0; j < verts_.cols(); ++j)
        s = std::max(s, d.dot(verts_.col(j)));
      return s;
    }
    case Kind::HPoly: {
      LinearProgram lp;
      lp.c = -d;
      lp.A_ub = poly_.A;
      lp.b_ub = poly_.b;
      lp.A_eq = poly_.E;
      lp.b_eq = poly_.f;
      LpResult res = solve_lp(lp);
      if (res.status == LpStatus::Unbounded) return kInf;
      if (res.status == LpStatus::Infeasible) return -kInf;
      return -res.objective;
    }
  }
  throw std::logic_error("unreachable");
}

bool SetRep::contains_point(const Vec& x, double tol) const {
  switch (kind_) {
    case Kind::Singleton:
      return (x - v_).lpNorm<Eigen::Infinity>() <= tol;
    case Kind::Box:
      for (int i = 0; i < dim_; ++i)
        if (x[i] < lo_[i] - tol || x[i] > hi_[i] + tol) return false;
      return true;
    case Kind::HPoly:
      return poly_.contains(x, tol);
    case Kind::VPoly: {
      // x = V theta + R rho, theta >= 0 sum 1, rho >= 0.
      const int nv = static_cast<int>(verts_.cols());
      const int nr = static_cast<int>(rays_.cols());
      Mat M(dim_, nv + nr);
      M.leftCols(nv) = verts_;
      if (nr) M.rightCols(nr) = rays_;
      Mat eq = Mat::Zero(1, nv + nr);
      eq.leftCols(nv).setOnes();
      Vec rhs = Vec::Ones(1);
      Vec lb = Vec::Zero(nv + nr);
      Vec ub = Vec::Constant(nv + nr, kInf);
      return linf_fit(M, x, lb, ub, eq, rhs, nullptr) <= tol;
    }
  }
  return false;
}

// ---------------------------------------------------------------------------
// Set arithmetic

void bounding_box(const SetRep& S, Vec& lo, Vec& hi) {
  const int d = S.dim();
  lo.resize(d);
  hi.resize(d);
  switch (S.kind()) {
    case SetRep::Kind::Singleton:
      lo = hi = S.point();
      return;
    case SetRep::Kind::Box:
      lo = S.lo();
      hi = S.hi();
      return;
    default:
      for (int i = 0; i < d; ++i) {
        Vec e = Vec::Zero(d);
        e[i] = 1.0;
        hi[i] = S.support(e);
        lo[i] = -S.support(-e);
      }
  }
}

namespace {

SetRep to_vpoly(const SetRep& S) {
  if (S.kind() == SetRep::Kind::VPoly) return S;
  return SetRep::vpoly(S.vertex_list());
}

}  // namespace

Mat prune_hull(const Mat& vertices) {
  // Dedupe first, then drop points inside the hull of the rest.
  std::vector<Vec> pts;
  for (int j = 0; j < vertices.cols(); ++j) {
    bool dup = false;
    for (const Vec& p : pts)
      if ((p - vertices.col(j)).lpNorm<Eigen::Infinity>() <= 1e-12) {
        dup = true;
        break;
      }
    if (!dup) pts.push_back(vertices.col(j));
  }
  const int d = static_cast<int>(vertices.rows());
  for (size_t j = 0; j < pts.size() && pts.size() > 1;) {
    Mat others(d, pts.size() - 1);
    int c = 0;
    for (size_t i = 0; i < pts.size(); ++i)
      if (i != j) others.col(c++) = pts[i];
    Mat eq = Mat::Ones(1, others.cols());
    Vec rhs = Vec::Ones(1);
    Vec lb = Vec::Zero(others.cols());
    Vec ub = Vec::Constant(others.cols(), kInf);
    if (linf_fit(others, pts[j], lb, ub, eq, rhs, nullptr) <= 1e-10) {
      pts.erase(pts.begin() + j);
    } else {
      ++j;
    }
  }
  Mat out(d, pts.size());
  for (size_t j = 0; j < pts.size(); ++j) out.col(j) = pts[j];
  return out;
}

SetRep minkowski_sum(const SetRep& A, const SetRep& B) {
  if (A.dim() != B.dim())
    throw std::invalid_argument("minkowski_sum: dimension mismatch");
  using K = SetRep::Kind;
  // Singleton acts as translation.
  if (A.kind() == K::Singleton || B.kind() == K::Singleton) {
    const SetRep& s = (A.kind() == K::Singleton) ? A : B;
    const SetRep& o = (A.kind() == K::Singleton) ? B : A;
    const Vec& t = s.point();
    switch (o.kind()) {
      case K::Singleton:
        return SetRep::singleton(o.point() + t);
      case K::Box:
        return SetRep::box(o.lo() + t, o.hi() + t);
      case K::VPoly:
        return SetRep::vpoly(o.vertices().colwise() + t, o.rays());
      case K::HPoly: {
        PolyhedralSet P = o.poly();
        P.b += P.A * t;
        P.f += P.E * t;
        return SetRep::hpoly(P);
      }
    }
  }
  if (A.kind() == K::Box && B.kind() == K::Box) {
    Vec lo = A.lo() + B.lo();
    Vec hi = A.hi() + B.hi();
    for (int i = 0; i < lo.size(); ++i) {
      if (std::isnan(lo[i])) lo[i] = -kInf;
      if (std::isnan(hi[i])) hi[i] = kInf;
    }
    return SetRep::box(lo, hi);
  }
  if (A.dim() > kExactDimCap)
    throw std::domain_error("minkowski_sum: UNSUPPORTED_COMBINATION beyond dimension cap");
  if (!A.is_bounded() || !B.is_bounded())
    throw std::domain_error("minkowski_sum: UNSUPPORTED_COMBINATION (unbounded operand)");
  SetRep va = to_vpoly(A);
  SetRep vb = to_vpoly(B);
  const Mat& VA = va.vertices();
  const Mat& VB = vb.vertices();
  if (VA.cols() * VB.cols() > kExactVertexCap)
    throw std::domain_error("minkowski_sum: vertex cap exceeded");
  Mat sums(A.dim(), VA.cols() * VB.cols());
  int c = 0;
  for (int i = 0; i < VA.cols(); ++i)
    for (int j = 0; j < VB.cols(); ++j) sums.col(c++) = VA.col(i) + VB.col(j);
  return SetRep::vpoly(prune_hull(sums));
}

SetRep affine_image(const Mat& A, const SetRep& S, ImageMode mode) {
  if (A.cols() != S.dim())
    throw std::invalid_argument("affine_image: shape mismatch");
  if (mode == ImageMode::OuterBox) {
    Vec lo, hi;
    bounding_box(S, lo, hi);
    Vec c(S.dim()), r(S.dim());
    for (int i = 0; i < S.dim(); ++i) {
      if (std::isfinite(lo[i]) && std::isfinite(hi[i])) {
        c[i] = 0.5 * (lo[i] + hi[i]);
        r[i] = 0.5 * (hi[i] - lo[i]);
      } else {
        c[i] = 0.0;
        r[i] = kInf;
      }
    }
    Vec cc = A * c;
    Vec rr(A.rows());
    for (int i = 0; i < A.rows(); ++i) {
      double s = 0;
      for (int j = 0; j < A.cols(); ++j) {
        if (A(i, j) != 0.0) s += std::abs(A(i, j)) * r[j];
      }
      rr[i] = s;
    }
    Vec lo2(A.rows()), hi2(A.rows());
    for (int i = 0; i < A.rows(); ++i) {
      lo2[i] = std::isfinite(rr[i]) ? cc[i] - rr[i] : -kInf;
      hi2[i] = std::isfinite(rr[i]) ? cc[i] + rr[i] : kInf;
    }
    return SetRep::box(lo2, hi2);
  }
  // Exact mode.
  if (S.kind() == SetRep::Kind::Singleton)
    return SetRep::singleton(A * S.point());
  if (S.kind() == SetRep::Kind::VPoly) {
    Mat V = A * S.vertices();
    Mat R = S.rays().cols() ? Mat(A * S.rays()) : Mat::Zero(A.rows(), 0);
    return SetRep::vpoly(prune_hull(V), R);
  }
  if (!S.is_bounded())
    throw std::domain_error("affine_image: EXACT mode needs a bounded non-box input");
  return SetRep::vpoly(prune_hull(A * S.vertex_list()));
}

Mat enumerate_vertices(const PolyhedralSet& P) {
  const int d = P.dim;
  if (d > kExactDimCap)
    throw std::domain_error("enumerate_vertices: dimension cap exceeded");
  const int m = P.num_ineq();
  const int k = P.num_eq();
  std::vector<Vec> found;
  // Choose subsets of inequality rows to hold with equality alongside all
  // equality rows; a candidate is a vertex if the stacked system has full
  // column rank and the point is feasible.
  const int need = d;
  std::vector<int> idx(m);
  for (int i = 0; i < m; ++i) idx[i] = i;
  std::vector<int> combo;
  auto try_combo = [&](const std::vector<int>& rows) {
    Mat F(k + static_cast<int>(rows.size()), d);
    Vec g(F.rows());
    F.topRows(k) = P.E;
    g.head(k) = P.f;
    for (size_t i = 0; i < rows.size(); ++i) {
      F.row(k + i) = P.A.row(rows[i]);
      g[k + i] = P.b[rows[i]];
    }
    Eigen::JacobiSVD<Mat> svd(F, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vec& sv = svd.singularValues();
    if (sv.size() < d) return;
    const double smax = sv[0];
    if (sv[d - 1] < 1e-10 * std::max(1.0, smax)) return;
    Vec x = svd.solve(g);
    if ((F * x - g).lpNorm<Eigen::Infinity>() > 1e-8) return;
    if (!P.contains(x, 1e-8)) return;
    for (const Vec& y : found)
      if ((y - x).lpNorm<Eigen::Infinity>() <= 1e-9) return;
    found.push_back(x);
  };
  // Enumerate all subsets of size up to d (rank deficiency in E handled by
  // allowing extra rows up to d total constraints).
  std::vector<int> stack;
  std::function<void(int, int)> rec = [&](int start, int want) {
    if (want == 0) {
      try_combo(stack);
      return;
    }
    for (int i = start; i <= m - want; ++i) {
      stack.push_back(i);
      rec(i + 1, want - 1);
      stack.pop_back();
    }
  };
  for (int take = std::max(0, need - k); take <= std::min(need, m); ++take)
    rec(0, take);
  if (found.empty()) return Mat::Zero(d, 0);
  Mat out(d, found.size());
  for (size_t j = 0; j < found.size(); ++j) out.col(j) = found[j];
  return prune_hull(out);
}

// ---------------------------------------------------------------------------
// JSON

std::string SetRep::to_json() const {
  json j;
  switch (kind_) {
    case Kind::Singleton:
      j["type"] = "singleton";
      j["v"] = vec_to_json(v_);
      break;
    case Kind::Box:
      j["type"] = "box";
      j["lo"] = vec_to_json(lo_);
      j["hi"] = vec_to_json(hi_);
      break;
    case Kind::HPoly:
      j["type"] = "hpoly";
      j["A"] = mat_to_json(poly_.A);
      j["b"] = vec_to_json(poly_.b);
      j["E"] = mat_to_json(poly_.E);
      j["f"] = vec_to_json(poly_.f);
      break;
    case Kind::VPoly:
      j["type"] = "vpoly";
      j["vertices"] = mat_to_json(verts_.transpose());
      j["rays"] = mat_to_json(rays_.transpose());
      break;
  }
  return j.dump();
}

SetRep SetRep::from_json(const std::string& s) {
  json j = json::parse(s);
  const std::string type = j.at("type").get<std::string>();
  if (type == "singleton") return singleton(vec_from_json(j.at("v")));
  if (type == "box")
    return box(vec_from_json(j.at("lo")), vec_from_json(j.at("hi")));
  if (type == "hpoly") {
    PolyhedralSet P;
    P.A = mat_from_json(j.at("A"));
    P.b = vec_from_json(j.at("b"));
    P.E = mat_from_json(j.at("E"));
    P.f = vec_from_json(j.at("f"));
    P.dim = static_cast<int>(P.A.cols() ? P.A.cols() : P.E.cols());
    if (P.E.size() == 0) P.E = Mat::Zero(0, P.dim);
    if (P.A.size() == 0) P.A = Mat::Zero(0, P.dim);
    return hpoly(P);
  }
  if (type == "vpoly") {
    Mat V = mat_from_json(j.at("vertices")).transpose();
    Mat R = mat_from_json(j.at("rays")).transpose();
    if (R.rows() != V.rows()) R = Mat::Zero(V.rows(), 0);
    return vpoly(V, R);
  }
  throw std::invalid_argument("SetRep::from_json: unknown type " + type);
}

}  // namespace ocsens
