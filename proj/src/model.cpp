#include "ocsens/model.hpp"

#include <numeric>

namespace ocsens {

int ControlProblem::dim_x() const {
  return std::accumulate(state_dims.begin(), state_dims.end(), 0);
}
int ControlProblem::dim_u() const {
  return std::accumulate(control_dims.begin(), control_dims.end(), 0);
}
int ControlProblem::dim_w() const {
  return std::accumulate(param_dims.begin(), param_dims.end(), 0);
}
int ControlProblem::dim_xtilde() const { return dim_x() - state_dims[0]; }

int ControlProblem::x_offset(int k) const {
  return std::accumulate(state_dims.begin(), state_dims.begin() + k, 0);
}
int ControlProblem::u_offset(int k) const {
  return dim_x() +
         std::accumulate(control_dims.begin(), control_dims.begin() + k, 0);
}
int ControlProblem::w_offset(int k) const {
  return std::accumulate(param_dims.begin(), param_dims.begin() + k, 0);
}
int ControlProblem::xtilde_offset(int k) const {
  // k in 1..N; row offset of the block holding x_k.
  return std::accumulate(state_dims.begin() + 1, state_dims.begin() + k, 0);
}

std::vector<Vec> ControlProblem::simulate(const Vec& x0,
                                          const std::vector<Vec>& u,
                                          const Vec& w) const {
  std::vector<Vec> x(N + 1);
  x[0] = x0;
  for (int k = 0; k < N; ++k)
    x[k + 1] = A[k] * x[k] + B[k] * u[k] + T[k] * w.segment(w_offset(k), param_dims[k]);
  return x;
}

Vec ControlProblem::stage_arg(int k, const Vec& z, const Vec& w) const {
  Vec arg(state_dims[k] + control_dims[k] + param_dims[k]);
  arg.head(state_dims[k]) = z.segment(x_offset(k), state_dims[k]);
  arg.segment(state_dims[k], control_dims[k]) =
      z.segment(u_offset(k), control_dims[k]);
  arg.tail(param_dims[k]) = w.segment(w_offset(k), param_dims[k]);
  return arg;
}

Vec Solution::z(const ControlProblem& p) const {
  Vec out(p.dim_z());
  for (int k = 0; k <= p.N; ++k)
    out.segment(p.x_offset(k), p.state_dims[k]) = x[k];
  for (int k = 0; k < p.N; ++k)
    out.segment(p.u_offset(k), p.control_dims[k]) = u[k];
  return out;
}

Solution Solution::from_z(const ControlProblem& p, const Vec& z) {
  Solution s;
  s.x.resize(p.N + 1);
  s.u.resize(p.N);
  for (int k = 0; k <= p.N; ++k)
    s.x[k] = z.segment(p.x_offset(k), p.state_dims[k]);
  for (int k = 0; k < p.N; ++k)
    s.u[k] = z.segment(p.u_offset(k), p.control_dims[k]);
  return s;
}

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument("malformed problem: " + what);
}

}  // namespace

ValidationReport validate_problem(const ControlProblem& p) {
  // Hard structural errors first.
  require(p.N >= 1, "horizon must be positive");
  require(static_cast<int>(p.state_dims.size()) == p.N + 1, "state_dims size");
  require(static_cast<int>(p.control_dims.size()) == p.N, "control_dims size");
  require(static_cast<int>(p.param_dims.size()) == p.N, "param_dims size");
  require(static_cast<int>(p.A.size()) == p.N, "A list size");
  require(static_cast<int>(p.B.size()) == p.N, "B list size");
  require(static_cast<int>(p.T.size()) == p.N, "T list size");
  require(static_cast<int>(p.stage_costs.size()) == p.N, "stage cost list size");
  require(static_cast<int>(p.control_sets.size()) == p.N, "control set list size");

  ValidationReport rep;
  auto check = [&](const std::string& name, bool ok, std::string msg = "") {
    rep.checks.push_back({name, ok, std::move(msg)});
  };

  bool shapes = true;
  for (int k = 0; k < p.N; ++k) {
    if (p.A[k].rows() != p.state_dims[k + 1] || p.A[k].cols() != p.state_dims[k])
      shapes = false;
    if (p.B[k].rows() != p.state_dims[k + 1] || p.B[k].cols() != p.control_dims[k])
      shapes = false;
    if (p.T[k].rows() != p.state_dims[k + 1] || p.T[k].cols() != p.param_dims[k])
      shapes = false;
    if (p.stage_costs[k].dim() !=
        p.state_dims[k] + p.control_dims[k] + p.param_dims[k])
      shapes = false;
    if (p.control_sets[k].dim != p.control_dims[k]) shapes = false;
  }
  if (p.terminal_cost.dim() != p.state_dims[p.N]) shapes = false;
  if (p.initial_set.dim != p.state_dims[0]) shapes = false;
  check("shape_consistency", shapes);

  for (int k = 0; k < p.N; ++k)
    check("convexity_h" + std::to_string(k), p.stage_costs[k].is_convex(),
          "quadratic part must be PSD and atom weights nonnegative");
  check("convexity_hN", p.terminal_cost.is_convex());

  for (int k = 0; k < p.N; ++k)
    check("interior_Omega" + std::to_string(k), p.control_sets[k].has_interior(),
          "control set must have nonempty interior");
  return rep;
}

AssembledSystem assemble_operators(const ControlProblem& p) {
  const int rows = p.dim_xtilde();
  AssembledSystem sys;
  sys.M = Mat::Zero(rows, p.dim_z());
  sys.T = Mat::Zero(rows, p.dim_w());
  for (int k = 0; k < p.N; ++k) {
    const int r = p.xtilde_offset(k + 1);
    const int nk1 = p.state_dims[k + 1];
    sys.M.block(r, p.x_offset(k), nk1, p.state_dims[k]) = -p.A[k];
    sys.M.block(r, p.x_offset(k + 1), nk1, nk1) = Mat::Identity(nk1, nk1);
    sys.M.block(r, p.u_offset(k), nk1, p.control_dims[k]) = -p.B[k];
    sys.T.block(r, p.w_offset(k), nk1, p.param_dims[k]) = p.T[k];
  }
  // K = C x Xtilde x Omega embedded in z-space.
  const auto& C = p.initial_set;
  int n_in = C.num_ineq(), n_eq = C.num_eq();
  for (const auto& Om : p.control_sets) {
    n_in += Om.num_ineq();
    n_eq += Om.num_eq();
  }
  PolyhedralSet K = PolyhedralSet::whole_space(p.dim_z());
  K.A = Mat::Zero(n_in, p.dim_z());
  K.b = Vec::Zero(n_in);
  K.E = Mat::Zero(n_eq, p.dim_z());
  K.f = Vec::Zero(n_eq);
  int ri = 0, re = 0;
  K.A.block(ri, p.x_offset(0), C.num_ineq(), C.dim) = C.A;
  K.b.segment(ri, C.num_ineq()) = C.b;
  ri += C.num_ineq();
  K.E.block(re, p.x_offset(0), C.num_eq(), C.dim) = C.E;
  K.f.segment(re, C.num_eq()) = C.f;
  re += C.num_eq();
  for (int k = 0; k < p.N; ++k) {
    const auto& Om = p.control_sets[k];
    K.A.block(ri, p.u_offset(k), Om.num_ineq(), Om.dim) = Om.A;
    K.b.segment(ri, Om.num_ineq()) = Om.b;
    ri += Om.num_ineq();
    K.E.block(re, p.u_offset(k), Om.num_eq(), Om.dim) = Om.E;
    K.f.segment(re, Om.num_eq()) = Om.f;
    re += Om.num_eq();
  }
  sys.K = K;
  return sys;
}

double evaluate_objective(const ControlProblem& p, const Solution& sol,
                          const ParameterVector& w) {
  Vec z = sol.z(p);
  double v = p.terminal_cost.eval(sol.x[p.N]);
  for (int k = 0; k < p.N; ++k)
    v += p.stage_costs[k].eval(p.stage_arg(k, z, w));
  return v;
}

std::vector<Vec> kernel_basis(const Mat& M) {
  if (M.cols() == 0) return {};
  if (M.rows() == 0) {
    std::vector<Vec> basis;
    for (int j = 0; j < M.cols(); ++j) {
      Vec e = Vec::Zero(M.cols());
      e[j] = 1.0;
      basis.push_back(e);
    }
    return basis;
  }
  Eigen::JacobiSVD<Mat> svd(M, Eigen::ComputeFullV);
  const Vec& sv = svd.singularValues();
  const double smax = sv.size() ? sv[0] : 0.0;
  const double thresh = Tol::rank_rel * std::max(smax, 1e-300);
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv[i] > thresh) ++rank;
  std::vector<Vec> basis;
  for (int j = rank; j < M.cols(); ++j) basis.push_back(svd.matrixV().col(j));
  return basis;
}

}  // namespace ocsens
