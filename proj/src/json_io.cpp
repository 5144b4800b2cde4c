#include "ocsens/json_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace ocsens {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& msg) {
  throw std::runtime_error("INPUT_ERROR: " + msg);
}

Vec parse_vec(const json& a, int expect, const std::string& what) {
  if (!a.is_array()) fail(what + " must be an array");
  if (expect >= 0 && static_cast<int>(a.size()) != expect)
    fail(what + " has length " + std::to_string(a.size()) + ", expected " +
         std::to_string(expect));
  Vec v(a.size());
  for (size_t i = 0; i < a.size(); ++i) {
    if (!a[i].is_number()) fail(what + " has a non-numeric entry");
    v[i] = a[i].get<double>();
  }
  return v;
}

Mat parse_mat(const json& rows, int r, int c, const std::string& what) {
  if (!rows.is_array()) fail(what + " must be an array of rows");
  if (static_cast<int>(rows.size()) != r)
    fail(what + " has " + std::to_string(rows.size()) + " rows, expected " +
         std::to_string(r));
  Mat m(r, c);
  for (int i = 0; i < r; ++i)
    m.row(i) = parse_vec(rows[i], c, what + " row").transpose();
  return m;
}

ConvexExpr parse_cost(const json& j, int dim, const std::string& what) {
  Mat Q = Mat::Zero(dim, dim);
  Vec q = Vec::Zero(dim);
  double c = 0.0;
  if (j.contains("quadratic")) {
    const json& quad = j["quadratic"];
    if (quad.contains("Q")) Q = parse_mat(quad["Q"], dim, dim, what + ".Q");
    if (quad.contains("q")) q = parse_vec(quad["q"], dim, what + ".q");
    if (quad.contains("c")) c = quad["c"].get<double>();
  }
  ConvexExpr e(std::move(Q), std::move(q), c);
  if (j.contains("abs_atoms")) {
    for (const json& atom : j["abs_atoms"]) {
      const double weight =
          atom.contains("weight") ? atom["weight"].get<double>() : 1.0;
      const double b = atom.contains("b") ? atom["b"].get<double>() : 0.0;
      e.add_abs(parse_vec(atom.at("a"), dim, what + " atom.a"), b, weight);
    }
  }
  return e;
}

PolyhedralSet parse_set(const json& j, int dim, const std::string& what) {
  std::vector<std::pair<Vec, double>> ineq, eq;
  if (j.contains("ineq"))
    for (const json& row : j["ineq"])
      ineq.emplace_back(parse_vec(row.at("a"), dim, what + ".ineq.a"),
                        row.at("alpha").get<double>());
  if (j.contains("eq"))
    for (const json& row : j["eq"])
      eq.emplace_back(parse_vec(row.at("b"), dim, what + ".eq.b"),
                      row.at("beta").get<double>());
  PolyhedralSet S = PolyhedralSet::whole_space(dim);
  S.A = Mat::Zero(ineq.size(), dim);
  S.b = Vec::Zero(ineq.size());
  for (size_t i = 0; i < ineq.size(); ++i) {
    S.A.row(i) = ineq[i].first.transpose();
    S.b[i] = ineq[i].second;
  }
  S.E = Mat::Zero(eq.size(), dim);
  S.f = Vec::Zero(eq.size());
  for (size_t i = 0; i < eq.size(); ++i) {
    S.E.row(i) = eq[i].first.transpose();
    S.f[i] = eq[i].second;
  }
  return S;
}

// Round to 12 significant digits for stable, diffable reports.
double sig12(double x) {
  if (!std::isfinite(x) || x == 0.0) return x;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return std::strtod(buf, nullptr);
}

json round_numbers(json j) {
  if (j.is_number_float())
    return json(sig12(j.get<double>()));
  if (j.is_array() || j.is_object())
    for (auto& el : j) el = round_numbers(el);
  return j;
}

json vec_json(const Vec& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) {
    if (std::isinf(v[i]))
      a.push_back(v[i] > 0 ? json("inf") : json("-inf"));
    else
      a.push_back(v[i]);
  }
  return a;
}

}  // namespace

ProblemFile problem_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(std::string("malformed JSON: ") + e.what());
  }

  ControlProblem p;
  try {
    p.N = j.at("horizon").get<int>();
    if (p.N < 1) fail("horizon must be >= 1");
    const json& dims = j.at("dims");
    for (const json& d : dims.at("state")) p.state_dims.push_back(d.get<int>());
    for (const json& d : dims.at("control"))
      p.control_dims.push_back(d.get<int>());
    for (const json& d : dims.at("param")) p.param_dims.push_back(d.get<int>());
    if (static_cast<int>(p.state_dims.size()) != p.N + 1)
      fail("dims.state must have horizon+1 entries");
    if (static_cast<int>(p.control_dims.size()) != p.N)
      fail("dims.control must have horizon entries");
    if (static_cast<int>(p.param_dims.size()) != p.N)
      fail("dims.param must have horizon entries");

    const json& dyn = j.at("dynamics");
    if (static_cast<int>(dyn.size()) != p.N)
      fail("dynamics must have horizon entries");
    for (int k = 0; k < p.N; ++k) {
      const int nn = p.state_dims[k + 1];
      p.A.push_back(parse_mat(dyn[k].at("A"), nn, p.state_dims[k], "A"));
      p.B.push_back(parse_mat(dyn[k].at("B"), nn, p.control_dims[k], "B"));
      p.T.push_back(parse_mat(dyn[k].at("T"), nn, p.param_dims[k], "T"));
    }

    const json& costs = j.at("costs");
    if (static_cast<int>(costs.size()) != p.N)
      fail("costs must have horizon entries");
    for (int k = 0; k < p.N; ++k) {
      const int d = p.state_dims[k] + p.control_dims[k] + p.param_dims[k];
      p.stage_costs.push_back(parse_cost(costs[k], d, "costs[k]"));
    }
    p.terminal_cost =
        parse_cost(j.at("terminal_cost"), p.state_dims[p.N], "terminal_cost");

    p.initial_set = parse_set(j.value("initial_set", json::object()),
                              p.state_dims[0], "initial_set");
    const json ctrl = j.value("control_sets", json::array());
    for (int k = 0; k < p.N; ++k) {
      const json blk =
          k < static_cast<int>(ctrl.size()) ? ctrl[k] : json::object();
      p.control_sets.push_back(parse_set(blk, p.control_dims[k],
                                         "control_sets[k]"));
    }
  } catch (const json::exception& e) {
    fail(std::string("schema: ") + e.what());
  }

  ProblemFile f;
  f.wbar = j.contains("wbar")
               ? parse_vec(j["wbar"], p.dim_w(), "wbar")
               : Vec::Zero(p.dim_w());
  f.problem = std::move(p);
  return f;
}

ProblemFile load_problem(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return problem_from_json_text(ss.str());
}

std::string solve_report_json(const ControlProblem& p,
                              const ParameterVector& w, const SolveResult& r) {
  json j;
  switch (r.status) {
    case SolveStatus::Optimal: j["status"] = "OPTIMAL"; break;
    case SolveStatus::Infeasible: j["status"] = "INFEASIBLE"; break;
    case SolveStatus::Unbounded: j["status"] = "UNBOUNDED"; break;
    case SolveStatus::MaxIter: j["status"] = "MAX_ITER"; break;
  }
  j["wbar"] = vec_json(w);
  if (r.status == SolveStatus::Optimal) {
    j["value"] = r.value;
    json xs = json::array(), us = json::array();
    for (const Vec& x : r.solution.x) xs.push_back(vec_json(x));
    for (const Vec& u : r.solution.u) us.push_back(vec_json(u));
    j["x"] = xs;
    j["u"] = us;
    j["z"] = vec_json(r.solution.z(p));
    if (r.kkt) {
      j["kkt"]["residual"] = r.kkt->residual;
      j["kkt"]["lambda"] = vec_json(r.kkt->lambda);
      j["kkt"]["mu"] = vec_json(r.kkt->mu);
    }
  }
  j["iterations"] = r.iterations;
  return round_numbers(j).dump(2);
}

std::string sensitivity_report_json(const SensitivityReport& rep,
                                    const RegularityReport& reg) {
  json j;
  switch (rep.mode) {
    case SensMode::SmoothExact: j["mode"] = "SMOOTH_EXACT"; break;
    case SensMode::OuterInterval: j["mode"] = "OUTER_INTERVAL"; break;
    case SensMode::OuterPolytope: j["mode"] = "OUTER_POLYTOPE"; break;
  }
  j["subdiff_V"] = json::parse(rep.subdiff_V.to_json());
  j["singular_subdiff_V"] = json::parse(rep.singular_subdiff_V.to_json());
  if (rep.chain) {
    json c;
    c["x0star"] = vec_json(rep.chain->x0star);
    json xt = json::array(), us = json::array(), ws = json::array();
    for (const Vec& v : rep.chain->xtilde) xt.push_back(vec_json(v));
    for (const Vec& v : rep.chain->ustar) us.push_back(vec_json(v));
    for (const Vec& v : rep.chain->wstar) ws.push_back(vec_json(v));
    c["xtilde"] = xt;
    c["ustar"] = us;
    c["wstar"] = ws;
    j["chain"] = c;
  }
  json cc = json::array();
  for (const auto& [name, ok] : rep.cone_checks)
    cc.push_back({{"name", name}, {"pass", ok}});
  j["cone_checks"] = cc;
  json rj;
  rj["closed_range"] = reg.closed_range;
  rj["closed_range_note"] = reg.closed_range_note;
  rj["kernel_inclusion_holds"] = reg.kernel_inclusion_holds;
  rj["dim_ker_T_star"] = reg.ker_T_star_basis.size();
  rj["dim_ker_M_star"] = reg.ker_M_star_basis.size();
  rj["surjectivity_shortcut"] = reg.surjectivity_shortcut;
  j["regularity"] = rj;
  if (rep.oracle_check) {
    j["oracle_check"]["pass"] = rep.oracle_check->pass;
    j["oracle_check"]["worst_margin"] = rep.oracle_check->worst_margin;
    j["oracle_check"]["worst_point"] = vec_json(rep.oracle_check->worst_point);
  }
  j["interval_fallback"] = rep.interval_fallback;
  j["empty_estimate"] = rep.empty_estimate;
  if (rep.error) j["error"] = *rep.error;
  return round_numbers(j).dump(2);
}

}  // namespace ocsens
