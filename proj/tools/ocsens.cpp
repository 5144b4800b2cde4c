// Command-line front end: solve a problem file, compute value-function
// sensitivity, run verification suites, or sweep V(w) over a grid.
#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ocsens/json_io.hpp"
#include "ocsens/sensitivity.hpp"
#include "ocsens/solver.hpp"

using namespace ocsens;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitNotOptimal = 2;  // infeasible/unbounded, or failed checks
constexpr int kExitRegularity = 3;

int log_level() {
  const char* e = std::getenv("OCSENS_LOG");
  return e ? std::atoi(e) : 0;
}

void logln(const std::string& s) {
  if (log_level() > 0) std::cerr << "[ocsens] " << s << "\n";
}

struct Opts {
  std::string path;
  std::string out;
  std::string format = "json";
  std::string mode = "auto";
  std::vector<double> wbar;
  double grid_radius = 0.1;
  int grid_points = 5;
  double tol = 1e-6;
};

void write_out(const Opts& o, const std::string& text) {
  if (o.out.empty()) {
    std::cout << text << "\n";
    return;
  }
  std::ofstream f(o.out);
  if (!f) throw std::runtime_error("INPUT_ERROR: cannot write " + o.out);
  f << text << "\n";
  logln("wrote " + o.out);
}

std::string fmt12(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

ProblemFile load(const Opts& o) {
  ProblemFile f = load_problem(o.path);
  if (!o.wbar.empty()) {
    if (static_cast<int>(o.wbar.size()) != f.problem.dim_w())
      throw std::runtime_error("INPUT_ERROR: --wbar length mismatch");
    f.wbar = Eigen::Map<const Vec>(o.wbar.data(), o.wbar.size());
  }
  auto v = validate_problem(f.problem);
  if (!v.all_passed()) {
    std::string msg = "INPUT_ERROR: validation failed:";
    for (const auto& c : v.checks)
      if (!c.passed) msg += " " + c.name;
    throw std::runtime_error(msg);
  }
  return f;
}

OracleGrid make_grid(const ControlProblem& p, const Vec& wbar, const Opts& o) {
  OracleGrid g;
  g.center = wbar;
  g.radii = Vec::Constant(p.dim_w(), o.grid_radius);
  g.points_per_axis = o.grid_points | 1;  // oracle wants an odd count
  logln("grid oracle: " + std::to_string(g.num_points()) + " solves");
  return grid_oracle(p, g);
}

// auto: smooth when every gradient exists at the solution, else the
// projected polytope (which itself falls back to intervals past the
// dimension cap).
SensitivityReport run_sensitivity(const ProblemFile& f, const Solution& sol,
                                  const std::string& mode) {
  if (mode == "smooth") return subdiff_V_smooth(f.problem, f.wbar, sol);
  if (mode == "interval")
    return subdiff_V_outer(f.problem, f.wbar, sol, SensMode::OuterInterval);
  if (mode == "polytope")
    return subdiff_V_outer(f.problem, f.wbar, sol, SensMode::OuterPolytope);
  try {
    return subdiff_V_smooth(f.problem, f.wbar, sol);
  } catch (const NotSmoothError&) {
    logln("solution not smooth; switching to the polytope estimate");
    return subdiff_V_outer(f.problem, f.wbar, sol, SensMode::OuterPolytope);
  }
}

int cmd_solve(const Opts& o) {
  ProblemFile f = load(o);
  SolveResult r = solve(f.problem, f.wbar);
  write_out(o, solve_report_json(f.problem, f.wbar, r));
  return r.status == SolveStatus::Optimal ? kExitOk : kExitNotOptimal;
}

int cmd_sens(const Opts& o) {
  ProblemFile f = load(o);
  AssembledSystem sys = assemble_operators(f.problem);
  RegularityReport reg = check_regularity(f.problem, sys);
  if (!reg.holds()) {
    std::cerr << "regularity failure: ker T* not inside ker M*\n";
    for (const Vec& v : reg.ker_T_star_basis) {
      if ((sys.M.transpose() * v).norm() > 1e-9) {
        std::cerr << "failing kernel vector: "
                  << v.transpose().format(Eigen::IOFormat(12)) << "\n";
        break;
      }
    }
    return kExitRegularity;
  }
  SolveResult r = solve(f.problem, f.wbar);
  if (r.status != SolveStatus::Optimal) {
    write_out(o, solve_report_json(f.problem, f.wbar, r));
    return kExitNotOptimal;
  }
  SensitivityReport rep = run_sensitivity(f, r.solution, o.mode);
  if (rep.subdiff_V.is_bounded()) {
    OracleGrid g = make_grid(f.problem, f.wbar, o);
    rep.oracle_check = oracle_check_set(rep.subdiff_V, f.wbar, r.value, g);
  }
  write_out(o, sensitivity_report_json(rep, reg));
  return kExitOk;
}

int cmd_verify(const Opts& o, const std::vector<double>& cand) {
  ProblemFile f = load(o);
  SolveResult r = solve(f.problem, f.wbar);
  if (r.status != SolveStatus::Optimal) {
    write_out(o, solve_report_json(f.problem, f.wbar, r));
    return kExitNotOptimal;
  }
  json checks = json::array();
  bool all = true;
  auto record = [&](const std::string& name, bool pass, json extra = {}) {
    json c = {{"name", name}, {"pass", pass}};
    if (!extra.is_null()) c["detail"] = extra;
    checks.push_back(c);
    all = all && pass;
    if (!pass) logln("FAIL " + name);
  };

  record("kkt_certificate", kkt_verify(f.problem, f.wbar, r.solution).has_value());

  OracleGrid g = make_grid(f.problem, f.wbar, o);
  if (cand.empty()) {
    SensitivityReport rep = run_sensitivity(f, r.solution, o.mode);
    if (rep.subdiff_V.is_bounded()) {
      CheckReport chk = oracle_check_set(rep.subdiff_V, f.wbar, r.value, g);
      json detail = {{"worst_margin", chk.worst_margin}};
      record("subgradient_inequality", chk.worst_margin >= -o.tol, detail);
    } else {
      record("subgradient_inequality", false,
             json{{"reason", "unbounded estimate"}});
    }
    record("singular_subdiff_zero",
           singular_subdiff_V(f.problem, f.wbar, r.solution).point().norm() ==
               0.0);
  } else {
    if (static_cast<int>(cand.size()) != f.problem.dim_w())
      throw std::runtime_error("INPUT_ERROR: --cand length mismatch");
    Vec c = Eigen::Map<const Vec>(cand.data(), cand.size());
    CheckReport chk = subgradient_inequality_check(f.wbar, r.value, c, g);
    json detail = {{"worst_margin", chk.worst_margin}};
    if (chk.worst_point.size())
      detail["worst_point"] = std::vector<double>(
          chk.worst_point.data(), chk.worst_point.data() + chk.worst_point.size());
    record("candidate_subgradient", chk.worst_margin >= -o.tol, detail);
  }

  json out = {{"pass", all}, {"checks", checks}};
  write_out(o, out.dump(2));
  return all ? kExitOk : kExitNotOptimal;
}

int cmd_sweep(const Opts& o) {
  ProblemFile f = load(o);
  const int d = f.problem.dim_w();
  if (d > 2)
    throw std::runtime_error("INPUT_ERROR: sweep supports 1- or 2-dim parameters");
  if (o.format != "csv" && o.format != "json")
    throw std::runtime_error("INPUT_ERROR: --format must be json or csv");
  const int n = std::max(1, o.grid_points);
  auto axis_value = [&](int axis, int i) {
    if (n == 1 || o.grid_radius == 0.0) return f.wbar[axis];
    return f.wbar[axis] - o.grid_radius +
           2.0 * o.grid_radius * static_cast<double>(i) / (n - 1);
  };
  const int rows = (o.grid_radius == 0.0) ? 1 : (d == 1 ? n : n * n);

  std::ostringstream csv;
  for (int a = 0; a < d; ++a) csv << "w_" << a << ",";
  csv << "V";
  for (int a = 0; a < d; ++a) csv << ",wstar_" << a;
  csv << "\n";
  for (int idx = 0; idx < rows; ++idx) {
    Vec w(d);
    if (o.grid_radius == 0.0)
      w = f.wbar;
    else if (d == 1)
      w[0] = axis_value(0, idx);
    else {
      w[0] = axis_value(0, idx / n);
      w[1] = axis_value(1, idx % n);
    }
    SolveResult r = solve(f.problem, w);
    for (int a = 0; a < d; ++a) csv << fmt12(w[a]) << ",";
    if (r.status != SolveStatus::Optimal) {
      csv << (r.status == SolveStatus::Infeasible ? "inf" : "-inf");
      for (int a = 0; a < d; ++a) csv << ",";
      csv << "\n";
      continue;
    }
    csv << fmt12(r.value);
    // w* columns only where V is differentiable.
    bool smooth = true;
    Vec ws;
    try {
      SensitivityReport rep = subdiff_V_smooth(f.problem, w, r.solution);
      ws = rep.subdiff_V.point();
    } catch (const NotSmoothError&) {
      smooth = false;
    }
    for (int a = 0; a < d; ++a) {
      csv << ",";
      if (smooth) csv << fmt12(ws[a]);
    }
    csv << "\n";
  }
  write_out(o, csv.str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"parametric optimal-control sensitivity toolkit"};
  app.require_subcommand(1);

  Opts o;
  std::vector<double> cand;
  auto add_common = [&](CLI::App* c) {
    c->add_option("problem", o.path, "problem JSON file")->required();
    c->add_option("--wbar", o.wbar, "override the nominal parameter");
    c->add_option("--out", o.out, "output path (default: stdout)");
    c->add_option("--tol", o.tol, "margin tolerance for checks");
  };
  auto add_grid = [&](CLI::App* c) {
    c->add_option("--grid-radius", o.grid_radius, "oracle grid radius");
    c->add_option("--grid-points", o.grid_points, "points per axis");
  };

  CLI::App* solve_cmd = app.add_subcommand("solve", "solve at fixed w");
  add_common(solve_cmd);

  CLI::App* sens_cmd =
      app.add_subcommand("sens", "subdifferential of the value function");
  add_common(sens_cmd);
  add_grid(sens_cmd);
  sens_cmd->add_option("--mode", o.mode, "smooth|interval|polytope|auto")
      ->check(CLI::IsMember({"smooth", "interval", "polytope", "auto"}));

  CLI::App* verify_cmd =
      app.add_subcommand("verify", "oracle-based verification suite");
  add_common(verify_cmd);
  add_grid(verify_cmd);
  verify_cmd->add_option("--mode", o.mode, "smooth|interval|polytope|auto")
      ->check(CLI::IsMember({"smooth", "interval", "polytope", "auto"}));
  verify_cmd->add_option("--cand", cand,
                         "check this candidate subgradient instead");

  CLI::App* sweep_cmd = app.add_subcommand("sweep", "CSV sweep of V(w)");
  add_common(sweep_cmd);
  add_grid(sweep_cmd);
  sweep_cmd->add_option("--format", o.format, "json|csv");

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve_cmd->parsed()) return cmd_solve(o);
    if (sens_cmd->parsed()) return cmd_sens(o);
    if (verify_cmd->parsed()) return cmd_verify(o, cand);
    if (sweep_cmd->parsed()) return cmd_sweep(o);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitInput;
}
