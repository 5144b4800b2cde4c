#pragma once

#include <string>

#include "ocsens/model.hpp"
#include "ocsens/sensitivity.hpp"
#include "ocsens/solver.hpp"

namespace ocsens {

/// A problem file bundles the model with the nominal parameter wbar.
struct ProblemFile {
  ControlProblem problem;
  ParameterVector wbar;
};

/// Parse a problem document. Shape errors and malformed JSON throw
/// std::runtime_error with a diagnostic (including line/column for
/// syntax errors).
ProblemFile problem_from_json_text(const std::string& text);
ProblemFile load_problem(const std::string& path);

/// Report writers. All numbers are rounded to 12 significant digits so
/// report files diff cleanly across runs.
std::string solve_report_json(const ControlProblem& p,
                              const ParameterVector& w, const SolveResult& r);
std::string sensitivity_report_json(const SensitivityReport& rep,
                                    const RegularityReport& reg);

}  // namespace ocsens
