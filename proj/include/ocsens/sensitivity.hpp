#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ocsens/model.hpp"
#include "ocsens/set_rep.hpp"
#include "ocsens/solver.hpp"
#include "ocsens/types.hpp"

namespace ocsens {

/// Backward dual chain: state multipliers and the induced multipliers for
/// the initial state, controls and parameters.
struct AdjointChain {
  std::vector<Vec> xtilde;  // xtilde*_1 .. xtilde*_N
  Vec x0star;
  std::vector<Vec> ustar;  // u*_0 .. u*_{N-1}
  std::vector<Vec> wstar;  // w*_0 .. w*_{N-1}

  Vec wstar_stacked() const;
};

struct RegularityReport {
  bool closed_range = true;
  std::string closed_range_note = "automatic in finite dimensions";
  bool kernel_inclusion_holds = false;  // ker T* subset ker M*
  std::vector<Vec> ker_T_star_basis;
  std::vector<Vec> ker_M_star_basis;
  std::vector<bool> surjectivity_shortcut;  // per-stage T_k surjective

  bool holds() const { return closed_range && kernel_inclusion_holds; }
};

/// Kernel-inclusion condition ker T* subset ker M* plus the per-stage
/// surjectivity shortcut.
RegularityReport check_regularity(const ControlProblem& p,
                                  const AssembledSystem& sys);

enum class SensMode { SmoothExact, OuterInterval, OuterPolytope };

struct SensitivityReport {
  SensMode mode = SensMode::SmoothExact;
  SetRep subdiff_V = SetRep::singleton(Vec::Zero(0));
  SetRep singular_subdiff_V = SetRep::singleton(Vec::Zero(0));
  std::optional<AdjointChain> chain;
  std::vector<std::pair<std::string, bool>> cone_checks;
  std::optional<CheckReport> oracle_check;
  bool interval_fallback = false;  // polytope mode fell back (dim cap)
  bool empty_estimate = false;     // cone intersection came back empty
  std::optional<std::string> error;  // e.g. CONE_CHECK_FAILED
};

struct NotSmoothError : std::runtime_error {
  NotSmoothError() : std::runtime_error("NOT_SMOOTH: a stage cost is not differentiable at the solution") {}
};

/// Exact subdifferential in the differentiable case: backward recursion
/// for the state multipliers, cone membership checks for x0* and u*,
/// singleton dV = {w*}. Throws NotSmoothError if any gradient is
/// undefined; a failed cone check is reported in `error`, not repaired.
SensitivityReport subdiff_V_smooth(const ControlProblem& p,
                                   const ParameterVector& wbar,
                                   const Solution& sol);

/// Outer estimates in the nonsmooth case.
///   OuterInterval: interval propagation of the inclusion system with a
///     one-shot normal-cone intersection (the bound the smooth-case
///     relaxation produces by hand).
///   OuterPolytope: the full inclusion system lifted to one H-polyhedron
///     and projected onto the w* block by Fourier-Motzkin; always
///     contained in the interval result.
SensitivityReport subdiff_V_outer(const ControlProblem& p,
                                  const ParameterVector& wbar,
                                  const Solution& sol, SensMode mode);

/// Always the zero singleton; the zero-initialized recursion is run as a
/// self-check.
SetRep singular_subdiff_V(const ControlProblem& p, const ParameterVector& wbar,
                          const Solution& sol);

enum class Membership { Member, NotMember, Undecided };

/// Marginal-function membership test: cand in dV(wbar) iff the linear
/// system  M* x* = z* + v*,  cand = w* + T* x*  with z* in d_z f,
/// w* in d_w f, v* in N(zbar; K) is feasible (LP).
Membership membership_general(const ControlProblem& p,
                              const AssembledSystem& sys, const Vec& zbar,
                              const ParameterVector& wbar, const Vec& cand);

/// Worst subgradient-inequality margin over the vertices of a bounded set.
CheckReport oracle_check_set(const SetRep& S, const ParameterVector& wbar,
                             double Vbar, const OracleGrid& grid);

}  // namespace ocsens
