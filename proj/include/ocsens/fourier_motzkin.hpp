#pragma once

#include <vector>

#include "ocsens/set_rep.hpp"
#include "ocsens/types.hpp"

namespace ocsens {

/// Linear inequality/equality system { x : A x <= b, E x == f }.
struct HSystem {
  Mat A;
  Vec b;
  Mat E;
  Vec f;
  bool infeasible = false;  // set when elimination derives 0 <= negative

  int dim() const { return static_cast<int>(A.cols() ? A.cols() : E.cols()); }
};

/// Project onto the coordinates listed in `keep` (in that order).
/// Equality rows are used as Gaussian pivots first; the remaining
/// variables are removed by Fourier-Motzkin with LP-based redundancy
/// pruning after each elimination step.
HSystem fm_project(const HSystem& sys, const std::vector<int>& keep);

/// Wrap a projected system as a polyhedral SetRep.
SetRep hsystem_to_set(const HSystem& sys);

}  // namespace ocsens
