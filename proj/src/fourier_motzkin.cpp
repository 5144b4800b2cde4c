#include "ocsens/fourier_motzkin.hpp"

#include <algorithm>
#include <cmath>

#include "ocsens/lp.hpp"

namespace ocsens {
namespace {

constexpr double kCoefTol = 1e-11;

struct Work {
  std::vector<Vec> arows;
  std::vector<double> ab;
  std::vector<Vec> erows;
  std::vector<double> ef;
  int dim = 0;
  bool infeasible = false;

  void normalize_and_dedupe() {
    // Scale each inequality to unit row norm, drop trivial rows and
    // near-duplicates.
    std::vector<Vec> out;
    std::vector<double> outb;
    for (size_t i = 0; i < arows.size(); ++i) {
      double n = arows[i].norm();
      if (n <= kCoefTol) {
        if (ab[i] < -1e-9) infeasible = true;
        continue;
      }
      Vec r = arows[i] / n;
      double rb = ab[i] / n;
      bool dup = false;
      for (size_t j = 0; j < out.size(); ++j) {
        if ((out[j] - r).lpNorm<Eigen::Infinity>() <= 1e-12) {
          outb[j] = std::min(outb[j], rb);
          dup = true;
          break;
        }
      }
      if (!dup) {
        out.push_back(r);
        outb.push_back(rb);
      }
    }
    arows = std::move(out);
    ab = std::move(outb);
  }

  // Remove inequality rows implied by the rest (LP redundancy test).
  void prune_lp() {
    for (size_t i = 0; i < arows.size();) {
      LinearProgram lp;
      lp.c = -arows[i];
      lp.A_ub = Mat::Zero(arows.size() - 1, dim);
      lp.b_ub = Vec::Zero(arows.size() - 1);
      int r = 0;
      for (size_t j = 0; j < arows.size(); ++j) {
        if (j == i) continue;
        lp.A_ub.row(r) = arows[j].transpose();
        lp.b_ub[r] = ab[j];
        ++r;
      }
      lp.A_eq = Mat::Zero(erows.size(), dim);
      lp.b_eq = Vec::Zero(erows.size());
      for (size_t j = 0; j < erows.size(); ++j) {
        lp.A_eq.row(j) = erows[j].transpose();
        lp.b_eq[j] = ef[j];
      }
      LpResult res = solve_lp(lp);
      bool redundant = false;
      if (res.status == LpStatus::Optimal && -res.objective <= ab[i] + 1e-9)
        redundant = true;
      if (res.status == LpStatus::Infeasible) {
        // System without row i already empty; everything is redundant, but
        // keep the row so the projected set stays a faithful description.
        redundant = false;
      }
      if (redundant)
        arows.erase(arows.begin() + i), ab.erase(ab.begin() + i);
      else
        ++i;
    }
  }
};

}  // namespace

HSystem fm_project(const HSystem& sys, const std::vector<int>& keep) {
  const int d = sys.dim();
  Work w;
  w.dim = d;
  for (int i = 0; i < sys.b.size(); ++i) {
    w.arows.push_back(sys.A.row(i).transpose());
    w.ab.push_back(sys.b[i]);
  }
  for (int i = 0; i < sys.f.size(); ++i) {
    w.erows.push_back(sys.E.row(i).transpose());
    w.ef.push_back(sys.f[i]);
  }

  std::vector<bool> is_keep(d, false);
  for (int k : keep) is_keep[k] = true;
  std::vector<int> elim;
  for (int j = 0; j < d; ++j)
    if (!is_keep[j]) elim.push_back(j);

  // Phase 1: Gaussian elimination on equality rows.
  std::vector<bool> done(d, false);
  for (int j : elim) {
    int pivot = -1;
    double best = kCoefTol;
    for (size_t r = 0; r < w.erows.size(); ++r) {
      if (std::abs(w.erows[r][j]) > best) {
        best = std::abs(w.erows[r][j]);
        pivot = static_cast<int>(r);
      }
    }
    if (pivot < 0) continue;
    Vec prow = w.erows[pivot];
    double prhs = w.ef[pivot];
    const double pj = prow[j];
    auto substitute = [&](Vec& row, double& rhs) {
      const double c = row[j];
      if (std::abs(c) <= kCoefTol) {
        row[j] = 0.0;
        return;
      }
      row -= (c / pj) * prow;
      rhs -= (c / pj) * prhs;
      row[j] = 0.0;
    };
    for (size_t r = 0; r < w.erows.size(); ++r)
      if (static_cast<int>(r) != pivot) substitute(w.erows[r], w.ef[r]);
    for (size_t r = 0; r < w.arows.size(); ++r) substitute(w.arows[r], w.ab[r]);
    w.erows.erase(w.erows.begin() + pivot);
    w.ef.erase(w.ef.begin() + pivot);
    done[j] = true;
  }
  // Drop zero equality rows (consistency check).
  for (size_t r = 0; r < w.erows.size();) {
    if (w.erows[r].norm() <= kCoefTol) {
      if (std::abs(w.ef[r]) > 1e-9) w.infeasible = true;
      w.erows.erase(w.erows.begin() + r);
      w.ef.erase(w.ef.begin() + r);
    } else {
      ++r;
    }
  }

  w.normalize_and_dedupe();
  w.prune_lp();

  // Phase 2: Fourier-Motzkin on the remaining variables.
  for (int j : elim) {
    if (done[j]) continue;
    std::vector<int> pos, neg, zero;
    for (size_t r = 0; r < w.arows.size(); ++r) {
      const double c = w.arows[r][j];
      if (c > kCoefTol)
        pos.push_back(static_cast<int>(r));
      else if (c < -kCoefTol)
        neg.push_back(static_cast<int>(r));
      else
        zero.push_back(static_cast<int>(r));
    }
    std::vector<Vec> next;
    std::vector<double> nextb;
    for (int r : zero) {
      next.push_back(w.arows[r]);
      nextb.push_back(w.ab[r]);
    }
    for (int rp : pos) {
      for (int rn : neg) {
        const double cp = w.arows[rp][j];
        const double cn = -w.arows[rn][j];
        Vec row = w.arows[rp] / cp + w.arows[rn] / cn;
        double rhs = w.ab[rp] / cp + w.ab[rn] / cn;
        row[j] = 0.0;
        next.push_back(row);
        nextb.push_back(rhs);
      }
    }
    w.arows = std::move(next);
    w.ab = std::move(nextb);
    w.normalize_and_dedupe();
    w.prune_lp();
  }

  // Extract the keep coordinates.
  HSystem out;
  const int kd = static_cast<int>(keep.size());
  out.A = Mat::Zero(w.arows.size(), kd);
  out.b = Vec::Zero(w.arows.size());
  for (size_t r = 0; r < w.arows.size(); ++r) {
    for (int c = 0; c < kd; ++c) out.A(r, c) = w.arows[r][keep[c]];
    out.b[r] = w.ab[r];
  }
  out.E = Mat::Zero(w.erows.size(), kd);
  out.f = Vec::Zero(w.erows.size());
  for (size_t r = 0; r < w.erows.size(); ++r) {
    for (int c = 0; c < kd; ++c) out.E(r, c) = w.erows[r][keep[c]];
    out.f[r] = w.ef[r];
  }
  out.infeasible = w.infeasible;
  return out;
}

SetRep hsystem_to_set(const HSystem& sys) {
  PolyhedralSet P;
  P.dim = sys.dim();
  P.A = sys.A;
  P.b = sys.b;
  P.E = sys.E;
  P.f = sys.f;
  return SetRep::hpoly(P);
}

}  // namespace ocsens
