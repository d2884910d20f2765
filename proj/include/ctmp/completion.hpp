#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ctmp/bivariate.hpp"
#include "ctmp/hamburger.hpp"
#include "ctmp/hankel.hpp"
#include "ctmp/reduction.hpp"
#include "ctmp/types.hpp"

namespace ctmp {

struct FeasibilityOutcome {
  enum class Status { Feasible, Infeasible, Unknown };

  Status status = Status::Unknown;
  std::optional<UnivariateMomentSequence> completed;
  // Violated principal minor or fixed-entry contradiction, Infeasible only.
  std::string certificate;
  double gap = 0.0;
  int iterations = 0;

  bool feasible() const { return status == Status::Feasible; }
};

struct SingleEntryCompletion {
  double z_plus = 0.0;
  double z_minus = 0.0;
};

// The two values of the single missing entry (on the anti-diagonal next
// to the last, or next to the first) that make the Hankel matrix psd
// with rank one below full. CornerNotPD when the fully known corner one
// size smaller is not positive definite; NonrealRoots when the
// interpolated determinant quadratic has no real zero.
SingleEntryCompletion complete_single_entry(
    const PartialUnivariateSequence& partial, double tol);

// PSD completability of a partial Hankel matrix by alternating
// projections between the psd cone (eigenvalue clipping) and the affine
// set of Hankel matrices matching the known entries. Infeasible only
// with an explicit certificate; Unknown after max_iter.
FeasibilityOutcome complete_feasibility(const PartialUnivariateSequence& partial,
                                        const ToleranceConfig& cfg = {});

// Sparse SDPA feasibility problem for the partial Hankel matrix: one
// block, one scalar variable per unknown index, deterministic ordering,
// 17 significant digits.
std::string export_sdpa(const PartialUnivariateSequence& partial);

struct SolveReport {
  enum class Status { MeasureFound, NoMeasure, Unknown };

  struct Diagnostics {
    int rank_moment_matrix = -1;
    int rank_hankel = -1;
    int rank_hankel_corner = -1;
    std::string failed_condition;
    std::string branch;
    std::vector<std::pair<long, double>> completion_values;
    double moment_residual = -1.0;
    std::vector<std::pair<int, int>> violated_relations;
    double feasibility_gap = -1.0;
    int feasibility_iterations = 0;
  };

  Status status = Status::Unknown;
  std::optional<AtomicMeasure2D> measure;
  Diagnostics diagnostics;
  ToleranceConfig tolerances;

  bool found() const { return status == Status::MeasureFound; }
};

// Concrete parabola solver, q = q2 x^2 + q1 x + q0 with q2 != 0, even or
// odd degree data. Transforms to y = x^2, tests the positive
// definiteness / rank equality conditions on the reduced Hankel data
// (even) or the recursive-generation conditions (odd), and extracts the
// measure through the univariate solver.
SolveReport solve_parabola(const BivariateMomentSequence& beta,
                           const std::vector<double>& q,
                           const ToleranceConfig& cfg = {});

// Odd-degree solver on y = x^3: decides existence via the positive
// definite branch or the flat recursion branch, and reports whether the
// minimal-rank measure exists (diagnostics.branch).
SolveReport solve_cubic_odd(const BivariateMomentSequence& beta,
                            const ToleranceConfig& cfg = {});

// Top-level curve solver: relation checks, normalization, reduction to a
// univariate sequence, completion of the unknown entries (analytic
// single-entry where the hole pattern permits, alternating projections
// otherwise), univariate extraction and lifting back to the curve.
SolveReport solve_curve(const BivariateMomentSequence& beta,
                        const CurveSpec& curve,
                        const ToleranceConfig& cfg = {});

}  // namespace ctmp
