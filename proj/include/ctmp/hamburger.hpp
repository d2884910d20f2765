#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ctmp/hankel.hpp"
#include "ctmp/types.hpp"

namespace ctmp {

struct UnivariateSolveReport {
  enum class Status { MeasureFound, NoMeasure };

  Status status = Status::NoMeasure;
  std::optional<AtomicMeasure1D> measure;
  int rank = 0;
  // "flat" (r < full) or "full-rank" (free top moment invented).
  std::string branch;
  // Moments invented along the way, e.g. the free gamma_{2k+1}.
  std::vector<std::pair<long, double>> chosen_moments;
  std::string diagnostic;
  double residual = 0.0;

  bool found() const { return status == Status::MeasureFound; }
};

// Truncated Hamburger moment problem for gamma_{0..k2}. Even k2 follows
// the pivoted-factorization/echelon/Schur/Vandermonde pipeline; odd k2
// adds the extra-moment solvability test (flat case) or pins the
// otherwise free top moment (full-rank case).
UnivariateSolveReport solve_thmp(const UnivariateMomentSequence& gamma,
                                 const ToleranceConfig& cfg = {});

// Strong variant with negative moments, measures on R \ {0}. The
// sequence is shifted to start at zero, the flat branch adds the
// inner-column rank test, the full-rank branch avoids the one excluded
// free value, and densities solve the Vandermonde system with row powers
// starting at k1. k1 must be even and negative.
UnivariateSolveReport solve_sthmp(const UnivariateMomentSequence& gamma,
                                  const ToleranceConfig& cfg = {});

// Solve W rho = moments with W_{i,j} = x_j^{start_power + i}.
// IllConditioned when the solved system's residual is out of tolerance.
std::vector<double> vandermonde_densities(const std::vector<double>& atoms,
                                          const std::vector<double>& moments,
                                          long start_power,
                                          double residual_tol);

// Residual of a candidate measure against a (possibly negative-indexed)
// moment sequence, relative to max(1, |gamma|_inf).
double univariate_residual(const UnivariateMomentSequence& gamma,
                           const AtomicMeasure1D& mu);

}  // namespace ctmp
