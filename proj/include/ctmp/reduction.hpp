#pragma once

#include <Eigen/Dense>
#include <map>
#include <vector>

#include "ctmp/bivariate.hpp"
#include "ctmp/hankel.hpp"
#include "ctmp/poly.hpp"
#include "ctmp/types.hpp"

namespace ctmp {

// q_{i,j,s}: the coefficient of x^s in x^i q(x)^j. Zero outside
// i <= s <= i + j*deg(q); at the top end it equals (q_ell)^j.
double structure_coefficient(const Poly1& q, int i, int j, int s);

// Same coefficients with the powers q^j memoized across queries.
class StructureCoefficients {
 public:
  explicit StructureCoefficients(Poly1 q) : q_(poly_trim(std::move(q))) {
    powers_.push_back(Poly1{1.0});
  }

  const Poly1& q() const { return q_; }

  const Poly1& q_power(int j) const {
    while (static_cast<int>(powers_.size()) <= j)
      powers_.push_back(poly_mul(powers_.back(), q_));
    return powers_[j];
  }

  double operator()(int i, int j, int s) const {
    if (s < i) return 0.0;
    const Poly1& p = q_power(j);
    const int idx = s - i;
    if (idx >= static_cast<int>(p.size())) return 0.0;
    return p[idx];
  }

 private:
  Poly1 q_;
  mutable std::vector<Poly1> powers_;
};

struct NormalizedGraph {
  BivariateMomentSequence beta;
  std::vector<double> q;  // x^{ell-1} coefficient exactly zero
  AffineTransform alt;
};

// Shift of the x variable that kills the subleading coefficient of q;
// identity when it is already zero.
NormalizedGraph normalize_graph_curve(const BivariateMomentSequence& beta,
                                      const std::vector<double>& q);

// Outcome of the bivariate-to-univariate transform. `partial` spans the
// full LMI index range of the curve family; `data_lo..data_hi` is the
// window a representing measure must actually reproduce. For graph
// curves the sequence corresponds to the shift-normalized data, with
// `alt_used` recording the transform that was applied.
struct ReductionResult {
  PartialUnivariateSequence partial;
  CurveSpec curve;
  AffineTransform alt_used;
  std::map<long, std::pair<int, int>> index_map;
  long data_lo = 0;
  long data_hi = 0;
};

// RelationsViolated when the recursive-generation relations fail;
// DegreeTooLow below the theorem's degree bound.
ReductionResult reduce_to_univariate(const BivariateMomentSequence& beta,
                                     const CurveSpec& curve,
                                     const ToleranceConfig& cfg = {});

// Lower-triangular change of basis P with (M_{k+ell-2})|_B = P A P^T:
// row (x^i y^c) holds the coefficients of x^i q(x)^c over 1..x^{k*ell+1}.
Eigen::MatrixXd basis_change_matrix(int k, const std::vector<double>& q);

// Push a line measure onto the curve: x -> (x, q(x)) for graphs,
// x -> (x, x^{-ell}) for hyperbolic curves (AtomAtPole at x = 0).
AtomicMeasure2D lift_measure(const AtomicMeasure1D& nu, const CurveSpec& curve,
                             double pole_tol = 1e-12);

}  // namespace ctmp
