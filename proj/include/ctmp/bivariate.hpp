#pragma once

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "ctmp/poly.hpp"
#include "ctmp/types.hpp"

namespace ctmp {

// Number of monomials x^i y^j with i+j <= d.
inline int simplex_size(int d) { return (d + 1) * (d + 2) / 2; }

// Position of (i,j) in the degree-lexicographic order
// 1, X, Y, X^2, XY, Y^2, ...; within degree g the y-power runs 0..g.
inline int deglex_index(int i, int j) {
  const int g = i + j;
  return g * (g + 1) / 2 + j;
}

// Monomial at a degree-lex position.
std::pair<int, int> deglex_monomial(int index);

// All moments beta_{i,j}, i+j <= d, of a bivariate sequence of degree d.
class BivariateMomentSequence {
 public:
  explicit BivariateMomentSequence(int degree)
      : degree_(degree), values_(simplex_size(degree), 0.0) {
    if (degree < 0) throw Error("degree must be nonnegative");
  }

  int degree() const { return degree_; }

  bool contains(int i, int j) const {
    return i >= 0 && j >= 0 && i + j <= degree_;
  }

  double at(int i, int j) const {
    check_range(i, j);
    return values_[deglex_index(i, j)];
  }

  void set(int i, int j, double v) {
    check_range(i, j);
    values_[deglex_index(i, j)] = v;
  }

  // Values in degree-lex order.
  const std::vector<double>& values() const { return values_; }

  double max_abs() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
  }

 private:
  void check_range(int i, int j) const {
    if (!contains(i, j))
      throw DegreeTooHigh("moment index (" + std::to_string(i) + "," +
                          std::to_string(j) + ") outside the degree-" +
                          std::to_string(degree_) + " simplex");
  }

  int degree_;
  std::vector<double> values_;
};

// Moment matrix M_k in degree-lex order. For odd source degree the block
// of entries with row degree + column degree > source degree is undefined
// and masked; reading a masked entry is an error, not a silent zero.
struct MomentMatrix {
  int order = 0;
  int source_degree = 0;
  Eigen::MatrixXd entries;
  std::vector<std::pair<int, int>> column_labels;
  std::vector<std::vector<bool>> defined_mask;

  int size() const { return static_cast<int>(entries.rows()); }

  bool is_defined(int r, int c) const { return defined_mask[r][c]; }

  bool fully_defined() const {
    for (const auto& row : defined_mask)
      for (bool b : row)
        if (!b) return false;
    return true;
  }

  double at(int r, int c) const {
    if (!is_defined(r, c))
      throw UndefinedEntries("moment matrix entry (" + std::to_string(r) + "," +
                             std::to_string(c) + ") is undefined");
    return entries(r, c);
  }

  // Largest defined magnitude; the scale for relative tests.
  double max_abs() const;

  // Eigenvalues of the fully defined matrix, descending.
  std::vector<double> eigenvalues() const;

  // Numerical rank at a relative eigenvalue threshold; requires a fully
  // defined matrix.
  int rank(double rank_tol) const;
};

MomentMatrix build_moment_matrix(const BivariateMomentSequence& beta);

// Riesz functional L_beta(p) = sum a_{i,j} beta_{i,j}.
double riesz_eval(const BivariateMomentSequence& beta, const Poly2& p);

// Pushforward of the sequence through an invertible affine map:
// beta~_{i,j} = L_beta(phi1^i phi2^j), computed by symbolic expansion.
BivariateMomentSequence apply_alt(const BivariateMomentSequence& beta,
                                  const AffineTransform& phi);

// True when p(X,Y) is (numerically) the zero column combination.
bool check_column_relation(const MomentMatrix& M, const Poly2& p, double tol);

// Index pairs at which the recursive-generation relations of the curve
// fail; empty means all hold to the residual tolerance.
std::vector<std::pair<int, int>> check_curve_relations(
    const BivariateMomentSequence& beta, const CurveSpec& curve,
    double residual_tol = ToleranceConfig{}.residual_tol);

// Forward moment synthesis beta_{i,j} = sum rho_p x_p^i y_p^j.
BivariateMomentSequence synth_moments(const AtomicMeasure2D& mu, int degree);

// max |beta - moments(mu)| / max(1, |beta|_inf) over the simplex.
double moment_residual(const BivariateMomentSequence& beta,
                       const AtomicMeasure2D& mu);

}  // namespace ctmp
