#include "ctmp/bivariate.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

namespace ctmp {

std::pair<int, int> deglex_monomial(int index) {
  int g = 0;
  while ((g + 1) * (g + 2) / 2 <= index) ++g;
  const int j = index - g * (g + 1) / 2;
  return {g - j, j};
}

double MomentMatrix::max_abs() const {
  double m = 0.0;
  for (int r = 0; r < size(); ++r)
    for (int c = 0; c < size(); ++c)
      if (defined_mask[r][c]) m = std::max(m, std::abs(entries(r, c)));
  return m;
}

std::vector<double> MomentMatrix::eigenvalues() const {
  if (!fully_defined())
    throw UndefinedEntries("eigenvalues need a fully defined moment matrix");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(entries,
                                                    Eigen::EigenvaluesOnly);
  std::vector<double> ev(es.eigenvalues().data(),
                         es.eigenvalues().data() + size());
  std::sort(ev.rbegin(), ev.rend());
  return ev;
}

int MomentMatrix::rank(double rank_tol) const {
  const auto ev = eigenvalues();
  double scale = 0.0;
  for (double v : ev) scale = std::max(scale, std::abs(v));
  int r = 0;
  for (double v : ev)
    if (std::abs(v) > rank_tol * std::max(scale, 1e-300)) ++r;
  return r;
}

MomentMatrix build_moment_matrix(const BivariateMomentSequence& beta) {
  const int d = beta.degree();
  const int k = (d + 1) / 2;
  const int n = simplex_size(k);

  MomentMatrix M;
  M.order = k;
  M.source_degree = d;
  M.entries = Eigen::MatrixXd::Zero(n, n);
  M.column_labels.resize(n);
  M.defined_mask.assign(n, std::vector<bool>(n, false));
  for (int c = 0; c < n; ++c) M.column_labels[c] = deglex_monomial(c);

  for (int r = 0; r < n; ++r) {
    const auto [a, b] = M.column_labels[r];
    for (int c = 0; c < n; ++c) {
      const auto [e, f] = M.column_labels[c];
      if (a + b + e + f <= d) {
        M.entries(r, c) = beta.at(a + e, b + f);
        M.defined_mask[r][c] = true;
      }
    }
  }
  return M;
}

double riesz_eval(const BivariateMomentSequence& beta, const Poly2& p) {
  double s = 0.0;
  for (const auto& [ij, a] : p) {
    if (a == 0.0) continue;
    if (!beta.contains(ij.first, ij.second))
      throw DegreeTooHigh("polynomial degree exceeds the sequence degree");
    s += a * beta.at(ij.first, ij.second);
  }
  return s;
}

BivariateMomentSequence apply_alt(const BivariateMomentSequence& beta,
                                  const AffineTransform& phi) {
  if (phi.det() == 0.0)
    throw SingularTransform("apply_alt needs bf - ce != 0");
  const int d = beta.degree();

  const Poly2 p1{{{0, 0}, phi.a}, {{1, 0}, phi.b}, {{0, 1}, phi.c}};
  const Poly2 p2{{{0, 0}, phi.d}, {{1, 0}, phi.e}, {{0, 1}, phi.f}};

  // Powers of phi1 and phi2 up to degree d, computed once.
  std::vector<Poly2> pow1(d + 1), pow2(d + 1);
  pow1[0] = pow2[0] = Poly2{{{0, 0}, 1.0}};
  for (int i = 1; i <= d; ++i) {
    pow1[i] = poly2_mul(pow1[i - 1], p1);
    pow2[i] = poly2_mul(pow2[i - 1], p2);
  }

  BivariateMomentSequence out(d);
  for (int i = 0; i <= d; ++i)
    for (int j = 0; i + j <= d; ++j)
      out.set(i, j, riesz_eval(beta, poly2_mul(pow1[i], pow2[j])));
  return out;
}

bool check_column_relation(const MomentMatrix& M, const Poly2& p, double tol) {
  const int n = M.size();
  if (poly2_deg(p) > M.order)
    throw DegreeTooHigh("relation degree exceeds the moment matrix order");

  Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
  double coeff_scale = 0.0;
  for (const auto& [ij, a] : p) {
    if (a == 0.0) continue;
    const int c = deglex_index(ij.first, ij.second);
    for (int r = 0; r < n; ++r) {
      if (!M.is_defined(r, c))
        throw UndefinedEntries("column relation touches undefined entries");
      v(r) += a * M.entries(r, c);
    }
    coeff_scale += std::abs(a);
  }
  const double scale = std::max(1.0, M.max_abs()) * std::max(1.0, coeff_scale);
  return v.lpNorm<Eigen::Infinity>() <= tol * scale;
}

std::vector<std::pair<int, int>> check_curve_relations(
    const BivariateMomentSequence& beta, const CurveSpec& curve,
    double residual_tol) {
  std::vector<std::pair<int, int>> violated;
  const int d = beta.degree();
  const int ell = curve.ell();
  const double scale = std::max(1.0, beta.max_abs());

  if (curve.is_graph()) {
    const auto& q = curve.coeffs();
    // beta_{i,j} = sum_p q_p beta_{i+p,j-1}
    for (int j = 1; j <= d - ell + 1; ++j)
      for (int i = 0; i + j <= d - ell + 1; ++i) {
        double rhs = 0.0;
        for (int p = 0; p <= ell; ++p) rhs += q[p] * beta.at(i + p, j - 1);
        if (std::abs(beta.at(i, j) - rhs) > residual_tol * scale)
          violated.emplace_back(i, j);
      }
  } else {
    // beta_{i+ell,j+1} = beta_{i,j}
    for (int i = 0; i <= d - ell - 1; ++i)
      for (int j = 0; i + j <= d - ell - 1; ++j)
        if (std::abs(beta.at(i + ell, j + 1) - beta.at(i, j)) >
            residual_tol * scale)
          violated.emplace_back(i, j);
  }
  return violated;
}

BivariateMomentSequence synth_moments(const AtomicMeasure2D& mu, int degree) {
  BivariateMomentSequence beta(degree);
  for (int i = 0; i <= degree; ++i)
    for (int j = 0; i + j <= degree; ++j) beta.set(i, j, mu.moment(i, j));
  return beta;
}

double moment_residual(const BivariateMomentSequence& beta,
                       const AtomicMeasure2D& mu) {
  const int d = beta.degree();
  double worst = 0.0;
  for (int i = 0; i <= d; ++i)
    for (int j = 0; i + j <= d; ++j)
      worst = std::max(worst, std::abs(beta.at(i, j) - mu.moment(i, j)));
  return worst / std::max(1.0, beta.max_abs());
}

}  // namespace ctmp
