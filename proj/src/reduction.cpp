#include "ctmp/reduction.hpp"

#include <cmath>

namespace ctmp {

double structure_coefficient(const Poly1& q, int i, int j, int s) {
  if (i < 0 || j < 0 || s < 0) throw Error("structure coefficient indices");
  return StructureCoefficients(q)(i, j, s);
}

NormalizedGraph normalize_graph_curve(const BivariateMomentSequence& beta,
                                      const std::vector<double>& q) {
  const int ell = static_cast<int>(q.size()) - 1;
  if (ell < 2 || q.back() == 0.0)
    throw UnsupportedCurve("normalize_graph_curve needs deg q >= 2");

  const double shift = q[ell - 1] / (ell * q[ell]);
  if (shift == 0.0)
    return NormalizedGraph{beta, q, AffineTransform::identity()};

  AffineTransform alt;  // (x, y) -> (x + shift, y)
  alt.a = shift;
  Poly1 moved = poly_compose_shift(q, -shift);  // q(x~ - shift)
  // The subleading coefficient vanishes by construction; pin it exactly.
  if (std::abs(moved[ell - 1]) >
      1e-9 * std::max(1.0, std::abs(moved[ell])))
    throw InternalInvariantBroken("normalization left a subleading term");
  moved[ell - 1] = 0.0;
  return NormalizedGraph{apply_alt(beta, alt), std::move(moved), alt};
}

namespace {

// Graph-case index range [0..n]: n = d*ell + 2 when d*ell is even,
// d*ell + 1 when odd.
long graph_top_index(int d, int ell) {
  const long dl = static_cast<long>(d) * ell;
  return dl % 2 == 0 ? dl + 2 : dl + 1;
}

bool graph_determined(long t, int d, int ell) {
  return t % ell + t / ell <= d;
}

// Hyperbolic membership: nonnegative indices up to d come from beta_{t,0};
// a negative index is determined when t = -i*ell + j with 0 <= j < ell,
// i + j <= d.
bool hyperbolic_determined(long t, int d, int ell) {
  if (t >= 0) return t <= d;
  const long i = (-t + ell - 1) / ell;  // ceil(|t| / ell)
  const long j = t + ell * i;
  return i + j <= d;
}

ReductionResult reduce_graph(const BivariateMomentSequence& beta_in,
                             const std::vector<double>& q_in,
                             const ToleranceConfig& cfg) {
  const int d = beta_in.degree();
  const int ell = static_cast<int>(q_in.size()) - 1;
  const int k = (d + 1) / 2;
  if (k < ell)
    throw DegreeTooLow("graph curve needs ceil(d/2) >= deg q");

  NormalizedGraph norm = normalize_graph_curve(beta_in, q_in);
  const BivariateMomentSequence& beta = norm.beta;
  const auto violated =
      check_curve_relations(beta, CurveSpec::graph(norm.q), cfg.residual_tol);
  if (!violated.empty()) throw RelationsViolated(violated);

  const StructureCoefficients qc(norm.q);
  const double qtop = norm.q.back();
  const long n = graph_top_index(d, ell);

  ReductionResult res{PartialUnivariateSequence(0, n),
                      CurveSpec::graph(norm.q), norm.alt, {}, 0,
                      static_cast<long>(d) * ell};

  for (long t = 0; t <= n; ++t) {
    if (!graph_determined(t, d, ell)) continue;
    const int i = static_cast<int>(t % ell);
    const int j = static_cast<int>(t / ell);
    double coeff_scale = 0.0;
    for (double c : qc.q_power(j)) coeff_scale = std::max(coeff_scale, std::abs(c));
    double acc = beta.at(i, j);
    for (long s = 0; s < t; ++s) {
      const double c = qc(i, j, static_cast<int>(s));
      if (c == 0.0) continue;
      if (!res.partial.is_known(s)) {
        // The theorems guarantee the triangular recursion never touches
        // an undetermined entry; hitting one means the curve is outside
        // the supported families.
        if (std::abs(c) > 1e-12 * coeff_scale)
          throw InternalInvariantBroken(
              "graph reduction referenced an undetermined entry at index " +
              std::to_string(s));
        continue;
      }
      acc -= c * res.partial.at(s);
    }
    res.partial.set_known(t, acc / std::pow(qtop, j));
    res.index_map.emplace(t, std::make_pair(i, j));
  }
  return res;
}

ReductionResult reduce_hyperbolic(const BivariateMomentSequence& beta,
                                  int ell, const ToleranceConfig& cfg) {
  const int d = beta.degree();
  const int k = (d + 1) / 2;
  if (k < ell + 1)
    throw DegreeTooLow("hyperbolic curve needs ceil(d/2) >= ell + 1");

  const auto violated =
      check_curve_relations(beta, CurveSpec::hyperbolic(ell), cfg.residual_tol);
  if (!violated.empty()) throw RelationsViolated(violated);

  const long dl = static_cast<long>(d) * ell;
  long n1, n2;
  if (d % 2 == 0) {
    n1 = -dl - 2;
    n2 = d + 2;
  } else if (ell % 2 == 0) {
    n1 = -dl - 2;
    n2 = d + 1;
  } else {
    n1 = -dl - 1;
    n2 = d + 1;
  }

  ReductionResult res{PartialUnivariateSequence(n1, n2),
                      CurveSpec::hyperbolic(ell),
                      AffineTransform::identity(),
                      {},
                      -dl,
                      d};

  for (long t = n1; t <= n2; ++t) {
    if (!hyperbolic_determined(t, d, ell)) continue;
    int i, j;
    if (t >= 0) {
      i = static_cast<int>(t);
      j = 0;
    } else {
      const long up = (-t + ell - 1) / ell;
      i = static_cast<int>(t + ell * up);
      j = static_cast<int>(up);
    }
    res.partial.set_known(t, beta.at(i, j));
    res.index_map.emplace(t, std::make_pair(i, j));
  }
  return res;
}

}  // namespace

ReductionResult reduce_to_univariate(const BivariateMomentSequence& beta,
                                     const CurveSpec& curve,
                                     const ToleranceConfig& cfg) {
  if (curve.is_graph()) return reduce_graph(beta, curve.coeffs(), cfg);
  return reduce_hyperbolic(beta, curve.ell(), cfg);
}

Eigen::MatrixXd basis_change_matrix(int k, const std::vector<double>& q) {
  const int ell = static_cast<int>(q.size()) - 1;
  if (ell < 2 || q.back() == 0.0)
    throw UnsupportedCurve("basis_change_matrix needs deg q >= 2");
  const int n = k * ell + 2;
  const StructureCoefficients qc(q);

  // Rows follow the basis {1..x^{ell-1}; y..y x^{ell-1}; ...; y^k, y^k x},
  // columns the powers 1..x^{k*ell+1}.
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n, n);
  int row = 0;
  auto fill_row = [&](int i, int c) {
    for (int s = 0; s < n; ++s) P(row, s) = qc(i, c, s);
    ++row;
  };
  for (int c = 0; c < k; ++c)
    for (int i = 0; i < ell; ++i) fill_row(i, c);
  fill_row(0, k);
  fill_row(1, k);
  return P;
}

AtomicMeasure2D lift_measure(const AtomicMeasure1D& nu, const CurveSpec& curve,
                             double pole_tol) {
  AtomicMeasure2D mu;
  mu.densities = nu.densities;
  mu.atoms.reserve(nu.atoms.size());
  for (double x : nu.atoms) {
    if (curve.is_graph()) {
      mu.atoms.push_back({x, poly_eval(curve.coeffs(), x)});
    } else {
      if (std::abs(x) <= pole_tol)
        throw AtomAtPole("hyperbolic lift undefined at x = 0");
      mu.atoms.push_back({x, std::pow(x, -curve.ell())});
    }
  }
  return mu;
}

}  // namespace ctmp
