#include "ctmp/hamburger.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <numeric>

namespace ctmp {

std::vector<double> vandermonde_densities(const std::vector<double>& atoms,
                                          const std::vector<double>& moments,
                                          long start_power,
                                          double residual_tol) {
  const int r = static_cast<int>(atoms.size());
  if (static_cast<int>(moments.size()) != r)
    throw Error("vandermonde_densities needs as many moments as atoms");
  if (r == 0) return {};

  Eigen::MatrixXd W(r, r);
  for (int j = 0; j < r; ++j)
    for (int i = 0; i < r; ++i)
      W(i, j) = std::pow(atoms[j], static_cast<double>(start_power + i));
  Eigen::VectorXd m(r);
  for (int i = 0; i < r; ++i) m(i) = moments[i];

  Eigen::VectorXd rho = W.colPivHouseholderQr().solve(m);
  const double resid = (W * rho - m).norm() / std::max(1.0, m.norm());
  if (!rho.allFinite() || resid > residual_tol)
    throw IllConditioned("Vandermonde system residual " + std::to_string(resid));
  return {rho.data(), rho.data() + r};
}

double univariate_residual(const UnivariateMomentSequence& gamma,
                           const AtomicMeasure1D& mu) {
  double worst = 0.0;
  for (long t = gamma.k1(); t <= gamma.k2(); ++t)
    worst = std::max(worst, std::abs(gamma.at(t) - mu.moment(t)));
  return worst / std::max(1.0, gamma.max_abs());
}

namespace {

struct CoreOptions {
  bool strong = false;
  long start_power = 0;                // k1 of the original sequence
  std::optional<double> odd_top;       // given gamma beyond the even range
};

UnivariateSolveReport no_measure(std::string why, int rank,
                                 std::string branch = {}) {
  UnivariateSolveReport rep;
  rep.status = UnivariateSolveReport::Status::NoMeasure;
  rep.diagnostic = std::move(why);
  rep.rank = rank;
  rep.branch = std::move(branch);
  return rep;
}

// Atoms as the spectrum of the multiplication operator: the companion
// matrix N = A^{-1} B (B the shifted Hankel block) conjugated into its
// symmetric form L^{-1} B L^{-T}, whose Schur decomposition is an
// ordinary symmetric eigendecomposition with real eigenvalues.
std::vector<double> operator_spectrum(const Eigen::MatrixXd& A,
                                      const Eigen::MatrixXd& B) {
  const int r = static_cast<int>(A.rows());
  if (r == 0) return {};
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> esA(A);
  const Eigen::VectorXd lam = esA.eigenvalues().cwiseMax(1e-300);
  const Eigen::MatrixXd W =
      esA.eigenvectors() * lam.cwiseSqrt().cwiseInverse().asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> esJ(W.transpose() * B * W);
  std::vector<double> roots(esJ.eigenvalues().data(),
                            esJ.eigenvalues().data() + r);
  std::sort(roots.begin(), roots.end());
  return roots;
}

// Merge atoms closer than the merge tolerance; keep order.
std::vector<double> merge_atoms(std::vector<double> xs, double merge_tol) {
  if (xs.empty()) return xs;
  double span = std::max(1.0, std::abs(xs.back() - xs.front()));
  std::vector<double> out{xs[0]};
  for (std::size_t i = 1; i < xs.size(); ++i) {
    if (xs[i] - out.back() <= merge_tol * span)
      out.back() = 0.5 * (out.back() + xs[i]);
    else
      out.push_back(xs[i]);
  }
  return out;
}

// Core of the algorithm on a zero-based even-range sequence w_{0..2K},
// plus the optional given odd moment w_{2K+1}. All matrix work happens on
// the mass-and-radius normalized sequence u_t = w_t / (mass * s^t), the
// moments of a probability-like measure with atoms of size O(1); atoms
// and densities are mapped back at the end.
UnivariateSolveReport solve_core(const UnivariateMomentSequence& w,
                                 const CoreOptions& opt,
                                 const ToleranceConfig& cfg) {
  const long K = w.k2() / 2;
  const double raw_scale = std::max(1.0, w.max_abs());

  // Step 1 on the raw data: a rm needs a psd Hankel matrix.
  {
    const HankelView H = hankel_from(w);
    if (!is_psd(H.matrix, cfg.psd_tol))
      return no_measure("Hankel matrix not positive semidefinite (Step 1)", -1);
  }

  const double mass = w.at(0);
  if (mass <= cfg.psd_tol * raw_scale) {
    // Zero total mass and psd force the zero sequence: the zero measure.
    UnivariateSolveReport rep;
    rep.rank = 0;
    rep.branch = "flat";
    const double top = opt.odd_top ? std::abs(*opt.odd_top) : 0.0;
    if (w.max_abs() > cfg.residual_tol * std::max(1.0, mass) ||
        top > cfg.residual_tol)
      return no_measure("zero mass with nonzero higher moments", 0, "flat");
    rep.status = UnivariateSolveReport::Status::MeasureFound;
    rep.measure = AtomicMeasure1D{};
    return rep;
  }

  // Radius estimate from the even moments.
  double s = 0.0;
  for (long t = 2; t <= 2 * K; t += 2)
    s = std::max(s, std::pow(std::max(w.at(t), 0.0) / mass,
                             1.0 / static_cast<double>(t)));
  if (opt.odd_top && 2 * K + 1 > 0)
    s = std::max(s, std::pow(std::abs(*opt.odd_top) / mass,
                             1.0 / static_cast<double>(2 * K + 1)));
  s = std::clamp(s, 1e-8, 1e8);

  std::vector<double> u(static_cast<std::size_t>(2 * K + 1));
  {
    double f = 1.0;
    for (long t = 0; t <= 2 * K; ++t, f *= s)
      u[static_cast<std::size_t>(t)] = w.at(t) / (mass * f);
  }
  const UnivariateMomentSequence un(0, u);
  const std::optional<double> odd_top_u =
      opt.odd_top ? std::optional<double>(*opt.odd_top /
                                          (mass * std::pow(s, 2.0 * K + 1)))
                  : std::nullopt;
  const HankelView H = hankel_from(un);
  const int n = static_cast<int>(K) + 1;
  const double u_scale = std::max(1.0, un.max_abs());

  const int r = sequence_rank(un, cfg.rank_tol);
  UnivariateSolveReport rep;
  rep.rank = r;

  // Shifted Hankel block B(i,j) = u_{i+j+1} over the active corner; its
  // pencil with the corner gives the atoms.
  const auto shifted_block = [&](int size, double top) {
    Eigen::MatrixXd B(size, size);
    for (int i = 0; i < size; ++i)
      for (int j = 0; j < size; ++j)
        B(i, j) = i + j + 1 <= 2 * K ? un.at(i + j + 1) : top;
    return B;
  };

  if (r < n) {
    rep.branch = "flat";
    const Eigen::MatrixXd corner = H.upper_left(r - 1);
    if (!is_pd(corner, cfg.rank_tol))
      return no_measure("leading corner not positive definite (Step 3.2)", r,
                        "flat");
    Eigen::VectorXd rhs(r);
    for (int i = 0; i < r; ++i) rhs(i) = un.at(r + i);
    const Eigen::VectorXd phi = corner.ldlt().solve(rhs);

    // Echelon shape test: the recursion must hold through the top of the
    // data, including the extra odd moment when one is given.
    const long top = 2 * K;
    for (long j = r; j <= top + (odd_top_u ? 1 : 0); ++j) {
      double pred = 0.0;
      for (int i = 0; i < r; ++i) pred += phi(i) * un.at(j - r + i);
      const double actual = j > top ? *odd_top_u : un.at(j);
      if (std::abs(actual - pred) > cfg.residual_tol * u_scale)
        return no_measure(
            j > top ? "extra odd moment not reachable by the recursion"
                    : "column echelon form not (I_r B)^T (Step 3.2)",
            r, "flat");
    }

    if (opt.strong) {
      // Strong item 4: the shifted inner block must keep full rank, else
      // the flat measure needs an atom at the origin.
      const Eigen::MatrixXd inner = H.matrix.block(1, 1, r, r);
      if (numeric_rank(inner, cfg.rank_tol) < r)
        return no_measure("inner column test failed: an atom at 0 is forced",
                          r, "flat");
    }
  } else {
    rep.branch = "full-rank";
  }

  // Value of the free top moment that places the extension's extra
  // support point at xi: det(B(u) - xi A) is linear in the corner entry.
  const auto top_for_atom_at = [&](double xi) -> std::optional<double> {
    Eigen::MatrixXd D = shifted_block(n, 0.0) - xi * H.matrix;
    const double d0 = D.determinant();
    D(n - 1, n - 1) += 1.0;
    const double d1 = D.determinant();
    const double slope = d1 - d0;
    if (std::abs(slope) <= 1e-14 * std::max(std::abs(d0), std::abs(d1)))
      return std::nullopt;
    return -d0 / slope;
  };

  // Step 4: atoms are the eigenvalues of the companion-like matrix N,
  // obtained from its Schur decomposition in symmetric form.
  std::vector<double> roots;
  if (r < n) {
    roots = operator_spectrum(H.upper_left(r - 1), shifted_block(r, 0.0));
  } else {
    double top;
    if (odd_top_u) {
      // Top moment already given; the minimal (K+1)-atomic measure is
      // unique.
      top = *odd_top_u;
    } else {
      // The free moment is arbitrary; place the extra atom at the origin
      // for good conditioning. The strong problem excludes exactly that
      // value (it forces an atom at 0), so there the atom goes to a
      // generic nearby spot instead.
      double free_top = 0.0;
      const auto excluded = top_for_atom_at(0.0);
      if (!opt.strong && excluded) {
        free_top = *excluded;
      } else {
        for (double xi : {0.618033988749895, -0.77245385, 1.4142135623731,
                          -1.7320508075689, 2.2360679774998}) {
          const auto cand = top_for_atom_at(xi);
          if (!cand) continue;
          if (excluded && std::abs(*cand - *excluded) <= cfg.rank_tol * u_scale)
            continue;
          free_top = *cand;
          break;
        }
      }
      rep.chosen_moments.emplace_back(
          opt.start_power + 2 * K + 1,
          free_top * mass * std::pow(s, 2.0 * K + 1));
      top = free_top;
    }
    roots = operator_spectrum(H.matrix, shifted_block(n, top));
  }
  std::vector<double> atoms_u = merge_atoms(roots, cfg.atom_merge_tol);

  if (opt.strong) {
    double span = 1.0;
    if (!atoms_u.empty())
      span = std::max(1.0, std::abs(atoms_u.back() - atoms_u.front()));
    for (double x : atoms_u)
      if (std::abs(x) <= cfg.atom_merge_tol * span)
        return no_measure("candidate atom at the origin", r, rep.branch);
  }

  // Step 5: densities from the Vandermonde system of the normalized
  // problem, mapped back through the mass, radius and shift factors.
  const int ra = static_cast<int>(atoms_u.size());
  std::vector<double> first_moments(u.begin(), u.begin() + ra);
  std::vector<double> rho_u;
  try {
    rho_u = vandermonde_densities(atoms_u, first_moments, 0,
                                  std::sqrt(cfg.residual_tol));
  } catch (const IllConditioned& e) {
    return no_measure(std::string("density solve ill-conditioned: ") + e.what(),
                      r, rep.branch);
  }

  AtomicMeasure1D mu;
  mu.atoms.resize(ra);
  mu.densities.resize(ra);
  for (int i = 0; i < ra; ++i) {
    const double x = s * atoms_u[i];
    mu.atoms[i] = x;
    // Weights of x^{k1} d(mu) were solved; undo the shift factor.
    mu.densities[i] =
        mass * rho_u[i] * std::pow(x, -static_cast<double>(opt.start_power));
  }
  for (double d : mu.densities)
    if (!(d > 0.0))
      return no_measure("NegativeDensity: nonpositive density in solution", r,
                        rep.branch);

  UnivariateMomentSequence original(opt.start_power, w.values());
  rep.residual = univariate_residual(original, mu);
  if (opt.odd_top) {
    const double top_err =
        std::abs(*opt.odd_top - mu.moment(opt.start_power + 2 * K + 1));
    rep.residual = std::max(rep.residual, top_err / raw_scale);
  }
  if (rep.residual > cfg.residual_tol)
    return no_measure("reconstruction residual " + std::to_string(rep.residual),
                      r, rep.branch);

  rep.status = UnivariateSolveReport::Status::MeasureFound;
  rep.measure = std::move(mu);
  return rep;
}

}  // namespace

UnivariateSolveReport solve_thmp(const UnivariateMomentSequence& gamma,
                                 const ToleranceConfig& cfg) {
  if (gamma.k1() != 0) throw Error("solve_thmp expects k1 = 0");
  CoreOptions opt;
  if (gamma.length() % 2 == 0) {
    opt.odd_top = gamma.at(gamma.k2());
    const UnivariateMomentSequence even_part = gamma.sub(0, gamma.k2() - 1);
    return solve_core(UnivariateMomentSequence(0, even_part.values()), opt,
                      cfg);
  }
  return solve_core(gamma, opt, cfg);
}

UnivariateSolveReport solve_sthmp(const UnivariateMomentSequence& gamma,
                                  const ToleranceConfig& cfg) {
  if (!(gamma.k1() < 0 && gamma.k2() > 0))
    throw Error("solve_sthmp expects k1 < 0 < k2");
  if (gamma.k1() % 2 != 0)
    throw Error("solve_sthmp expects an even lower index");

  CoreOptions opt;
  opt.strong = true;
  opt.start_power = gamma.k1();
  UnivariateMomentSequence shifted(0, gamma.values());
  if (shifted.length() % 2 == 0) {
    opt.odd_top = shifted.at(shifted.k2());
    const UnivariateMomentSequence even_part = shifted.sub(0, shifted.k2() - 1);
    return solve_core(UnivariateMomentSequence(0, even_part.values()), opt,
                      cfg);
  }
  return solve_core(shifted, opt, cfg);
}

}  // namespace ctmp
