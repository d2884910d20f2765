#include "ctmp/completion.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace ctmp {

namespace {

UnivariateMomentSequence known_window(const PartialUnivariateSequence& p,
                                      long lo, long hi) {
  std::vector<double> v;
  v.reserve(static_cast<std::size_t>(hi - lo + 1));
  for (long t = lo; t <= hi; ++t) v.push_back(p.at(t));
  return {lo, std::move(v)};
}

Eigen::MatrixXd hankel_of_partial(const PartialUnivariateSequence& p,
                                  const std::vector<double>& hole_values) {
  const int m = static_cast<int>((p.length() - 1) / 2);
  const auto holes = p.unknown_indices();
  Eigen::MatrixXd A(m + 1, m + 1);
  for (int i = 0; i <= m; ++i)
    for (int j = 0; j <= m; ++j) {
      const long t = p.k1() + i + j;
      if (p.is_known(t)) {
        A(i, j) = p.at(t);
      } else {
        const auto it = std::find(holes.begin(), holes.end(), t);
        A(i, j) = hole_values[static_cast<std::size_t>(it - holes.begin())];
      }
    }
  return A;
}

}  // namespace

SingleEntryCompletion complete_single_entry(
    const PartialUnivariateSequence& partial, double tol) {
  if (partial.length() % 2 == 0)
    throw EvenLength("single-entry completion needs an odd-length range");
  const auto holes = partial.unknown_indices();
  if (holes.size() != 1)
    throw Error("single-entry completion needs exactly one unknown");
  const long hole = holes.front();
  const int m = static_cast<int>((partial.length() - 1) / 2);
  if (m < 1) throw Error("matrix too small for a missing entry");

  const bool at_top = hole == partial.k2() - 1;
  const bool at_bottom = hole == partial.k1() + 1;
  if (!at_top && !at_bottom)
    throw Error("the unknown must sit on the anti-diagonal next to an end");

  // The fully known corner one size smaller: upper-left when the hole is
  // near the top index, lower-right when it is near the bottom.
  {
    Eigen::MatrixXd corner(m, m);
    const long base = at_top ? partial.k1() : partial.k1() + 2;
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) corner(i, j) = partial.at(base + i + j);
    if (!is_pd(corner, tol))
      throw CornerNotPD("the fully known corner is not positive definite");
  }

  // det A(z) is an exact quadratic in z; interpolate it from three
  // evaluations instead of expanding symbolically.
  const double s = std::max(1.0, partial.max_abs_known());
  const double zs[3] = {0.0, s, -s};
  double det[3];
  for (int i = 0; i < 3; ++i)
    det[i] = hankel_of_partial(partial, {zs[i]}).determinant();

  // Quadratic a z^2 + b z + c through the three nodes.
  const double c = det[0];
  const double a = (det[1] + det[2] - 2.0 * det[0]) / (2.0 * s * s);
  const double b = (det[1] - det[2]) / (2.0 * s);

  const double det_scale =
      std::max({std::abs(det[0]), std::abs(det[1]), std::abs(det[2]), 1e-300});
  if (std::abs(a) <= 1e-14 * det_scale / (s * s))
    throw NonrealRoots("determinant quadratic degenerates");
  const double disc = b * b - 4.0 * a * c;
  if (disc < 0.0)
    throw NonrealRoots("no real completion: negative discriminant");

  const double sq = std::sqrt(disc);
  const double qq = -0.5 * (b + (b >= 0.0 ? sq : -sq));
  double r1, r2;
  if (qq != 0.0) {
    r1 = qq / a;
    r2 = c / qq;
  } else {
    r1 = 0.0;
    r2 = -b / a;
  }
  SingleEntryCompletion out;
  out.z_plus = std::max(r1, r2);
  out.z_minus = std::min(r1, r2);
  return out;
}

namespace {

// Sound infeasibility witnesses: fully known principal submatrices with a
// negative eigenvalue. Diagonal entries, known 2x2 minors, and principal
// blocks over contiguous known index runs are scanned.
std::optional<std::string> infeasibility_certificate(
    const PartialUnivariateSequence& p, const ToleranceConfig& cfg,
    double scale) {
  const int m = static_cast<int>((p.length() - 1) / 2);
  const long k1 = p.k1();

  for (int i = 0; i <= m; ++i) {
    const long t = k1 + 2 * i;
    if (p.is_known(t) && p.at(t) < -cfg.psd_tol * scale)
      return "diagonal entry at index " + std::to_string(t) + " is negative";
  }
  for (int i = 0; i <= m; ++i)
    for (int j = i + 1; j <= m; ++j) {
      const long tii = k1 + 2 * i, tjj = k1 + 2 * j, tij = k1 + i + j;
      if (!(p.is_known(tii) && p.is_known(tjj) && p.is_known(tij))) continue;
      const double aa = p.at(tii), cc = p.at(tjj), bb = p.at(tij);
      const double tr = aa + cc;
      const double lam_min = 0.5 * (tr - std::hypot(aa - cc, 2.0 * bb));
      if (lam_min < -cfg.psd_tol * scale)
        return "principal 2x2 minor on rows {" + std::to_string(i) + "," +
               std::to_string(j) + "} has a negative eigenvalue";
    }
  for (int lo = 0; lo <= m; ++lo) {
    long run_hi = k1 + 2 * lo - 1;
    for (int hi = lo; hi <= m; ++hi) {
      // Block rows lo..hi use indices k1+2lo .. k1+2hi.
      while (run_hi < k1 + 2 * hi && p.is_known(run_hi + 1)) ++run_hi;
      if (run_hi < k1 + 2 * hi) break;
      if (hi == lo) continue;  // diagonal already scanned
      const int n = hi - lo + 1;
      Eigen::MatrixXd B(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) B(i, j) = p.at(k1 + 2 * lo + i + j);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(B,
                                                        Eigen::EigenvaluesOnly);
      if (es.eigenvalues().minCoeff() < -cfg.psd_tol * scale)
        return "principal block on rows " + std::to_string(lo) + ".." +
               std::to_string(hi) + " has a negative eigenvalue";
    }
  }
  return std::nullopt;
}

// Flat data determines its own completion: when the longest fully known
// run is rank deficient, the forward and backward recursions of its
// corner extend it over the holes exactly. Returns a completion that
// matches every known entry and is psd, when one arises this way.
std::optional<UnivariateMomentSequence> flat_completion_candidate(
    const PartialUnivariateSequence& partial, const ToleranceConfig& cfg) {
  const long k1 = partial.k1(), k2 = partial.k2();
  const double scale = std::max(1.0, partial.max_abs_known());

  // Longest contiguous known run.
  long best_a = 0, best_b = -1;
  for (long t = k1; t <= k2;) {
    if (!partial.is_known(t)) {
      ++t;
      continue;
    }
    long b = t;
    while (b + 1 <= k2 && partial.is_known(b + 1)) ++b;
    if (b - t > best_b - best_a) {
      best_a = t;
      best_b = b;
    }
    t = b + 1;
  }
  long a = best_a, b = best_b;
  if ((b - a) % 2 != 0) --b;  // odd length
  if (b - a < 2) return std::nullopt;

  const auto run = known_window(partial, a, b);
  const int pm = static_cast<int>((run.length() - 1) / 2);
  const int r = sequence_rank(run, cfg.rank_tol);
  if (r == 0 || r == pm + 1) return std::nullopt;
  const HankelView Hr = hankel_from(run);
  if (!is_pd(Hr.upper_left(r - 1), cfg.rank_tol)) return std::nullopt;

  Eigen::VectorXd rhs(r);
  for (int i = 0; i < r; ++i) rhs(i) = run.at(a + r + i);
  const Eigen::VectorXd phi = Hr.upper_left(r - 1).ldlt().solve(rhs);
  Eigen::VectorXd rhs_rev(r);
  for (int i = 0; i < r; ++i) rhs_rev(i) = run.at(b - 2 * r + 1 + i);
  const Eigen::VectorXd psi = Hr.lower_right(r - 1).ldlt().solve(rhs_rev);

  std::vector<double> full(static_cast<std::size_t>(k2 - k1 + 1), 0.0);
  auto val = [&](long t) -> double& {
    return full[static_cast<std::size_t>(t - k1)];
  };
  for (long t = a; t <= b; ++t) val(t) = run.at(t);
  for (long t = b + 1; t <= k2; ++t) {
    double v = 0.0;
    for (int i = 0; i < r; ++i) v += phi(i) * val(t - r + i);
    if (partial.is_known(t)) {
      if (std::abs(v - partial.at(t)) > cfg.residual_tol * scale * 10)
        return std::nullopt;
      v = partial.at(t);
    }
    val(t) = v;
  }
  for (long t = a - 1; t >= k1; --t) {
    double v = 0.0;
    for (int i = 0; i < r; ++i) v += psi(i) * val(t + 1 + i);
    if (partial.is_known(t)) {
      if (std::abs(v - partial.at(t)) > cfg.residual_tol * scale * 10)
        return std::nullopt;
      v = partial.at(t);
    }
    val(t) = v;
  }
  UnivariateMomentSequence cand(k1, std::move(full));
  if (!is_psd(hankel_from(cand).matrix, cfg.psd_tol)) return std::nullopt;
  return cand;
}

}  // namespace

FeasibilityOutcome complete_feasibility(const PartialUnivariateSequence& partial,
                                        const ToleranceConfig& cfg) {
  if (partial.length() % 2 == 0)
    throw EvenLength("psd completion needs an odd-length range");
  const int m = static_cast<int>((partial.length() - 1) / 2);
  const int n = m + 1;
  const long k1 = partial.k1();
  const double scale = std::max(1.0, partial.max_abs_known());

  FeasibilityOutcome out;
  if (auto cert = infeasibility_certificate(partial, cfg, scale)) {
    out.status = FeasibilityOutcome::Status::Infeasible;
    out.certificate = *cert;
    return out;
  }

  if (partial.unknown_indices().empty()) {
    const auto full = partial.full();
    const HankelView H = hankel_from(full);
    if (is_psd(H.matrix, cfg.psd_tol)) {
      out.status = FeasibilityOutcome::Status::Feasible;
      out.completed = full;
      return out;
    }
    out.status = FeasibilityOutcome::Status::Infeasible;
    out.certificate = "the fully determined matrix has a negative eigenvalue";
    return out;
  }

  // Rank-deficient data pins its completion; take it directly when the
  // recursion of the known run reproduces all known entries.
  if (auto cand = flat_completion_candidate(partial, cfg)) {
    out.status = FeasibilityOutcome::Status::Feasible;
    out.completed = std::move(cand);
    out.gap = 0.0;
    return out;
  }

  const auto holes = partial.unknown_indices();

  // Projection onto the affine set: Hankel structure, known entries reset,
  // unknown anti-diagonals averaged.
  auto proj_affine = [&](const Eigen::MatrixXd& Y) {
    Eigen::MatrixXd X(n, n);
    for (long t = 0; t <= 2 * m; ++t) {
      const int ilo = static_cast<int>(std::max<long>(0, t - m));
      const int ihi = static_cast<int>(std::min<long>(m, t));
      double v;
      if (partial.is_known(k1 + t)) {
        v = partial.at(k1 + t);
      } else {
        v = 0.0;
        for (int i = ilo; i <= ihi; ++i) v += Y(i, static_cast<int>(t) - i);
        v /= (ihi - ilo + 1);
      }
      for (int i = ilo; i <= ihi; ++i) X(i, static_cast<int>(t) - i) = v;
    }
    return X;
  };
  auto proj_psd = [&](const Eigen::MatrixXd& Y) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Y);
    Eigen::VectorXd lam = es.eigenvalues().cwiseMax(0.0);
    return Eigen::MatrixXd(es.eigenvectors() * lam.asDiagonal() *
                           es.eigenvectors().transpose());
  };

  // Relative Frobenius distance from the affine iterate to the psd cone;
  // the iterate matches the known entries exactly, so this is the whole
  // projection gap of the returned completion.
  auto psd_distance = [&](const Eigen::MatrixXd& X) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(X,
                                                      Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseMin(0.0).norm() / scale;
  };

  // The smallest eigenvalue of the completion is concave in every unknown
  // entry; coordinatewise maximization by ternary search drives the
  // iterate into the cone whenever a completion with interior slack
  // exists. One sweep over all holes counts as one iteration.
  std::vector<double> hv(holes.size(), 0.0);
  auto lmin_of = [&]() {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
        hankel_of_partial(partial, hv), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
  };
  auto maximize_hole = [&](std::size_t j) {
    auto f = [&](double v) {
      const double old = hv[j];
      hv[j] = v;
      const double r = lmin_of();
      hv[j] = old;
      return r;
    };
    double step = std::max(1.0, scale);
    double c = hv[j], fc = f(c);
    double lo = c - step, hi = c + step;
    double fl = f(lo), fh = f(hi);
    int guard = 0;
    while (fl > fc && guard++ < 60) {
      hi = c;
      c = lo;
      fc = fl;
      step *= 2.0;
      lo -= step;
      fl = f(lo);
    }
    while (fh > fc && guard++ < 60) {
      lo = c;
      c = hi;
      fc = fh;
      step *= 2.0;
      hi += step;
      fh = f(hi);
    }
    for (int i = 0;
         i < 90 && hi - lo > 1e-13 * std::max(1.0, std::abs(lo) + std::abs(hi));
         ++i) {
      const double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
      if (f(m1) < f(m2))
        lo = m1;
      else
        hi = m2;
    }
    hv[j] = 0.5 * (lo + hi);
  };

  int it = 0;
  double lmin = lmin_of();
  while (it < cfg.max_iter && lmin < cfg.psd_tol * scale) {
    ++it;
    const double before = lmin;
    for (std::size_t j = 0; j < hv.size(); ++j) maximize_hole(j);
    lmin = lmin_of();
    if (lmin - before <= 1e-3 * cfg.psd_tol * scale) break;  // stalled
  }

  auto finish_with = [&](const std::vector<double>& values, double gap) {
    out.gap = gap;
    out.iterations = it;
    if (gap <= cfg.psd_tol) {
      std::vector<std::pair<long, double>> fills;
      for (std::size_t j = 0; j < holes.size(); ++j)
        fills.emplace_back(holes[j], values[j]);
      out.status = FeasibilityOutcome::Status::Feasible;
      out.completed = partial.completed_with(fills);
    } else {
      out.status = FeasibilityOutcome::Status::Unknown;
    }
    return out;
  };

  {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
        hankel_of_partial(partial, hv), Eigen::EigenvaluesOnly);
    const double d = es.eigenvalues().cwiseMin(0.0).norm() / scale;
    if (d <= cfg.psd_tol) return finish_with(hv, d);
  }

  // Fallback: alternating projections between the psd cone and the
  // affine set, warm-started at the coordinate-ascent point.
  Eigen::MatrixXd x = proj_affine(hankel_of_partial(partial, hv));
  double gap = psd_distance(x);
  while (gap > cfg.psd_tol * 1e-3 && it < cfg.max_iter) {
    ++it;
    x = proj_affine(proj_psd(x));
    gap = psd_distance(x);
  }
  std::vector<double> xs_vals(holes.size());
  for (std::size_t j = 0; j < holes.size(); ++j) {
    const long td = holes[j] - k1;
    const int i = static_cast<int>(std::max<long>(0, td - m));
    xs_vals[j] = x(i, static_cast<int>(td) - i);
  }
  return finish_with(xs_vals, gap);
}

std::string export_sdpa(const PartialUnivariateSequence& partial) {
  if (partial.length() % 2 == 0)
    throw EvenLength("SDPA export needs an odd-length range");
  const int m = static_cast<int>((partial.length() - 1) / 2);
  const long k1 = partial.k1();
  const auto holes = partial.unknown_indices();

  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };

  std::ostringstream os;
  os << holes.size() << "\n";
  os << 1 << "\n";
  os << (m + 1) << "\n";
  for (std::size_t i = 0; i < holes.size(); ++i)
    os << (i ? " " : "") << "0";
  os << "\n";

  // F0 carries the known entries (X = sum y_k F_k - F0 >= 0).
  for (int i = 0; i <= m; ++i)
    for (int j = i; j <= m; ++j) {
      const long t = k1 + i + j;
      if (!partial.is_known(t)) continue;
      const double v = partial.at(t);
      if (v == 0.0) continue;
      os << "0 1 " << (i + 1) << " " << (j + 1) << " " << num(-v) << "\n";
    }
  // One indicator matrix per unknown anti-diagonal.
  for (std::size_t v = 0; v < holes.size(); ++v) {
    const long td = holes[v] - k1;
    for (int i = 0; i <= m; ++i) {
      const int j = static_cast<int>(td) - i;
      if (j < i || j > m) continue;
      os << (v + 1) << " 1 " << (i + 1) << " " << (j + 1) << " 1\n";
    }
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Curve solvers.

namespace {

using Status = SolveReport::Status;

struct GateContext {
  const BivariateMomentSequence& beta0;
  const CurveSpec& curve0;
  const ReductionResult& red;
  const ToleranceConfig& cfg;
};

// Lift a line measure to the (normalized) curve, map it back through the
// inverse transform and accept only if it reproduces the original data.
std::optional<AtomicMeasure2D> gate_measure(const AtomicMeasure1D& nu,
                                            const GateContext& gc,
                                            double* residual_out = nullptr) {
  AtomicMeasure2D lifted;
  try {
    lifted = lift_measure(nu, gc.red.curve, gc.cfg.atom_merge_tol);
  } catch (const AtomAtPole&) {
    return std::nullopt;
  }
  const AffineTransform inv = gc.red.alt_used.inverse();
  AtomicMeasure2D mu;
  mu.densities = lifted.densities;
  mu.atoms.reserve(lifted.atoms.size());
  for (const auto& a : lifted.atoms) {
    const auto b = inv(a[0], a[1]);
    mu.atoms.push_back({b[0], b[1]});
  }
  const double resid = moment_residual(gc.beta0, mu);
  if (residual_out) *residual_out = resid;
  if (resid > gc.cfg.residual_tol) return std::nullopt;
  for (const auto& a : mu.atoms)
    if (std::abs(gc.curve0.equation_residual(a[0], a[1])) >
        gc.cfg.residual_tol * std::max(1.0, std::abs(a[1])) * 100.0)
      return std::nullopt;
  return mu;
}

bool structural_no_measure(const UnivariateSolveReport& r) {
  // Diagnostics that certify nonexistence rather than numerical trouble.
  return r.diagnostic.find("Step 1") != std::string::npos ||
         r.diagnostic.find("Step 3.2") != std::string::npos ||
         r.diagnostic.find("atom at 0 is forced") != std::string::npos ||
         r.diagnostic.find("odd moment not reachable") != std::string::npos ||
         r.diagnostic.find("nonzero top moment") != std::string::npos;
}

SolveReport relations_report(const RelationsViolated& e,
                             const ToleranceConfig& cfg) {
  SolveReport rep;
  rep.tolerances = cfg;
  rep.status = Status::NoMeasure;
  rep.diagnostics.failed_condition = "recursive-generation curve relations";
  rep.diagnostics.violated_relations = e.pairs;
  return rep;
}

SolveReport found_report(AtomicMeasure2D mu, SolveReport::Diagnostics diag,
                         const ToleranceConfig& cfg) {
  SolveReport rep;
  rep.tolerances = cfg;
  rep.status = Status::MeasureFound;
  rep.measure = std::move(mu);
  rep.diagnostics = std::move(diag);
  return rep;
}

// Try both single-entry roots (z+ first) of the window with the given
// hole, solving each completed window and gating the outcome.
std::optional<SolveReport> try_single_entry_roots(
    const PartialUnivariateSequence& window, long hole, const GateContext& gc,
    SolveReport::Diagnostics diag, bool strong, bool* infeasible,
    std::string* why) {
  SingleEntryCompletion roots;
  try {
    roots = complete_single_entry(window, gc.cfg.rank_tol);
  } catch (const CornerNotPD&) {
    return std::nullopt;
  } catch (const NonrealRoots&) {
    // With the corner positive definite and every other entry known, no
    // value of the hole yields a psd matrix, so no measure exists.
    *infeasible = true;
    *why = "no real psd completion of the single missing entry";
    return std::nullopt;
  }
  for (double z : {roots.z_plus, roots.z_minus}) {
    const auto filled = window.completed_with({{hole, z}});
    const auto urep = strong ? solve_sthmp(filled, gc.cfg)
                             : solve_thmp(filled, gc.cfg);
    if (!urep.found()) continue;
    double resid = 0.0;
    if (auto mu = gate_measure(*urep.measure, gc, &resid)) {
      diag.branch = "single-entry completion, flat extraction";
      diag.rank_hankel = urep.rank;
      diag.completion_values.emplace_back(hole, z);
      diag.moment_residual = resid;
      return found_report(std::move(*mu), std::move(diag), gc.cfg);
    }
  }
  return std::nullopt;
}

// Largest b <= hi such that every index in [b..hi] is known.
long known_run_start(const PartialUnivariateSequence& p, long hi) {
  long b = hi;
  while (b - 1 >= p.k1() && p.is_known(b - 1)) --b;
  return b;
}

SolveReport solve_graph_general(const BivariateMomentSequence& beta0,
                                const CurveSpec& curve0,
                                const ToleranceConfig& cfg) {
  SolveReport rep;
  rep.tolerances = cfg;
  ReductionResult red = reduce_to_univariate(beta0, curve0, cfg);
  const GateContext gc{beta0, curve0, red, cfg};
  const long dl = red.data_hi;
  const int d = beta0.degree();
  const auto& P = red.partial;

  if (d % 2 == 0)
    rep.diagnostics.rank_moment_matrix =
        build_moment_matrix(beta0).rank(cfg.rank_tol);

  // Longest fully determined prefix; its verdicts are decisive when the
  // extraction lands in the flat branch (the flat measure is unique).
  const long T = P.unknown_indices().front() - 1;
  {
    const auto urep = solve_thmp(known_window(P, 0, T), cfg);
    rep.diagnostics.rank_hankel = urep.rank;
    if (urep.found()) {
      double resid = 0.0;
      if (auto mu = gate_measure(*urep.measure, gc, &resid)) {
        rep.diagnostics.branch = "determined-window extraction (" +
                                 urep.branch + ")";
        rep.diagnostics.moment_residual = resid;
        for (const auto& cm : urep.chosen_moments)
          rep.diagnostics.completion_values.push_back(cm);
        return found_report(std::move(*mu), std::move(rep.diagnostics), cfg);
      }
      if (urep.branch == "flat") {
        rep.status = Status::NoMeasure;
        rep.diagnostics.failed_condition =
            "the unique flat measure of the determined window does not "
            "represent the remaining moments";
        return rep;
      }
    } else if (structural_no_measure(urep)) {
      rep.status = Status::NoMeasure;
      rep.diagnostics.failed_condition = urep.diagnostic;
      return rep;
    }
  }

  // Even case with a single interior hole right below the top (cubic
  // graphs): the analytic two-root completion.
  if (d % 2 == 0 && T == dl - 2 && !P.is_known(dl - 1) && P.is_known(dl)) {
    PartialUnivariateSequence window(0, dl);
    for (long t = 0; t <= dl; ++t)
      if (t != dl - 1) window.set_known(t, P.at(t));
    bool infeasible = false;
    std::string why;
    if (auto r = try_single_entry_roots(window, dl - 1, gc, rep.diagnostics,
                                        false, &infeasible, &why))
      return *r;
    if (infeasible) {
      rep.status = Status::NoMeasure;
      rep.diagnostics.failed_condition = why;
      return rep;
    }
  }

  // Numerical completion of the full index range.
  const auto fo = complete_feasibility(P, cfg);
  rep.diagnostics.feasibility_gap = fo.gap;
  rep.diagnostics.feasibility_iterations = fo.iterations;
  if (fo.status == FeasibilityOutcome::Status::Infeasible) {
    rep.status = Status::NoMeasure;
    rep.diagnostics.failed_condition =
        "psd completion infeasible: " + fo.certificate;
    return rep;
  }
  if (fo.status == FeasibilityOutcome::Status::Unknown) {
    rep.status = Status::Unknown;
    rep.diagnostics.failed_condition =
        "psd completion undecided within max_iter";
    return rep;
  }
  const auto& comp = *fo.completed;
  for (long t : P.unknown_indices())
    if (t <= dl) rep.diagnostics.completion_values.emplace_back(t, comp.at(t));

  std::vector<long> windows;
  if (d % 2 == 0) {
    windows = {dl};
  } else {
    windows = {dl % 2 == 0 ? dl - 1 : dl - 2, dl};
  }
  for (long hi : windows) {
    const auto urep = solve_thmp(comp.sub(0, hi), cfg);
    if (!urep.found()) continue;
    double resid = 0.0;
    if (auto mu = gate_measure(*urep.measure, gc, &resid)) {
      rep.diagnostics.branch =
          "completion window [0.." + std::to_string(hi) + "] (" + urep.branch +
          ")";
      rep.diagnostics.rank_hankel = urep.rank;
      rep.diagnostics.moment_residual = resid;
      for (const auto& cm : urep.chosen_moments)
        rep.diagnostics.completion_values.push_back(cm);
      return found_report(std::move(*mu), std::move(rep.diagnostics), cfg);
    }
  }

  // Full-rank even case: trade the completed entry below the top for a
  // root of the determinant, dropping the rank by one and the atom count
  // to k deg q.
  if (d % 2 == 0) {
    PartialUnivariateSequence window(0, dl);
    for (long t = 0; t <= dl; ++t)
      if (t != dl - 1) window.set_known(t, comp.at(t));
    bool infeasible = false;
    std::string why;
    if (auto r = try_single_entry_roots(window, dl - 1, gc, rep.diagnostics,
                                        false, &infeasible, &why))
      return *r;
  }

  rep.status = Status::Unknown;
  rep.diagnostics.failed_condition =
      "feasible completion found but no extraction verified";
  return rep;
}

SolveReport solve_hyperbolic_general(const BivariateMomentSequence& beta0,
                                     const CurveSpec& curve0,
                                     const ToleranceConfig& cfg) {
  SolveReport rep;
  rep.tolerances = cfg;
  ReductionResult red = reduce_to_univariate(beta0, curve0, cfg);
  const GateContext gc{beta0, curve0, red, cfg};
  const long lo = red.data_lo;  // -d*ell
  const long hi = red.data_hi;  // d
  const int d = beta0.degree();
  const int ell = curve0.ell();
  const auto& P = red.partial;

  if (d % 2 == 0)
    rep.diagnostics.rank_moment_matrix =
        build_moment_matrix(beta0).rank(cfg.rank_tol);

  // Contiguous known run ending at the top data index.
  long B = known_run_start(P, hi);
  if (B % 2 != 0) ++B;
  if (B < 0 && B < hi) {
    const auto urep = solve_sthmp(known_window(P, B, hi), cfg);
    rep.diagnostics.rank_hankel = urep.rank;
    if (urep.found()) {
      double resid = 0.0;
      if (auto mu = gate_measure(*urep.measure, gc, &resid)) {
        rep.diagnostics.branch = "determined-window extraction (" +
                                 urep.branch + ")";
        rep.diagnostics.moment_residual = resid;
        for (const auto& cm : urep.chosen_moments)
          rep.diagnostics.completion_values.push_back(cm);
        return found_report(std::move(*mu), std::move(rep.diagnostics), cfg);
      }
      if (urep.branch == "flat") {
        rep.status = Status::NoMeasure;
        rep.diagnostics.failed_condition =
            "the unique flat measure of the determined window does not "
            "represent the remaining moments";
        return rep;
      }
    } else if (structural_no_measure(urep)) {
      rep.status = Status::NoMeasure;
      rep.diagnostics.failed_condition = urep.diagnostic;
      return rep;
    }
  }

  // ell = 2 pattern: the only interior hole is right above the bottom.
  const bool single_hole_pattern = [&] {
    for (long t = lo; t <= hi; ++t)
      if (!P.is_known(t) && t != lo + 1) return false;
    return !P.is_known(lo + 1);
  }();

  if (single_hole_pattern) {
    if (d % 2 == 0) {
      PartialUnivariateSequence window(lo, hi);
      for (long t = lo; t <= hi; ++t)
        if (t != lo + 1) window.set_known(t, P.at(t));
      bool infeasible = false;
      std::string why;
      if (auto r = try_single_entry_roots(window, lo + 1, gc, rep.diagnostics,
                                          true, &infeasible, &why))
        return *r;
      if (infeasible) {
        rep.status = Status::NoMeasure;
        rep.diagnostics.failed_condition = why;
        return rep;
      }
    } else {
      // Odd top: fill the hole on the even part, then solve with the top
      // moment pinned. Try the two boundary roots and the midpoint.
      PartialUnivariateSequence even_part(lo, hi - 1);
      for (long t = lo; t <= hi - 1; ++t)
        if (t != lo + 1) even_part.set_known(t, P.at(t));
      try {
        const auto roots = complete_single_entry(even_part, cfg.rank_tol);
        const double mid = 0.5 * (roots.z_plus + roots.z_minus);
        for (double z : {roots.z_plus, roots.z_minus, mid}) {
          PartialUnivariateSequence window(lo, hi);
          for (long t = lo; t <= hi; ++t)
            if (t != lo + 1) window.set_known(t, P.at(t));
          const auto filled = window.completed_with({{lo + 1, z}});
          const auto urep = solve_sthmp(filled, cfg);
          if (!urep.found()) continue;
          double resid = 0.0;
          if (auto mu = gate_measure(*urep.measure, gc, &resid)) {
            rep.diagnostics.branch = "single-entry completion, odd top";
            rep.diagnostics.rank_hankel = urep.rank;
            rep.diagnostics.completion_values.emplace_back(lo + 1, z);
            rep.diagnostics.moment_residual = resid;
            return found_report(std::move(*mu), std::move(rep.diagnostics),
                                cfg);
          }
        }
      } catch (const CornerNotPD&) {
      } catch (const NonrealRoots&) {
        rep.status = Status::NoMeasure;
        rep.diagnostics.failed_condition =
            "no real psd completion of the single missing entry";
        return rep;
      }
    }
  }

  // Numerical completion of the full index range.
  const auto fo = complete_feasibility(P, cfg);
  rep.diagnostics.feasibility_gap = fo.gap;
  rep.diagnostics.feasibility_iterations = fo.iterations;
  if (fo.status == FeasibilityOutcome::Status::Infeasible) {
    rep.status = Status::NoMeasure;
    rep.diagnostics.failed_condition =
        "psd completion infeasible: " + fo.certificate;
    return rep;
  }
  if (fo.status == FeasibilityOutcome::Status::Unknown) {
    rep.status = Status::Unknown;
    rep.diagnostics.failed_condition =
        "psd completion undecided within max_iter";
    return rep;
  }
  const auto& comp = *fo.completed;
  for (long t : P.unknown_indices())
    rep.diagnostics.completion_values.emplace_back(t, comp.at(t));

  std::vector<std::pair<long, long>> windows;
  if (d % 2 == 0) {
    windows = {{lo, hi}};
  } else {
    windows = {{ell % 2 == 0 ? lo : lo - 1, hi + 1}, {lo % 2 == 0 ? lo : lo - 1, hi}};
  }
  for (const auto& [wl, wh] : windows) {
    if (wl < P.k1() || wh > P.k2()) continue;
    const auto urep = solve_sthmp(comp.sub(wl, wh), cfg);
    if (!urep.found()) continue;
    double resid = 0.0;
    if (auto mu = gate_measure(*urep.measure, gc, &resid)) {
      rep.diagnostics.branch = "completion window [" + std::to_string(wl) +
                               ".." + std::to_string(wh) + "] (" + urep.branch +
                               ")";
      rep.diagnostics.rank_hankel = urep.rank;
      rep.diagnostics.moment_residual = resid;
      for (const auto& cm : urep.chosen_moments)
        rep.diagnostics.completion_values.push_back(cm);
      return found_report(std::move(*mu), std::move(rep.diagnostics), cfg);
    }
  }

  if (d % 2 == 0) {
    PartialUnivariateSequence window(lo, hi);
    for (long t = lo; t <= hi; ++t)
      if (t != lo + 1) window.set_known(t, comp.at(t));
    bool infeasible = false;
    std::string why;
    if (auto r = try_single_entry_roots(window, lo + 1, gc, rep.diagnostics,
                                        true, &infeasible, &why))
      return *r;
  }

  rep.status = Status::Unknown;
  rep.diagnostics.failed_condition =
      "feasible completion found but no extraction verified";
  return rep;
}

// Odd-degree cubic graphs reach the y = x^3 solver through a chain of
// affine transforms.
SolveReport solve_cubic_odd_via_alts(const BivariateMomentSequence& beta,
                                     const std::vector<double>& q,
                                     const ToleranceConfig& cfg) {
  const double q3 = q[3];
  const double shift = q[2] / (3.0 * q3);
  AffineTransform a1;  // kill the x^2 coefficient
  a1.a = shift;
  Poly1 moved = poly_compose_shift(q, -shift);

  AffineTransform a2;  // subtract the affine tail: y -> y - q1 x - q0
  a2.d = -moved[0];
  a2.e = -moved[1];

  AffineTransform a3;  // rescale x so the leading coefficient is 1
  a3.b = std::cbrt(q3);

  const AffineTransform combined = a1.then(a2).then(a3);
  SolveReport rep = solve_cubic_odd(apply_alt(beta, combined), cfg);
  if (rep.measure) {
    const AffineTransform inv = combined.inverse();
    AtomicMeasure2D mu;
    mu.densities = rep.measure->densities;
    for (const auto& a : rep.measure->atoms) {
      const auto b = inv(a[0], a[1]);
      mu.atoms.push_back({b[0], b[1]});
    }
    rep.diagnostics.moment_residual = moment_residual(beta, mu);
    if (rep.diagnostics.moment_residual > cfg.residual_tol) {
      rep.status = Status::Unknown;
      rep.measure.reset();
      rep.diagnostics.failed_condition =
          "back-transformed measure failed verification";
    } else {
      rep.measure = std::move(mu);
    }
  }
  return rep;
}

}  // namespace

SolveReport solve_parabola(const BivariateMomentSequence& beta,
                           const std::vector<double>& q,
                           const ToleranceConfig& cfg) {
  if (q.size() != 3 || q[2] == 0.0)
    throw UnsupportedCurve("solve_parabola needs y = q2 x^2 + q1 x + q0");
  const int d = beta.degree();
  const int k = (d + 1) / 2;
  if (k < 2) throw DegreeTooLow("parabola solver needs ceil(d/2) >= 2");

  SolveReport rep;
  rep.tolerances = cfg;

  // Move to y = x^2.
  AffineTransform alt;
  alt.d = -q[0] / q[2];
  alt.e = -q[1] / q[2];
  alt.f = 1.0 / q[2];
  const bool trivial_alt = q[0] == 0.0 && q[1] == 0.0 && q[2] == 1.0;
  const BivariateMomentSequence beta_t = trivial_alt ? beta
                                                     : apply_alt(beta, alt);
  const CurveSpec normal = CurveSpec::graph({0.0, 0.0, 1.0});

  const auto violated = check_curve_relations(beta_t, normal, cfg.residual_tol);
  if (!violated.empty()) {
    rep.status = Status::NoMeasure;
    rep.diagnostics.failed_condition = "parabola relations beta_{i,j+1} = "
                                       "q2 beta_{i+2,j} + q1 beta_{i+1,j} + "
                                       "q0 beta_{i,j}";
    rep.diagnostics.violated_relations = violated;
    return rep;
  }

  // gamma_t = beta~_{t mod 2, floor(t/2)}.
  const long top = 2L * d;
  std::vector<double> g(static_cast<std::size_t>(top) + 1);
  for (long t = 0; t <= top; ++t)
    g[static_cast<std::size_t>(t)] =
        beta_t.at(static_cast<int>(t % 2), static_cast<int>(t / 2));
  const UnivariateMomentSequence gamma(0, g);

  const HankelView Hfull = hankel_from(gamma);  // 2d is even, length is odd
  rep.diagnostics.rank_hankel = numeric_rank(Hfull.matrix, cfg.rank_tol);
  rep.diagnostics.rank_hankel_corner =
      numeric_rank(Hfull.upper_left(Hfull.m - 1), cfg.rank_tol);

  if (d % 2 == 0) {
    const MomentMatrix M = build_moment_matrix(beta_t);
    rep.diagnostics.rank_moment_matrix = M.rank(cfg.rank_tol);
    if (!is_psd(M.entries, cfg.psd_tol)) {
      rep.status = Status::NoMeasure;
      rep.diagnostics.failed_condition = "parabola (6): M_k not psd";
      return rep;
    }
    const bool corner_pd = is_pd(Hfull.upper_left(Hfull.m - 1), cfg.rank_tol);
    const bool rank_equal =
        rep.diagnostics.rank_hankel_corner == rep.diagnostics.rank_moment_matrix;
    if (!corner_pd && !rank_equal) {
      rep.status = Status::NoMeasure;
      rep.diagnostics.failed_condition =
          "parabola (6)(a) positive definiteness and (6)(b) rank equality "
          "both fail: rank " +
          std::to_string(rep.diagnostics.rank_hankel_corner) + " vs " +
          std::to_string(rep.diagnostics.rank_moment_matrix);
      return rep;
    }
  }

  const auto urep = solve_thmp(gamma, cfg);
  if (!urep.found()) {
    rep.status = Status::NoMeasure;
    rep.diagnostics.failed_condition =
        d % 2 == 0 ? "parabola univariate extraction: " + urep.diagnostic
                   : "parabola odd (5) prg: " + urep.diagnostic;
    rep.diagnostics.branch = urep.branch;
    return rep;
  }
  rep.diagnostics.branch = urep.branch;
  for (const auto& cm : urep.chosen_moments)
    rep.diagnostics.completion_values.push_back(cm);

  AtomicMeasure2D lifted = lift_measure(*urep.measure, normal);
  AtomicMeasure2D mu;
  mu.densities = lifted.densities;
  const AffineTransform inv = alt.inverse();
  for (const auto& a : lifted.atoms)
    mu.atoms.push_back(trivial_alt ? a : inv(a[0], a[1]));
  rep.diagnostics.moment_residual = moment_residual(beta, mu);
  if (rep.diagnostics.moment_residual > cfg.residual_tol) {
    rep.status = Status::NoMeasure;
    rep.diagnostics.failed_condition =
        "extracted measure failed verification, residual " +
        std::to_string(rep.diagnostics.moment_residual);
    return rep;
  }
  rep.status = Status::MeasureFound;
  rep.measure = std::move(mu);
  return rep;
}

SolveReport solve_cubic_odd(const BivariateMomentSequence& beta,
                            const ToleranceConfig& cfg) {
  const int d = beta.degree();
  if (d % 2 == 0) throw Error("solve_cubic_odd expects an odd degree");
  const int k = (d + 1) / 2;
  if (k < 3) throw DegreeTooLow("cubic odd solver needs ceil(d/2) >= 3");

  SolveReport rep;
  rep.tolerances = cfg;
  const CurveSpec curve = CurveSpec::graph({0.0, 0.0, 0.0, 1.0});

  const auto violated = check_curve_relations(beta, curve, cfg.residual_tol);
  if (!violated.empty()) throw RelationsViolated(violated);

  // gamma_t = beta_{t mod 3, floor(t/3)} for t <= 6k-5 and t = 6k-3.
  const long top = 6L * k - 3;
  std::vector<double> g(static_cast<std::size_t>(top) - 1);  // 0..6k-5
  for (long t = 0; t <= top - 2; ++t)
    g[static_cast<std::size_t>(t)] =
        beta.at(static_cast<int>(t % 3), static_cast<int>(t / 3));
  const UnivariateMomentSequence prefix(0, g);  // gamma_0..gamma_{6k-5}
  const double gamma_top = beta.at(0, static_cast<int>(top / 3));

  const auto gate = [&](const AtomicMeasure1D& nu,
                        double* resid_out) -> std::optional<AtomicMeasure2D> {
    AtomicMeasure2D mu = lift_measure(nu, curve);
    const double resid = moment_residual(beta, mu);
    if (resid_out) *resid_out = resid;
    if (resid > cfg.residual_tol) return std::nullopt;
    return mu;
  };

  const UnivariateMomentSequence low = prefix.sub(0, top - 3);  // 0..6k-6
  const HankelView Hlow = hankel_from(low);
  rep.diagnostics.rank_hankel = numeric_rank(Hlow.matrix, cfg.rank_tol);

  if (!is_psd(Hlow.matrix, cfg.psd_tol)) {
    rep.status = Status::NoMeasure;
    rep.diagnostics.failed_condition = "(M_{k-1})|_B not psd";
    return rep;
  }

  if (is_pd(Hlow.matrix, cfg.rank_tol)) {
    // Branch (a): try the minimal measure first, from the odd problem on
    // the determined prefix.
    const auto urep = solve_thmp(prefix, cfg);
    if (urep.found()) {
      double resid = 0.0;
      if (auto mu = gate(*urep.measure, &resid)) {
        rep.diagnostics.branch = "(a) positive definite, minimal rank";
        rep.diagnostics.moment_residual = resid;
        rep.status = Status::MeasureFound;
        rep.measure = std::move(*mu);
        return rep;
      }
    }
    // The top moment rules the minimal measure out; extend by one rank.
    // Fill gamma_{6k-4} above the flat value so the even part turns
    // positive definite, then solve with the given gamma_{6k-3}.
    // Border column of the [0..6k-4] Hankel: gamma_{3k-2+i}.
    Eigen::VectorXd border(Hlow.m + 1);
    for (int i = 0; i <= Hlow.m; ++i) border(i) = prefix.at(3L * k - 2 + i);
    const double flat = border.dot(Hlow.matrix.ldlt().solve(border));
    const double margin = std::max(1.0, prefix.max_abs());
    const double z = flat + margin;

    std::vector<double> ext(prefix.values());
    ext.push_back(z);          // gamma_{6k-4}
    ext.push_back(gamma_top);  // gamma_{6k-3}
    const auto urep2 = solve_thmp(UnivariateMomentSequence(0, ext), cfg);
    if (urep2.found()) {
      double resid = 0.0;
      if (auto mu = gate(*urep2.measure, &resid)) {
        rep.diagnostics.branch = "(a) positive definite, minimal rank + 1";
        rep.diagnostics.completion_values.emplace_back(top - 1, z);
        rep.diagnostics.moment_residual = resid;
        rep.status = Status::MeasureFound;
        rep.measure = std::move(*mu);
        return rep;
      }
    }
    rep.status = Status::Unknown;
    rep.diagnostics.failed_condition =
        "positive definite branch failed to verify an extraction";
    return rep;
  }

  // Branch (b): singular psd; the flat measure of gamma_0..gamma_{6k-6}
  // must reproduce gamma_{6k-5} and gamma_{6k-3}.
  const auto urep = solve_thmp(low, cfg);
  if (!urep.found()) {
    rep.status = Status::NoMeasure;
    rep.diagnostics.failed_condition =
        "(b) flat branch: " + urep.diagnostic;
    return rep;
  }
  double resid = 0.0;
  if (auto mu = gate(*urep.measure, &resid)) {
    rep.diagnostics.branch = "(b) flat recursion";
    rep.diagnostics.moment_residual = resid;
    rep.status = Status::MeasureFound;
    rep.measure = std::move(*mu);
    return rep;
  }
  rep.status = Status::NoMeasure;
  rep.diagnostics.failed_condition =
      "(b) the flat recursion does not reach gamma_{6k-5} or gamma_{6k-3}";
  return rep;
}

SolveReport solve_curve(const BivariateMomentSequence& beta,
                        const CurveSpec& curve, const ToleranceConfig& cfg) {
  const int d = beta.degree();
  const int k = (d + 1) / 2;

  try {
    if (curve.is_graph()) {
      const int ell = curve.ell();
      if (ell == 2) {
        if (k < 2) throw DegreeTooLow("parabola needs degree >= 3");
        return solve_parabola(beta, curve.coeffs(), cfg);
      }
      if (k < ell)
        throw DegreeTooLow("graph curve needs ceil(d/2) >= deg q");
      if (ell == 3 && d % 2 == 1) {
        const auto& q = curve.coeffs();
        if (q[0] == 0.0 && q[1] == 0.0 && q[2] == 0.0 && q[3] == 1.0)
          return solve_cubic_odd(beta, cfg);
        return solve_cubic_odd_via_alts(beta, q, cfg);
      }
      return solve_graph_general(beta, curve, cfg);
    }
    if (k < curve.ell() + 1)
      throw DegreeTooLow("hyperbolic curve needs ceil(d/2) >= ell + 1");
    return solve_hyperbolic_general(beta, curve, cfg);
  } catch (const RelationsViolated& e) {
    return relations_report(e, cfg);
  }
}

}  // namespace ctmp
