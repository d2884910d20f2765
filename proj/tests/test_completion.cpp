#include <Eigen/Eigenvalues>
#include <random>

#include "ctmp/completion.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace ctmp;

namespace {

BivariateMomentSequence from_measure(const AtomicMeasure2D& mu, int d) {
  BivariateMomentSequence b(d);
  for (int i = 0; i <= d; ++i)
    for (int j = 0; i + j <= d; ++j)
      b.set(i, j, oracle::moment2d(mu.atoms, mu.densities, i, j));
  return b;
}

BivariateMomentSequence example_m2() {
  BivariateMomentSequence b(4);
  const double vals[5][5] = {{3, 2, 2, 2, 3},
                             {0, 0, 0, 0, 0},
                             {2, 2, 2, 0, 0},
                             {0, 0, 0, 0, 0},
                             {2, 0, 0, 0, 0}};
  for (int i = 0; i <= 4; ++i)
    for (int j = 0; i + j <= 4; ++j) b.set(i, j, vals[i][j]);
  return b;
}

PartialUnivariateSequence punched(const std::vector<double>& values, long k1,
                                  const std::vector<long>& holes) {
  PartialUnivariateSequence p(k1, k1 + static_cast<long>(values.size()) - 1);
  for (long t = p.k1(); t <= p.k2(); ++t) {
    if (std::find(holes.begin(), holes.end(), t) == holes.end())
      p.set_known(t, values[static_cast<std::size_t>(t - k1)]);
  }
  return p;
}

double min_eigenvalue(const UnivariateMomentSequence& v) {
  const auto H = hankel_from(v);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H.matrix,
                                                    Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

std::vector<double> monomial_q(int ell) {
  std::vector<double> q(ell + 1, 0.0);
  q.back() = 1.0;
  return q;
}

}  // namespace

TEST_CASE("complete_single_entry: 2x2") {
  const auto out = complete_single_entry(punched({1, 0, 1}, 0, {1}), 1e-9);
  CHECK(out.z_plus == doctest::Approx(1.0));
  CHECK(out.z_minus == doctest::Approx(-1.0));
  for (double z : {out.z_plus, out.z_minus}) {
    const auto seq = punched({1, 0, 1}, 0, {1}).completed_with({{1, z}});
    CHECK(min_eigenvalue(seq) >= -1e-12);
    CHECK(sequence_rank(seq, 1e-9) == 1);
  }
}

TEST_CASE("complete_single_entry: 3x3 quadratic determinant") {
  // det [[1,0,1],[0,1,z],[1,z,2]] = 1 - z^2 by direct interpolation:
  // values at z = 0, 1, -1 are 1, 0, 0.
  auto det_at = [](double z) {
    Eigen::Matrix3d A{{1, 0, 1}, {0, 1, z}, {1, z, 2}};
    return A.determinant();
  };
  CHECK(det_at(0) == doctest::Approx(1.0));
  CHECK(det_at(1) == doctest::Approx(0.0));
  CHECK(det_at(-1) == doctest::Approx(0.0));

  const auto part = punched({1, 0, 1, 0, 2}, 0, {3});
  const auto out = complete_single_entry(part, 1e-9);
  CHECK(out.z_plus == doctest::Approx(1.0));
  CHECK(out.z_minus == doctest::Approx(-1.0));

  const auto at_plus = part.completed_with({{3, out.z_plus}});
  CHECK(min_eigenvalue(at_plus) >= -1e-12);
  const auto H = hankel_from(at_plus);
  CHECK(numeric_rank(H.matrix, 1e-9) == 2);
}

TEST_CASE("complete_single_entry: corner must be positive definite") {
  CHECK_THROWS_AS(complete_single_entry(punched({1, 2, 1, 0, 1}, 0, {3}), 1e-9),
                  CornerNotPD);
}

TEST_CASE("complete_single_entry: infeasible data has no real root") {
  // gamma_4 = 0 cannot close (1, 0, 1, z, 0) into a psd matrix.
  CHECK_THROWS_AS(complete_single_entry(punched({1, 0, 1, 0, 0}, 0, {3}), 1e-9),
                  NonrealRoots);
}

TEST_CASE("complete_single_entry: hole next to the lower end") {
  // Strong-problem orientation: moments of three atoms on [-4, 2] with
  // the entry at -3 punched. The lower-right corner is positive definite
  // and the rank-3 data makes the true value one of the two roots.
  std::mt19937 gen(12001);
  const auto xs = oracle::random_points_no_zero(gen, 3, 0.6, 1.5, 0.2);
  const auto dens = oracle::random_densities(gen, 3);
  std::vector<double> v;
  for (long t = -4; t <= 2; ++t) v.push_back(oracle::moment1d(xs, dens, t));
  const double truth = v[1];
  const auto part = punched(v, -4, {-3});
  const auto out = complete_single_entry(part, 1e-9);
  const bool hit = std::abs(out.z_plus - truth) < 1e-6 ||
                   std::abs(out.z_minus - truth) < 1e-6;
  CHECK(hit);
}

TEST_CASE("complete_single_entry: random partially pd instances") {
  std::mt19937 gen(12002);
  for (int rep = 0; rep < 20; ++rep) {
    const int m = 2 + static_cast<int>(gen() % 6);
    const auto xs = oracle::random_points(gen, m + 1, -1.5, 1.5, 0.08);
    const auto dens = oracle::random_densities(gen, m + 1);
    std::vector<double> v;
    for (long t = 0; t <= 2 * m; ++t)
      v.push_back(oracle::moment1d(xs, dens, t));
    const auto part = punched(v, 0, {2L * m - 1});
    const auto out = complete_single_entry(part, 1e-9);
    for (double z : {out.z_plus, out.z_minus}) {
      const auto seq = part.completed_with({{2L * m - 1, z}});
      const auto H = hankel_from(seq);
      const double scale = H.matrix.cwiseAbs().maxCoeff();
      CHECK(min_eigenvalue(seq) >= -1e-8 * scale);
      CHECK(numeric_rank(H.matrix, 1e-7) == m);
    }
  }
}

TEST_CASE("complete_feasibility: holes of a genuine parabola sequence") {
  // Three atoms on the parabola, degree 6; the flat structure pins the
  // first completed value to the measure's own moment.
  std::mt19937 gen(12003);
  const auto xs = oracle::random_points(gen, 3, -1.3, 1.3, 0.3);
  const auto dens = oracle::random_densities(gen, 3);
  std::vector<double> v;
  for (long t = 0; t <= 14; ++t) v.push_back(oracle::moment1d(xs, dens, t));
  const auto part = punched(v, 0, {13, 14});

  ToleranceConfig cfg;
  cfg.max_iter = 20000;
  const auto out = complete_feasibility(part, cfg);
  REQUIRE(out.status == FeasibilityOutcome::Status::Feasible);
  CHECK(out.completed->at(13) == doctest::Approx(v[13]).epsilon(1e-7).scale(
                                     std::max(1.0, std::abs(v[13]))));
  CHECK(out.gap < 1e-7);
}

TEST_CASE("complete_feasibility: negative diagonal is certified infeasible") {
  PartialUnivariateSequence p(0, 4);
  p.set_known(0, 1.0);
  p.set_known(2, -1.0);
  const auto out = complete_feasibility(p);
  CHECK(out.status == FeasibilityOutcome::Status::Infeasible);
  CHECK_FALSE(out.certificate.empty());
}

TEST_CASE("complete_feasibility: tight iteration budget reports unknown") {
  // Moments of d_0 + d_2 with the top entry raised off the flat value:
  // the two coupled holes are pinned to a single feasible point.
  PartialUnivariateSequence p =
      punched({2, 2, 4, 8, 16, 32, 64, 128, 257}, 0, {5, 7});
  ToleranceConfig cfg;
  cfg.max_iter = 5;
  const auto out = complete_feasibility(p, cfg);
  CHECK(out.status == FeasibilityOutcome::Status::Unknown);
  CHECK(out.gap > 0.0);
  CHECK(out.iterations <= 5);
  CHECK(out.iterations >= 1);

  // The same instance resolves once the budget is realistic.
  const auto good = complete_feasibility(p);
  CHECK(good.status == FeasibilityOutcome::Status::Feasible);
  CHECK(good.completed->at(5) == doctest::Approx(32.0).epsilon(1e-5));
  CHECK(good.completed->at(7) == doctest::Approx(128.0).epsilon(1e-5));
}

TEST_CASE("complete_feasibility: widening the hole set keeps feasibility") {
  std::mt19937 gen(12004);
  for (int rep = 0; rep < 50; ++rep) {
    const int m = 3 + static_cast<int>(gen() % 4);
    const auto xs = oracle::random_points(gen, m + 1, -1.4, 1.4, 0.1);
    const auto dens = oracle::random_densities(gen, m + 1);
    std::vector<double> v;
    for (long t = 0; t <= 2 * m; ++t)
      v.push_back(oracle::moment1d(xs, dens, t));

    const long h1 = 1 + static_cast<long>(gen() % (2 * m - 1));
    long h2 = h1;
    while (h2 == h1) h2 = 1 + static_cast<long>(gen() % (2 * m - 1));

    const auto one = complete_feasibility(punched(v, 0, {h1}));
    REQUIRE(one.status == FeasibilityOutcome::Status::Feasible);
    const auto two = complete_feasibility(punched(v, 0, {h1, h2}));
    CHECK(two.status == FeasibilityOutcome::Status::Feasible);
  }
}

TEST_CASE("export_sdpa: 2x2 single unknown") {
  const auto text = export_sdpa(punched({1, 0, 1}, 0, {1}));
  // mDIM 1, one block of size 2, two F0 entries and one F1 entry.
  CHECK(text.find("1\n1\n2\n0\n") == 0);
  int entries = 0;
  for (char c : text)
    if (c == '\n') ++entries;
  CHECK(entries == 4 + 3);
  CHECK(text.find("0 1 1 1 -1\n") != std::string::npos);
  CHECK(text.find("0 1 2 2 -1\n") != std::string::npos);
  CHECK(text.find("1 1 1 2 1\n") != std::string::npos);
  CHECK(text.find("\r") == std::string::npos);
}

TEST_CASE("export_sdpa: cubic and hyperbolic dimensions") {
  std::mt19937 gen(12005);
  const int k = 3;
  const auto xs = oracle::random_points(gen, 3, -1.2, 1.2, 0.2);
  const auto dens = oracle::random_densities(gen, 3);

  const auto red_c = reduce_to_univariate(
      from_measure(oracle::on_graph(monomial_q(3), xs, dens), 2 * k),
      CurveSpec::graph(monomial_q(3)));
  const auto text_c = export_sdpa(red_c.partial);
  CHECK(text_c.rfind("3\n1\n11\n", 0) == 0);  // 3 vars, block k*ell + 2 = 11

  const auto ys = oracle::random_points_no_zero(gen, 3, 0.5, 1.5, 0.2);
  const auto red_h = reduce_to_univariate(
      from_measure(oracle::on_hyperbolic(2, ys, dens), 2 * k),
      CurveSpec::hyperbolic(2));
  const auto text_h = export_sdpa(red_h.partial);
  // 5 variables; the block covers the full strong range [-2k*ell-2, 2k+2]
  // of the worked example, a Hankel matrix of size k*(ell+1) + 3.
  CHECK(text_h.rfind("5\n1\n12\n", 0) == 0);
}

TEST_CASE("export_sdpa is deterministic") {
  const auto p = punched({2, 1, 3, 1, 5}, 0, {1, 4});
  CHECK(export_sdpa(p) == export_sdpa(p));
}

TEST_CASE("solve_parabola: the no-measure example") {
  const auto rep = solve_parabola(example_m2(), {0, 0, 1});
  CHECK(rep.status == SolveReport::Status::NoMeasure);
  CHECK(rep.diagnostics.rank_moment_matrix == 4);
  CHECK(rep.diagnostics.rank_hankel_corner == 3);
  CHECK(rep.diagnostics.failed_condition.find("(6)") != std::string::npos);
  CHECK(rep.diagnostics.failed_condition.find("3") != std::string::npos);
  CHECK(rep.diagnostics.failed_condition.find("4") != std::string::npos);
}

TEST_CASE("solve_parabola: the parametrized degree-6 example") {
  const double u1 = 1.0, u2 = 3.0;
  const double w0 = 1.0 / 3.0, w1 = 0.25, w2 = 1.0 / 12.0;
  const AtomicMeasure2D mu{{{0.0, 0.0},
                            {1.0, u1},
                            {-1.0, u1},
                            {std::sqrt(3.0), u2},
                            {-std::sqrt(3.0), u2}},
                           {w0, w1, w1, w2, w2}};
  const auto beta = from_measure(mu, 6);
  CHECK(beta.at(0, 5) == doctest::Approx(41.0));
  CHECK(beta.at(0, 6) == doctest::Approx(122.0));

  const auto rep = solve_parabola(beta, {0, 0, 1});
  REQUIRE(rep.status == SolveReport::Status::MeasureFound);
  REQUIRE(rep.measure->size() == 5);
  const double expected_x[5] = {-std::sqrt(3.0), -1.0, 0.0, 1.0,
                                std::sqrt(3.0)};
  const double expected_w[5] = {w2, w1, w0, w1, w2};
  for (int i = 0; i < 5; ++i) {
    CHECK(rep.measure->atoms[i][0] == doctest::Approx(expected_x[i]));
    CHECK(rep.measure->densities[i] == doctest::Approx(expected_w[i]));
  }
  CHECK(rep.diagnostics.moment_residual < 1e-8);
}

TEST_CASE("solve_parabola: single atom and general coefficients") {
  const AtomicMeasure2D one{{{1.0, 1.0}}, {1.0}};
  const auto rep = solve_parabola(from_measure(one, 4), {0, 0, 1});
  REQUIRE(rep.status == SolveReport::Status::MeasureFound);
  REQUIRE(rep.measure->size() == 1);
  CHECK(rep.measure->atoms[0][0] == doctest::Approx(1.0));
  CHECK(rep.measure->atoms[0][1] == doctest::Approx(1.0));

  // Shifted parabola y = 2x^2 + x - 1.
  std::mt19937 gen(12006);
  const std::vector<double> q{-1.0, 1.0, 2.0};
  const auto xs = oracle::random_points(gen, 3, -1.2, 1.2, 0.3);
  const auto mu = oracle::on_graph(q, xs, oracle::random_densities(gen, 3));
  const auto rep2 = solve_parabola(from_measure(mu, 6), q);
  REQUIRE(rep2.status == SolveReport::Status::MeasureFound);
  CHECK(rep2.diagnostics.moment_residual < 1e-8);
}

TEST_CASE("solve_parabola: odd degree data") {
  std::mt19937 gen(12007);
  const auto xs = oracle::random_points(gen, 3, -1.2, 1.2, 0.3);
  const auto mu =
      oracle::on_graph(monomial_q(2), xs, oracle::random_densities(gen, 3));
  const auto rep = solve_parabola(from_measure(mu, 5), monomial_q(2));
  REQUIRE(rep.status == SolveReport::Status::MeasureFound);
  CHECK(rep.measure->size() == 3);
  CHECK(rep.diagnostics.moment_residual < 1e-8);
}

TEST_CASE("solve_cubic_odd") {
  SUBCASE("three symmetric atoms at degree five") {
    const AtomicMeasure2D mu{{{0.0, 0.0}, {1.0, 1.0}, {-1.0, -1.0}},
                             {1.0, 1.0, 1.0}};
    const auto rep = solve_cubic_odd(from_measure(mu, 5));
    REQUIRE(rep.status == SolveReport::Status::MeasureFound);
    REQUIRE(rep.measure->size() == 3);
    CHECK(rep.measure->atoms[0][0] == doctest::Approx(-1.0));
    CHECK(rep.measure->atoms[1][0] == doctest::Approx(0.0));
    CHECK(rep.measure->atoms[2][0] == doctest::Approx(1.0));
  }

  SUBCASE("generic positive definite branch") {
    std::mt19937 gen(12008);
    const int k = 3;
    const int n = 3 * k - 2;
    const auto xs = oracle::random_points(gen, n, -1.4, 1.4, 0.12);
    const auto dens = oracle::random_densities(gen, n);
    const auto mu = oracle::on_graph(monomial_q(3), xs, dens);
    const auto rep = solve_cubic_odd(from_measure(mu, 2 * k - 1));
    REQUIRE(rep.status == SolveReport::Status::MeasureFound);
    CHECK(rep.measure->size() <= static_cast<std::size_t>(3 * k - 1));
    CHECK(rep.diagnostics.moment_residual < 1e-7);
    CHECK(rep.diagnostics.branch.find("(a)") != std::string::npos);
  }

  SUBCASE("violated relation") {
    const AtomicMeasure2D mu{{{0.5, 0.125}, {1.0, 1.0}}, {1.0, 1.0}};
    auto beta = from_measure(mu, 5);
    beta.set(0, 2, beta.at(0, 2) + 1.0);
    CHECK_THROWS_AS(solve_cubic_odd(beta), RelationsViolated);
  }
}

TEST_CASE("solve_curve: worked examples") {
  SUBCASE("y = x^3, degree 6, three atoms") {
    const AtomicMeasure2D mu{{{0.0, 0.0}, {1.0, 1.0}, {-1.0, -1.0}},
                             {1.0, 0.5, 0.25}};
    const auto rep = solve_curve(from_measure(mu, 6),
                                 CurveSpec::graph(monomial_q(3)));
    REQUIRE(rep.status == SolveReport::Status::MeasureFound);
    CHECK(rep.measure->size() <= 9);
    CHECK(rep.diagnostics.moment_residual < 1e-8);
  }

  SUBCASE("y x^2 = 1, degree 6, three atoms") {
    const std::vector<double> xs{-1.0, 1.0, 2.0};
    const auto mu = oracle::on_hyperbolic(2, xs, {1.0, 1.0, 1.0});
    const auto rep =
        solve_curve(from_measure(mu, 6), CurveSpec::hyperbolic(2));
    REQUIRE(rep.status == SolveReport::Status::MeasureFound);
    CHECK(rep.measure->size() <= 9);
    CHECK(rep.diagnostics.moment_residual < 1e-8);
  }

  SUBCASE("the parabola no-measure example dispatches") {
    const auto rep =
        solve_curve(example_m2(), CurveSpec::graph(monomial_q(2)));
    CHECK(rep.status == SolveReport::Status::NoMeasure);
    CHECK(rep.diagnostics.rank_moment_matrix == 4);
    CHECK(rep.diagnostics.rank_hankel_corner == 3);
  }

  SUBCASE("degree bounds") {
    const AtomicMeasure2D mu{{{1.0, 1.0}}, {1.0}};
    CHECK_THROWS_AS(solve_curve(from_measure(mu, 4),
                                CurveSpec::graph(monomial_q(3))),
                    DegreeTooLow);
    CHECK_THROWS_AS(
        solve_curve(from_measure(mu, 4), CurveSpec::hyperbolic(2)),
        DegreeTooLow);
  }
}

TEST_CASE("solve_curve: full-rank even cubic needs the two-root step") {
  std::mt19937 gen(12009);
  const int k = 3;
  const int n = 3 * k;  // rank fills the reduced Hankel completely
  const auto xs = oracle::random_points(gen, n, -1.5, 1.5, 0.14);
  const auto dens = oracle::random_densities(gen, n);
  const auto mu = oracle::on_graph(monomial_q(3), xs, dens);
  const auto rep =
      solve_curve(from_measure(mu, 2 * k), CurveSpec::graph(monomial_q(3)));
  REQUIRE(rep.status == SolveReport::Status::MeasureFound);
  CHECK(rep.measure->size() == static_cast<std::size_t>(3 * k));
  CHECK(rep.diagnostics.moment_residual < 1e-7);
  CHECK_FALSE(rep.diagnostics.completion_values.empty());
}

TEST_CASE("solve_curve: relation violations surface as NoMeasure") {
  const AtomicMeasure2D mu{{{0.5, 0.125}, {1.0, 1.0}}, {1.0, 1.0}};
  auto beta = from_measure(mu, 6);
  beta.set(1, 1, beta.at(1, 1) + 0.3);
  const auto rep = solve_curve(beta, CurveSpec::graph(monomial_q(3)));
  CHECK(rep.status == SolveReport::Status::NoMeasure);
  CHECK_FALSE(rep.diagnostics.violated_relations.empty());
}

TEST_CASE("solve_curve verdict is invariant under the normalizing shift") {
  std::mt19937 gen(12010);
  const std::vector<double> q{0.4, -0.3, 0.9, 1.0};
  const auto xs = oracle::random_points(gen, 3, -1.2, 1.2, 0.2);
  const auto dens = oracle::random_densities(gen, 3);
  const auto mu = oracle::on_graph(q, xs, dens);
  const auto beta = from_measure(mu, 6);

  const auto rep = solve_curve(beta, CurveSpec::graph(q));
  REQUIRE(rep.status == SolveReport::Status::MeasureFound);

  // Shift x by c: the curve becomes y = q(x - c).
  const double c = 0.7;
  AffineTransform shift;
  shift.a = c;
  const auto beta2 = apply_alt(beta, shift);
  const auto q2 = oracle::shift_poly(q, -c);
  const auto rep2 = solve_curve(beta2, CurveSpec::graph(q2));
  CHECK(rep2.status == SolveReport::Status::MeasureFound);
  CHECK(rep.measure->size() == rep2.measure->size());
}

TEST_CASE("solve_curve: soundness of reported measures") {
  std::mt19937 gen(12011);
  for (int rep_i = 0; rep_i < 25; ++rep_i) {
    const bool graph_case = rep_i % 2 == 0;
    const int n = 1 + static_cast<int>(gen() % 4);
    const auto dens = oracle::random_densities(gen, n);
    BivariateMomentSequence beta(0);
    CurveSpec curve = CurveSpec::hyperbolic(2);
    if (graph_case) {
      const auto xs = oracle::random_points(gen, n, -1.3, 1.3, 0.15);
      curve = CurveSpec::graph(monomial_q(3));
      beta = from_measure(oracle::on_graph(monomial_q(3), xs, dens), 6);
    } else {
      const auto xs = oracle::random_points_no_zero(gen, n, 0.5, 1.6, 0.15);
      beta = from_measure(oracle::on_hyperbolic(2, xs, dens), 6);
    }
    const auto out = solve_curve(beta, curve);
    REQUIRE(out.status == SolveReport::Status::MeasureFound);
    CHECK(moment_residual(beta, *out.measure) < 1e-7);
    for (const auto& a : out.measure->atoms)
      CHECK(std::abs(curve.equation_residual(a[0], a[1])) < 1e-6);
  }
}
