#include <cstdio>
#include <fstream>

#include "ctmp/io.hpp"
#include "doctest.h"

using namespace ctmp;

namespace {

std::string temp_path(const std::string& name) {
  return std::string("io_test_") + name;
}

void put_file(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  out << body;
}

}  // namespace

TEST_CASE("parse_curve_string") {
  const auto parab = parse_curve_string("y=x^2");
  CHECK(parab.is_graph());
  CHECK(parab.ell() == 2);

  const auto quartic = parse_curve_string("y=x^4");
  CHECK(quartic.coeffs().back() == 1.0);
  CHECK(quartic.coeffs()[2] == 0.0);

  const auto hyp = parse_curve_string("y*x^3=1");
  CHECK_FALSE(hyp.is_graph());
  CHECK(hyp.ell() == 3);

  CHECK_THROWS_AS(parse_curve_string("y=x^1"), Error);
  CHECK_THROWS_AS(parse_curve_string("y=exp(x)"), Error);
  CHECK_THROWS_AS(parse_curve_string("y*x^2=2"), Error);
  CHECK_THROWS_AS(parse_curve_string("y=x^"), Error);
}

TEST_CASE("problem files round-trip") {
  ProblemFile p;
  p.curve = CurveSpec::graph({0, 0, 0, 1});
  p.moments = BivariateMomentSequence(4);
  for (int i = 0; i <= 4; ++i)
    for (int j = 0; i + j <= 4; ++j)
      p.moments.set(i, j, 0.125 * i - 7.0 / 3.0 * j + 1.0);

  const std::string path = temp_path("problem.json");
  write_file(path, write_problem(p));
  const auto back = read_problem(path);
  CHECK(back.curve.is_graph());
  CHECK(back.curve.ell() == 3);
  CHECK(back.moments.degree() == 4);
  for (int i = 0; i <= 4; ++i)
    for (int j = 0; i + j <= 4; ++j)
      CHECK(back.moments.at(i, j) == p.moments.at(i, j));
  std::remove(path.c_str());
}

TEST_CASE("problem files must cover the simplex exactly") {
  const std::string path = temp_path("bad_problem.json");
  put_file(path,
           R"({"curve":"y=x^2","degree":1,"moments":[[0,0,1.0],[1,0,0.5]]})");
  CHECK_THROWS_AS(read_problem(path), Error);

  put_file(path,
           R"({"curve":"y=x^2","degree":1,)"
           R"("moments":[[0,0,1.0],[1,0,0.5],[0,1,0.5],[0,1,0.5]]})");
  CHECK_THROWS_AS(read_problem(path), Error);

  put_file(path, R"({"curve":"y=x^2","degree":1,)"
                 R"("moments":[[0,0,1.0],[1,0,0.5],[2,0,0.5]]})");
  CHECK_THROWS_AS(read_problem(path), Error);

  put_file(path, "{not json");
  CHECK_THROWS_AS(read_problem(path), Error);
  std::remove(path.c_str());
}

TEST_CASE("measure files") {
  const std::string path = temp_path("measure.json");
  put_file(path, R"({"atoms":[[1.0,1.0],[-1.0,1.0]],"densities":[0.5,0.5]})");
  const auto mu = read_measure(path);
  REQUIRE(mu.size() == 2);
  CHECK(mu.atoms[1][0] == -1.0);

  put_file(path, R"({"atoms":[[1.0,1.0]],"densities":[-0.5]})");
  CHECK_THROWS_AS(read_measure(path), Error);
  put_file(path, R"({"atoms":[[1.0,1.0]],"densities":[0.5,0.5]})");
  CHECK_THROWS_AS(read_measure(path), Error);
  std::remove(path.c_str());

  AtomicMeasure2D out{{{0.5, 0.25}}, {2.0}};
  const auto text = write_measure(out);
  CHECK(text.find("0.5") != std::string::npos);
  CHECK(text.find("\"densities\":[2]") != std::string::npos);
}

TEST_CASE("report writer is deterministic and tagged with tolerances") {
  SolveReport rep;
  rep.status = SolveReport::Status::NoMeasure;
  rep.diagnostics.rank_moment_matrix = 4;
  rep.diagnostics.rank_hankel_corner = 3;
  rep.diagnostics.failed_condition = "parabola (6)(b) rank equality";
  const auto a = write_report(rep);
  const auto b = write_report(rep);
  CHECK(a == b);
  CHECK(a.find("\"status\":\"NoMeasure\"") != std::string::npos);
  CHECK(a.find("\"rank_moment_matrix\":4") != std::string::npos);
  CHECK(a.find("\"rank_tol\":") != std::string::npos);
  CHECK(a.find("\"max_iter\":5000") != std::string::npos);
}

TEST_CASE("numbers carry 17 significant digits") {
  CHECK(format_number(1.0 / 3.0) == "0.33333333333333331");
  CHECK(format_number(122.0) == "122");
}
