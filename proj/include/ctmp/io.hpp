#pragma once

#include <optional>
#include <string>

#include "ctmp/bivariate.hpp"
#include "ctmp/completion.hpp"
#include "ctmp/types.hpp"

namespace ctmp {

// Problem ingestion: a curve, a degree, the full moment simplex and
// optional tolerance overrides.
struct ProblemFile {
  CurveSpec curve = CurveSpec::graph({0.0, 0.0, 1.0});
  BivariateMomentSequence moments{0};
  ToleranceConfig tolerances;
  bool has_tolerance_overrides = false;
};

// Curve descriptors: the strict shorthands "y=x^K" and "y*x^L=1", or a
// JSON object with explicit coefficients.
CurveSpec parse_curve_string(const std::string& text);
std::string curve_to_string(const CurveSpec& curve);

ProblemFile read_problem(const std::string& path);
std::string write_problem(const ProblemFile& problem);

AtomicMeasure2D read_measure(const std::string& path);
std::string write_measure(const AtomicMeasure2D& mu);

std::string write_report(const SolveReport& report);

// 17-significant-digit decimal form used across all outputs.
std::string format_number(double v);

void write_file(const std::string& path, const std::string& content);

}  // namespace ctmp
