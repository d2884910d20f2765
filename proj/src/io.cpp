#include "ctmp/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace ctmp {

using nlohmann::json;

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path + " for writing");
  out << content;
}

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

long parse_positive_int(const std::string& s) {
  if (s.empty()) return -1;
  long v = 0;
  for (char c : s) {
    if (c < '0' || c > '9') return -1;
    v = v * 10 + (c - '0');
    if (v > 1000) return -1;
  }
  return v;
}

CurveSpec curve_from_json(const json& j) {
  if (j.is_string()) return parse_curve_string(j.get<std::string>());
  if (j.is_object()) {
    const std::string type = j.at("type").get<std::string>();
    if (type == "graph")
      return CurveSpec::graph(j.at("coeffs").get<std::vector<double>>());
    if (type == "hyperbolic")
      return CurveSpec::hyperbolic(j.at("ell").get<int>());
    throw Error("unknown curve type '" + type + "'");
  }
  throw Error("curve must be a string or an object");
}

}  // namespace

CurveSpec parse_curve_string(const std::string& text) {
  // "y=x^K"
  if (text.rfind("y=x^", 0) == 0) {
    const long k = parse_positive_int(text.substr(4));
    if (k < 2) throw Error("unsupported curve '" + text + "'");
    std::vector<double> q(static_cast<std::size_t>(k) + 1, 0.0);
    q.back() = 1.0;
    return CurveSpec::graph(std::move(q));
  }
  // "y*x^L=1"
  if (text.rfind("y*x^", 0) == 0) {
    const auto eq = text.find('=');
    if (eq == std::string::npos || text.substr(eq) != "=1")
      throw Error("unsupported curve '" + text + "'");
    const long l = parse_positive_int(text.substr(4, eq - 4));
    if (l < 2) throw Error("unsupported curve '" + text + "'");
    return CurveSpec::hyperbolic(static_cast<int>(l));
  }
  throw Error("unsupported curve '" + text + "'");
}

std::string curve_to_string(const CurveSpec& curve) {
  std::ostringstream os;
  if (curve.is_graph()) {
    os << "{\"type\":\"graph\",\"coeffs\":[";
    for (std::size_t i = 0; i < curve.coeffs().size(); ++i)
      os << (i ? "," : "") << format_number(curve.coeffs()[i]);
    os << "]}";
  } else {
    os << "{\"type\":\"hyperbolic\",\"ell\":" << curve.ell() << "}";
  }
  return os.str();
}

ProblemFile read_problem(const std::string& path) {
  json j;
  try {
    j = json::parse(slurp(path));
  } catch (const json::exception& e) {
    throw Error(std::string("malformed JSON: ") + e.what());
  }
  try {
    ProblemFile p;
    p.curve = curve_from_json(j.at("curve"));
    const int d = j.at("degree").get<int>();
    if (d < 0) throw Error("degree must be nonnegative");
    p.moments = BivariateMomentSequence(d);

    std::vector<std::vector<bool>> seen(d + 1);
    for (int i = 0; i <= d; ++i) seen[i].assign(d + 1 - i, false);
    for (const auto& row : j.at("moments")) {
      if (!row.is_array() || row.size() != 3)
        throw Error("each moment must be [i, j, value]");
      const int i = row[0].get<int>();
      const int jj = row[1].get<int>();
      if (i < 0 || jj < 0 || i + jj > d)
        throw Error("moment index outside the degree simplex");
      if (seen[i][jj]) throw Error("duplicate moment index");
      seen[i][jj] = true;
      p.moments.set(i, jj, row[2].get<double>());
    }
    for (int i = 0; i <= d; ++i)
      for (int jj = 0; i + jj <= d; ++jj)
        if (!seen[i][jj])
          throw Error("moment (" + std::to_string(i) + "," +
                      std::to_string(jj) + ") missing");

    if (j.contains("tolerances")) {
      const auto& t = j.at("tolerances");
      p.has_tolerance_overrides = true;
      if (t.contains("rank_tol")) p.tolerances.rank_tol = t["rank_tol"];
      if (t.contains("psd_tol")) p.tolerances.psd_tol = t["psd_tol"];
      if (t.contains("residual_tol"))
        p.tolerances.residual_tol = t["residual_tol"];
      if (t.contains("atom_merge_tol"))
        p.tolerances.atom_merge_tol = t["atom_merge_tol"];
      if (t.contains("max_iter")) p.tolerances.max_iter = t["max_iter"];
    }
    return p;
  } catch (const json::exception& e) {
    throw Error(std::string("invalid problem file: ") + e.what());
  }
}

namespace {

void append_tolerances(std::ostringstream& os, const ToleranceConfig& t) {
  os << "{\"rank_tol\":" << format_number(t.rank_tol)
     << ",\"psd_tol\":" << format_number(t.psd_tol)
     << ",\"residual_tol\":" << format_number(t.residual_tol)
     << ",\"atom_merge_tol\":" << format_number(t.atom_merge_tol)
     << ",\"max_iter\":" << t.max_iter << "}";
}

void append_measure(std::ostringstream& os, const AtomicMeasure2D& mu) {
  os << "{\"atoms\":[";
  for (std::size_t i = 0; i < mu.atoms.size(); ++i)
    os << (i ? "," : "") << "[" << format_number(mu.atoms[i][0]) << ","
       << format_number(mu.atoms[i][1]) << "]";
  os << "],\"densities\":[";
  for (std::size_t i = 0; i < mu.densities.size(); ++i)
    os << (i ? "," : "") << format_number(mu.densities[i]);
  os << "]}";
}

}  // namespace

std::string write_problem(const ProblemFile& problem) {
  std::ostringstream os;
  const int d = problem.moments.degree();
  os << "{\"curve\":" << curve_to_string(problem.curve)
     << ",\"degree\":" << d << ",\"moments\":[";
  bool first = true;
  for (int g = 0; g <= d; ++g)
    for (int j = 0; j <= g; ++j) {
      const int i = g - j;
      os << (first ? "" : ",") << "[" << i << "," << j << ","
         << format_number(problem.moments.at(i, j)) << "]";
      first = false;
    }
  os << "]";
  if (problem.has_tolerance_overrides) {
    os << ",\"tolerances\":";
    append_tolerances(os, problem.tolerances);
  }
  os << "}\n";
  return os.str();
}

AtomicMeasure2D read_measure(const std::string& path) {
  json j;
  try {
    j = json::parse(slurp(path));
  } catch (const json::exception& e) {
    throw Error(std::string("malformed JSON: ") + e.what());
  }
  try {
    AtomicMeasure2D mu;
    for (const auto& a : j.at("atoms")) {
      if (!a.is_array() || a.size() != 2)
        throw Error("each atom must be [x, y]");
      mu.atoms.push_back({a[0].get<double>(), a[1].get<double>()});
    }
    for (const auto& dens : j.at("densities")) {
      const double v = dens.get<double>();
      if (!(v > 0.0)) throw Error("densities must be positive");
      mu.densities.push_back(v);
    }
    if (mu.atoms.size() != mu.densities.size())
      throw Error("atoms and densities must have equal length");
    return mu;
  } catch (const json::exception& e) {
    throw Error(std::string("invalid measure file: ") + e.what());
  }
}

std::string write_measure(const AtomicMeasure2D& mu) {
  std::ostringstream os;
  append_measure(os, mu);
  os << "\n";
  return os.str();
}

std::string write_report(const SolveReport& report) {
  std::ostringstream os;
  const char* status = report.status == SolveReport::Status::MeasureFound
                           ? "MeasureFound"
                           : report.status == SolveReport::Status::NoMeasure
                                 ? "NoMeasure"
                                 : "Unknown";
  os << "{\"status\":\"" << status << "\",\"measure\":";
  if (report.measure)
    append_measure(os, *report.measure);
  else
    os << "null";

  const auto& dg = report.diagnostics;
  os << ",\"diagnostics\":{";
  os << "\"rank_moment_matrix\":" << dg.rank_moment_matrix;
  os << ",\"rank_hankel\":" << dg.rank_hankel;
  os << ",\"rank_hankel_corner\":" << dg.rank_hankel_corner;
  os << ",\"failed_condition\":" << json(dg.failed_condition).dump();
  os << ",\"branch\":" << json(dg.branch).dump();
  os << ",\"completion_values\":[";
  for (std::size_t i = 0; i < dg.completion_values.size(); ++i)
    os << (i ? "," : "") << "[" << dg.completion_values[i].first << ","
       << format_number(dg.completion_values[i].second) << "]";
  os << "],\"moment_residual\":" << format_number(dg.moment_residual);
  os << ",\"violated_relations\":[";
  for (std::size_t i = 0; i < dg.violated_relations.size(); ++i)
    os << (i ? "," : "") << "[" << dg.violated_relations[i].first << ","
       << dg.violated_relations[i].second << "]";
  os << "],\"feasibility_gap\":" << format_number(dg.feasibility_gap);
  os << ",\"feasibility_iterations\":" << dg.feasibility_iterations;
  os << "},\"tolerances\":";
  append_tolerances(os, report.tolerances);
  os << "}\n";
  return os.str();
}

}  // namespace ctmp
