#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "ctmp/completion.hpp"
#include "ctmp/io.hpp"

namespace {

using namespace ctmp;

constexpr int kExitOk = 0;
constexpr int kExitInputError = 1;
constexpr int kExitNoMeasure = 2;
constexpr int kExitUnknown = 3;

struct ToleranceFlags {
  double rank_tol = -1, psd_tol = -1, residual_tol = -1;
  int max_iter = -1;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--rank-tol", rank_tol, "relative rank threshold");
    cmd->add_option("--psd-tol", psd_tol, "psd eigenvalue threshold");
    cmd->add_option("--residual-tol", residual_tol, "moment residual bound");
    cmd->add_option("--max-iter", max_iter, "completion iteration cap");
  }

  ToleranceConfig apply(ToleranceConfig t) const {
    if (rank_tol > 0) t.rank_tol = rank_tol;
    if (psd_tol > 0) t.psd_tol = psd_tol;
    if (residual_tol > 0) t.residual_tol = residual_tol;
    if (max_iter > 0) t.max_iter = max_iter;
    return t;
  }
};

void emit(const std::string& out_path, const std::string& content) {
  if (out_path.empty())
    std::cout << content;
  else
    write_file(out_path, content);
}

int status_code(const SolveReport& rep) {
  switch (rep.status) {
    case SolveReport::Status::MeasureFound:
      return kExitOk;
    case SolveReport::Status::NoMeasure:
      return kExitNoMeasure;
    default:
      return kExitUnknown;
  }
}

int run_solve(const std::string& input, const std::string& out,
              const ToleranceFlags& flags) {
  const ProblemFile p = read_problem(input);
  const ToleranceConfig cfg = flags.apply(p.tolerances);
  const SolveReport rep = solve_curve(p.moments, p.curve, cfg);
  emit(out, write_report(rep));
  return status_code(rep);
}

int run_synth(const std::string& measure_path, int degree,
              const std::string& curve_text, const std::string& out) {
  const AtomicMeasure2D mu = read_measure(measure_path);
  ProblemFile p;
  p.curve = parse_curve_string(curve_text);
  p.moments = synth_moments(mu, degree);
  emit(out, write_problem(p));
  return kExitOk;
}

int run_verify(const std::string& input, const std::string& measure_path,
               const std::string& out) {
  const ProblemFile p = read_problem(input);
  const AtomicMeasure2D mu = read_measure(measure_path);
  const double resid = moment_residual(p.moments, mu);
  double curve_resid = 0.0;
  for (const auto& a : mu.atoms)
    curve_resid = std::max(
        curve_resid, std::abs(p.curve.equation_residual(a[0], a[1])));
  std::string body = "{\"moment_residual\":" + format_number(resid) +
                     ",\"curve_residual\":" + format_number(curve_resid) +
                     "}\n";
  emit(out, body);
  return kExitOk;
}

int run_check(const std::string& input, const std::string& out,
              const ToleranceFlags& flags) {
  const ProblemFile p = read_problem(input);
  const ToleranceConfig cfg = flags.apply(p.tolerances);
  const auto violated =
      check_curve_relations(p.moments, p.curve, cfg.residual_tol);
  const MomentMatrix M = build_moment_matrix(p.moments);

  std::string body = "{\"relations_violated\":[";
  for (std::size_t i = 0; i < violated.size(); ++i)
    body += std::string(i ? "," : "") + "[" + std::to_string(violated[i].first) +
            "," + std::to_string(violated[i].second) + "]";
  body += "]";
  if (M.fully_defined()) {
    body += ",\"moment_matrix_psd\":";
    body += is_psd(M.entries, cfg.psd_tol) ? "true" : "false";
    body += ",\"moment_matrix_rank\":" + std::to_string(M.rank(cfg.rank_tol));
    body += ",\"eigenvalues\":[";
    const auto ev = M.eigenvalues();
    for (std::size_t i = 0; i < ev.size(); ++i)
      body += std::string(i ? "," : "") + format_number(ev[i]);
    body += "]";
  }
  body += "}\n";
  emit(out, body);
  return kExitOk;
}

int run_export(const std::string& input, const std::string& out) {
  const ProblemFile p = read_problem(input);
  const ReductionResult red = reduce_to_univariate(p.moments, p.curve);
  emit(out, export_sdpa(red.partial));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Truncated moment problems on the curves y=q(x) and y*x^l=1"};
  app.require_subcommand(1);

  std::string input, out, measure_path, curve_text;
  int degree = -1;
  ToleranceFlags flags;

  auto* solve = app.add_subcommand("solve", "decide solvability and extract a measure");
  solve->add_option("--input", input, "problem JSON")->required();
  solve->add_option("--out", out, "report path (stdout if omitted)");
  flags.add_to(solve);

  auto* synth = app.add_subcommand("synth", "moments of a measure file");
  synth->add_option("--measure", measure_path, "measure JSON")->required();
  synth->add_option("--degree", degree, "target degree")->required();
  synth->add_option("--curve", curve_text, "curve tag for the problem file")
      ->required();
  synth->add_option("--out", out, "problem path (stdout if omitted)");

  auto* verify = app.add_subcommand("verify", "residual of a measure against a problem");
  verify->add_option("--input", input, "problem JSON")->required();
  verify->add_option("--measure", measure_path, "measure JSON")->required();
  verify->add_option("--out", out, "output path (stdout if omitted)");

  auto* check = app.add_subcommand("check", "relation and psd diagnostics only");
  check->add_option("--input", input, "problem JSON")->required();
  check->add_option("--out", out, "output path (stdout if omitted)");
  flags.add_to(check);

  auto* exp = app.add_subcommand("export-sdpa", "write the completion LMI");
  exp->add_option("--input", input, "problem JSON")->required();
  exp->add_option("--out", out, "dat-s path (stdout if omitted)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed()) return run_solve(input, out, flags);
    if (synth->parsed()) return run_synth(measure_path, degree, curve_text, out);
    if (verify->parsed()) return run_verify(input, measure_path, out);
    if (check->parsed()) return run_check(input, out, flags);
    if (exp->parsed()) return run_export(input, out);
  } catch (const std::exception& e) {
    std::cout << "{\"error\":\"" << e.what() << "\"}\n";
    return kExitInputError;
  }
  return kExitInputError;
}
