#include "mindet/commands.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

#include "mindet/alternating.hpp"
#include "mindet/blocked.hpp"
#include "mindet/cisd.hpp"
#include "mindet/models.hpp"
#include "mindet/report.hpp"
#include "mindet/thouless.hpp"
#include "text_scanner.hpp"

namespace mindet {

StiefelPoint read_start_file(const std::string& path) {
  const std::string text = detail::slurp(path);
  detail::LineScanner scan(text);
  auto head = scan.next_record();
  if (!head || head->tokens.size() != 2) throw ParseError(head ? head->line : 1, "start file: expected 'M n'");
  const int m = detail::to_int(head->tokens[0], head->line);
  const int n = detail::to_int(head->tokens[1], head->line);
  if (m <= 0 || n <= 0 || n > m) throw ParseError(head->line, "start file: invalid shape");
  Matrix u(m, n);
  for (int r = 0; r < m; ++r) {
    auto rec = scan.next_record();
    if (!rec || static_cast<int>(rec->tokens.size()) != n)
      throw ParseError(rec ? rec->line : scan.line(), "start file: expected " + std::to_string(n) + " values");
    for (int c = 0; c < n; ++c) u(r, c) = detail::to_real(rec->tokens[static_cast<std::size_t>(c)], rec->line);
  }
  if (scan.next_record()) throw ParseError(scan.line(), "start file: trailing data");
  if (Eigen::FullPivLU<Matrix>(u).rank() < n) throw ParseError(head->line, "start file: columns are dependent");
  return orthonormalize(u);
}

namespace {

bool is_cisd_file(const std::string& path) {
  std::ifstream in(path);
  std::string word;
  in >> word;
  return word == "CISD";
}

int finish(const NewtonReport& report, const ReportContext& ctx, const OptimizeArgs& args, std::ostream& out,
           std::ostream& err) {
  const std::string text = format_report(report, ctx);
  if (args.output.empty()) {
    out << text;
  } else {
    std::ofstream f(args.output);
    if (!f) {
      err << "error: cannot write " << args.output << '\n';
      return kExitFailure;
    }
    f << text;
  }
  for (const auto& w : report.warnings) err << "warning: " << w << '\n';
  if (!report.converged) {
    err << "not converged after " << report.iterations.size() << " iterations\n";
    return kExitNotConverged;
  }
  return kExitOk;
}

int optimize_cisd_input(const OptimizeArgs& args, ToleranceOptions tol, ReportContext ctx, std::ostream& out,
                        std::ostream& err) {
  const CISDWaveFunction cwf = read_cisd_file(args.input);
  if (!args.freeze.empty()) throw std::invalid_argument("--freeze is not supported for CISD input");
  if (args.start != "dominant") throw std::invalid_argument("CISD input starts from its reference determinant");
  const RestrictedPoint u0 = restricted_reference(cwf);
  if (args.algorithm == "absil" || args.algorithm == "cisd") {
    NewtonReport rep = optimize_cisd(u0, cwf, tol);
    ctx.start_overlap = cwf.c0() / cisd_norm(cwf);
    return finish(rep, ctx, args, out, err);
  }
  // other algorithms work on the explicit expansion
  const CIWaveFunction wf = expand_cisd(cwf, 0.5);
  const StiefelPoint s0 = to_blocked(u0, cwf).assemble();
  ctx.start_overlap = overlap_f(s0, wf);
  NewtonReport rep;
  if (args.algorithm == "thouless") rep = optimize_thouless(wf, wf.dominant().index, tol);
  else if (args.algorithm == "alternating") rep = optimize_alternating(s0, wf, tol);
  else if (args.algorithm == "hybrid") rep = optimize_hybrid(s0, wf, tol);
  else if (args.algorithm == "blocked") rep = optimize_blocked(to_blocked(u0, cwf), wf, tol);
  else throw std::invalid_argument("unknown algorithm '" + args.algorithm + "'");
  return finish(rep, ctx, args, out, err);
}

}  // namespace

int cmd_optimize(const OptimizeArgs& args, std::ostream& out, std::ostream& err) {
  try {
    ToleranceOptions tol = args.tolerances;
    tol.assemble.parallel.threads = std::max(1, args.threads);
    tol.assemble.parallel.deterministic = args.deterministic;
    ReportContext ctx;
    ctx.input = args.input;
    ctx.deterministic = args.deterministic;
    ctx.energies = args.energies;
    ctx.frozen = args.freeze;
    if (is_cisd_file(args.input)) return optimize_cisd_input(args, tol, ctx, out, err);

    std::vector<std::string> warnings;
    const CIWaveFunction full = read_wavefunction_file(args.input, &warnings);
    for (const auto& w : warnings) err << "warning: " << w << '\n';

    std::optional<StiefelPoint> start;
    if (args.start != "dominant") start = read_start_file(args.start);
    else start = StiefelPoint::from_occupation(full.n_orbitals(), full.dominant().index);
    if (start->n_orbitals() != full.n_orbitals() || start->n_electrons() != full.n_electrons())
      throw std::invalid_argument("start point shape does not match the wave function");
    ctx.start_overlap = overlap_f(*start, full);

    std::vector<int> frozen = full.frozen();
    for (int f : args.freeze) frozen.push_back(f - 1);
    std::optional<FrozenProblem> fp;
    CIWaveFunction wf = full;
    StiefelPoint u0 = *start;
    if (!frozen.empty()) {
      fp = freeze_core(full, frozen, start);
      wf = fp->wf;
      u0 = *fp->u;
      ctx.frozen.clear();
      for (int f : fp->frozen) ctx.frozen.push_back(f + 1);
    }

    NewtonReport rep;
    const std::string& alg = args.algorithm;
    if (alg == "absil") {
      rep = optimize(u0, wf, tol);
    } else if (alg == "thouless") {
      if (args.start != "dominant")
        throw std::invalid_argument("thouless starts from a determinant of the basis (use --start dominant)");
      rep = optimize_thouless(wf, wf.dominant().index, tol);
    } else if (alg == "alternating") {
      rep = optimize_alternating(u0, wf, tol);
    } else if (alg == "hybrid") {
      rep = optimize_hybrid(u0, wf, tol);
    } else if (alg == "blocked") {
      const BlockStructure bs = wf.effective_blocks();
      const BlockedStiefelPoint bu =
          args.start == "dominant"
              ? BlockedStiefelPoint::from_global(u0.matrix(), bs, dominant_occupations(wf, bs))
              : throw std::invalid_argument("blocked starts from the dominant determinant");
      rep = optimize_blocked(bu, wf, tol);
    } else {
      throw std::invalid_argument("unknown algorithm '" + alg + "'");
    }

    if (fp) {
      rep.final_point = thaw(*fp, rep.final_point, full.n_orbitals());
      for (auto& t : rep.trace) t = thaw(*fp, t, full.n_orbitals());
    }
    return finish(rep, ctx, args, out, err);
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << '\n';
    return kExitParse;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

int cmd_check(const CheckOptions& args, std::ostream& out, std::ostream& err) {
  try {
    bool ok = true;
    for (const auto& r : run_checks(args)) {
      char line[256];
      std::snprintf(line, sizeof line, "%-12s %-4s max deviation %.3e (tol %.1e)", r.name.c_str(),
                    r.pass ? "PASS" : "FAIL", r.value, r.tolerance);
      out << line << "  " << r.detail << '\n';
      ok = ok && r.pass;
    }
    return ok ? kExitOk : kExitFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

int cmd_scan(const ScanArgs& args, std::ostream& out, std::ostream& err) {
  try {
    const CIWaveFunction wf = read_wavefunction_file(args.input);
    if (wf.n_orbitals() != 4 || wf.n_electrons() != 2) throw std::invalid_argument("scan needs an M = 4, n = 2 input");
    if (args.points < 2) throw std::invalid_argument("scan needs at least 2 points per axis");
    const double lo = -std::numbers::pi / 2, hi = std::numbers::pi / 2;
    out << "k_alpha,k_beta,f\n";
    char line[128];
    for (int i = 0; i < args.points; ++i)
      for (int j = 0; j < args.points; ++j) {
        const double ka = lo + (hi - lo) * i / (args.points - 1);
        const double kb = lo + (hi - lo) * j / (args.points - 1);
        std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g\n", ka, kb, overlap_f(h2_point(ka, kb), wf));
        out << line;
      }
    return kExitOk;
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << '\n';
    return kExitParse;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

int cmd_generate(const GenerateArgs& args, std::ostream& out, std::ostream& err) {
  try {
    std::string text;
    if (args.model == "h2") {
      text = serialize_wavefunction(generate_h2_model(args.c0));
    } else if (args.model == "hubbard") {
      const HubbardSolution sol = hubbard_dimer_fci({args.t, args.u});
      text = "# E0 " + format_real(sol.energy) + " E1 " + format_real(sol.first_excited) + " EHF " +
             format_real(sol.mean_field_energy) + "\n" + serialize_wavefunction(sol.wf);
    } else if (args.model == "random") {
      text = serialize_wavefunction(random_ci(args.n_orbitals, args.n_electrons, args.n_terms, args.seed));
    } else if (args.model == "cisd") {
      text = serialize_cisd(random_cisd(args.dims, args.occ, args.amplitude, args.seed));
    } else {
      throw std::invalid_argument("unknown model '" + args.model + "'");
    }
    if (args.output.empty()) {
      out << text;
    } else {
      std::ofstream f(args.output);
      if (!f) throw std::runtime_error("cannot write " + args.output);
      f << text;
    }
    return kExitOk;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace mindet
