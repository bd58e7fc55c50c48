#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "mindet/commands.hpp"

namespace {

std::vector<double> split_reals(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Maximum-overlap Slater determinant of a CI wave function"};
  app.require_subcommand(1);

  mindet::OptimizeArgs opt;
  std::string energies;
  auto* optimize = app.add_subcommand("optimize", "Find the determinant of maximum overlap");
  optimize->add_option("input", opt.input, "WFN v1 or CISD v1 file")->required();
  optimize->add_option("--alg", opt.algorithm, "absil | thouless | alternating | hybrid | blocked")
      ->check(CLI::IsMember({"absil", "thouless", "alternating", "hybrid", "blocked", "cisd"}));
  optimize->add_option("--tol-grad", opt.tolerances.tol_grad, "Gradient norm tolerance")->capture_default_str();
  optimize->add_option("--tol-step", opt.tolerances.tol_step, "Step norm tolerance")->capture_default_str();
  optimize->add_option("--max-iter", opt.tolerances.max_iter, "Newton iterations")->capture_default_str();
  optimize->add_option("--max-sweeps", opt.tolerances.max_sweeps, "Alternating sweeps")->capture_default_str();
  optimize->add_flag("--deterministic", opt.deterministic, "Reproducible reduction order, no timings");
  optimize->add_option("--threads", opt.threads, "Worker threads")->capture_default_str();
  optimize->add_flag("--force", opt.tolerances.force, "Run combinatorial transformations for M > 16");
  optimize->add_flag("--safeguard", opt.tolerances.safeguard, "Halve steps that lose overlap");
  optimize->add_option("--start", opt.start, "Start point: dominant or a start file")->capture_default_str();
  optimize->add_option("--freeze", opt.freeze, "1-based orbitals to freeze")->delimiter(',');
  optimize->add_option("--energies", energies, "E0,E1,EHF for the correlation-energy bound");
  optimize->add_option("-o,--output", opt.output, "Report file (default: stdout)");

  mindet::CheckOptions chk;
  auto* check = app.add_subcommand("check", "Derivative, equivalence, path and Pluecker checks");
  check->add_option("--only", chk.only, "Subset: fd, equivalence, blocked, plucker")->delimiter(',');
  check->add_option("--inject-fault", chk.inject_fault, "Test mode: sign-flip");
  check->add_option("--seed", chk.seed, "Instance seed")->capture_default_str();
  check->add_option("--threads", chk.parallel.threads, "Worker threads");
  check->add_flag("--deterministic", chk.parallel.deterministic, "Reproducible reduction order");

  mindet::ScanArgs scn;
  auto* scan = app.add_subcommand("scan", "Overlap surface of a two-electron, four-orbital input as CSV");
  scan->add_option("input", scn.input, "WFN v1 file")->required();
  scan->add_option("--points", scn.points, "Grid points per axis")->capture_default_str();

  mindet::GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "Write a model wave function");
  generate->add_option("model", gen.model, "h2 | hubbard | random | cisd")
      ->required()
      ->check(CLI::IsMember({"h2", "hubbard", "random", "cisd"}));
  generate->add_option("--c0", gen.c0, "h2: reference coefficient");
  generate->add_option("--t", gen.t, "hubbard: hopping");
  generate->add_option("--u", gen.u, "hubbard: on-site repulsion");
  generate->add_option("--norb", gen.n_orbitals, "random: spin-orbitals");
  generate->add_option("--nelec", gen.n_electrons, "random: electrons");
  generate->add_option("--terms", gen.n_terms, "random: determinants");
  generate->add_option("--seed", gen.seed, "random/cisd: seed");
  generate->add_option("--dims", gen.dims, "cisd: orbitals per irrep")->delimiter(',');
  generate->add_option("--occ", gen.occ, "cisd: doubly occupied orbitals per irrep")->delimiter(',');
  generate->add_option("--amplitude", gen.amplitude, "cisd: coefficient scale");
  generate->add_option("-o,--output", gen.output, "Output file (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : mindet::kExitParse;
  }

  if (*optimize) {
    if (!energies.empty()) {
      try {
        const auto e = split_reals(energies);
        if (e.size() != 3) throw std::invalid_argument("three values expected");
        opt.energies = std::array<double, 3>{e[0], e[1], e[2]};
      } catch (const std::exception&) {
        std::cerr << "error: --energies expects E0,E1,EHF\n";
        return mindet::kExitParse;
      }
    }
    return mindet::cmd_optimize(opt, std::cout, std::cerr);
  }
  if (*check) return mindet::cmd_check(chk, std::cout, std::cerr);
  if (*scan) return mindet::cmd_scan(scn, std::cout, std::cerr);
  return mindet::cmd_generate(gen, std::cout, std::cerr);
}
