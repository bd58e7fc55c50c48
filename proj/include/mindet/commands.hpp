#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mindet/checks.hpp"
#include "mindet/newton.hpp"

namespace mindet {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitParse = 2,
  kExitNotConverged = 3,
};

struct OptimizeArgs {
  std::string input;
  /// absil, thouless, alternating, hybrid, blocked (block-diagonal directions)
  std::string algorithm = "absil";
  ToleranceOptions tolerances;
  bool deterministic = false;
  int threads = 1;
  /// "dominant" or a start file.
  std::string start = "dominant";
  /// 1-based orbitals to freeze.
  std::vector<int> freeze;
  std::optional<std::array<double, 3>> energies;
  /// Report path; empty writes to the output stream.
  std::string output;
};

int cmd_optimize(const OptimizeArgs& args, std::ostream& out, std::ostream& err);
int cmd_check(const CheckOptions& args, std::ostream& out, std::ostream& err);

struct ScanArgs {
  std::string input;
  int points = 101;
};
/// CSV "k_alpha,k_beta,f" over [-pi/2, pi/2]^2 for an M = 4, n = 2 input.
int cmd_scan(const ScanArgs& args, std::ostream& out, std::ostream& err);

struct GenerateArgs {
  /// h2, hubbard, random, cisd
  std::string model;
  double c0 = 0.9;
  double t = 1.0;
  double u = 1.0;
  int n_orbitals = 6;
  int n_electrons = 3;
  int n_terms = 10;
  std::uint64_t seed = 42;
  std::vector<int> dims{3, 3};
  std::vector<int> occ{1, 1};
  double amplitude = 0.1;
  std::string output;
};
int cmd_generate(const GenerateArgs& args, std::ostream& out, std::ostream& err);

/// Start file: "M n" followed by M rows of n reals; orthonormalized on read.
StiefelPoint read_start_file(const std::string& path);

}  // namespace mindet
