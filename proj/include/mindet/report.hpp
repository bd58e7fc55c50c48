#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "mindet/newton.hpp"

namespace mindet {

struct ReportContext {
  std::string input;
  /// Omit wall-clock fields so that reports are reproducible.
  bool deterministic = false;
  /// Overlap of the start determinant with the wave function.
  std::optional<double> start_overlap;
  /// E0, E1, E_HF.
  std::optional<std::array<double, 3>> energies;
  /// 1-based frozen orbitals.
  std::vector<int> frozen;
};

/// JSON report: iterations, final point, distances and critical-point character.
std::string format_report(const NewtonReport& report, const ReportContext& ctx);

}  // namespace mindet
