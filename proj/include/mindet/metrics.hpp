#pragma once

#include <optional>

#include "mindet/grassmann.hpp"
#include "mindet/wavefunction.hpp"

namespace mindet {

struct DistanceTriple {
  double d_fs = 0.0;
  double d_acfc = 0.0;
  double d_brlcm = 0.0;
};

/// Fubini-Study, ACFC and BRLCM distances for a real overlap. Values with
/// |s| <= 1 + 1e-12 are clamped; larger ones throw std::domain_error.
DistanceTriple distances(double overlap);

/// C12 C34 - C13 C24 + C14 C23 for two electrons in four spin-orbitals.
double plucker_residual_2e(double c12, double c34, double c13, double c24, double c14, double c23);
/// C24 sqrt(1 - (C24^2 + C14^2 + C23^2)) - C14 C23. Assumes the hemisphere C13 >= 0;
/// throws std::domain_error when the square root argument is negative.
double plucker_residual_ms0(double c24, double c14, double c23);
/// |residual| < 1e-10 * sum of the squared coefficients.
bool plucker_decomposable(double c12, double c34, double c13, double c24, double c14, double c23);
/// Residual of an M = 4, n = 2 wave function (coefficients read from wf).
double plucker_residual(const CIWaveFunction& wf);

struct HFDecomposition {
  double lhs = 0.0;        ///< <HF|Psi>
  double hf_mind = 0.0;    ///< <HF|minD>
  double mind_psi = 0.0;   ///< <minD|Psi>
  double product = 0.0;    ///< <HF|minD><minD|Psi>
  double remainder = 0.0;  ///< <HF|Q_minD|Psi>
  double residual = 0.0;   ///< lhs - (product + remainder)
  /// <HF|Psi> / <minD|Psi>, compared with <minD|HF>.
  double ratio = 0.0;
};

/// Overlaps of Psi (normalized) with HF and minD. The remainder is computed
/// independently from the projected CI vector of Psi.
HFDecomposition hf_decomposition(const StiefelPoint& hf, const StiefelPoint& mind, const CIWaveFunction& wf);

/// CI coefficients of a single determinant span(U) over all C(M, n) indices.
std::vector<double> determinant_ci_vector(const StiefelPoint& u);

struct EnergyBound {
  double bound = 0.0;    ///< (E_HF - E_0) / (E_1 - E_0)
  double d_brlcm = 0.0;  ///< 1 - overlap^2
};
EnergyBound energy_bound(double e0, double e1, double ehf, double overlap);

}  // namespace mindet
