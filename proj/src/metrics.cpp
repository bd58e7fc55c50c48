#include "mindet/metrics.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "mindet/kernels.hpp"

namespace mindet {

DistanceTriple distances(double overlap) {
  double s = std::abs(overlap);
  if (!(s <= 1.0 + 1e-12)) throw std::domain_error("overlap magnitude exceeds 1");
  s = std::min(s, 1.0);
  return DistanceTriple{std::acos(s), std::sqrt(1.0 - s), 1.0 - s * s};
}

double plucker_residual_2e(double c12, double c34, double c13, double c24, double c14, double c23) {
  return c12 * c34 - c13 * c24 + c14 * c23;
}

double plucker_residual_ms0(double c24, double c14, double c23) {
  const double arg = 1.0 - (c24 * c24 + c14 * c14 + c23 * c23);
  if (arg < 0.0) throw std::domain_error("C24^2 + C14^2 + C23^2 exceeds 1");
  return c24 * std::sqrt(arg) - c14 * c23;
}

bool plucker_decomposable(double c12, double c34, double c13, double c24, double c14, double c23) {
  const double scale = c12 * c12 + c34 * c34 + c13 * c13 + c24 * c24 + c14 * c14 + c23 * c23;
  return std::abs(plucker_residual_2e(c12, c34, c13, c24, c14, c23)) < 1e-10 * scale;
}

double plucker_residual(const CIWaveFunction& wf) {
  if (wf.n_orbitals() != 4 || wf.n_electrons() != 2)
    throw std::invalid_argument("plucker_residual: needs M = 4, n = 2");
  auto c = [&](int p, int q) { return wf.coefficient(OccupationIndex{p - 1, q - 1}); };
  return plucker_residual_2e(c(1, 2), c(3, 4), c(1, 3), c(2, 4), c(1, 4), c(2, 3));
}

std::vector<double> determinant_ci_vector(const StiefelPoint& u) {
  std::vector<double> out;
  for (const auto& idx : enumerate_determinants(u.n_orbitals(), u.n_electrons()))
    out.push_back(compute_F(u.matrix(), idx));
  return out;
}

HFDecomposition hf_decomposition(const StiefelPoint& hf, const StiefelPoint& mind, const CIWaveFunction& wf) {
  if (hf.n_orbitals() != wf.n_orbitals() || mind.n_orbitals() != wf.n_orbitals() ||
      hf.n_electrons() != wf.n_electrons() || mind.n_electrons() != wf.n_electrons())
    throw std::invalid_argument("hf_decomposition: dimension mismatch");
  HFDecomposition d;
  d.lhs = overlap_f(hf, wf);
  d.hf_mind = slater_overlap(hf, mind);
  d.mind_psi = overlap_f(mind, wf);
  d.product = d.hf_mind * d.mind_psi;

  // Q_minD |Psi> = |Psi> - |minD><minD|Psi> in the full determinant basis
  const auto dets = enumerate_determinants(wf.n_orbitals(), wf.n_electrons());
  const std::vector<double> vm = determinant_ci_vector(mind);
  const std::vector<double> vh = determinant_ci_vector(hf);
  const double scale = 1.0 / wf.norm();
  double rem = 0.0;
  for (std::size_t k = 0; k < dets.size(); ++k) {
    const double q = scale * wf.coefficient(dets[k]) - vm[k] * d.mind_psi;
    rem += vh[k] * q;
  }
  d.remainder = rem;
  d.residual = d.lhs - (d.product + d.remainder);
  d.ratio = d.mind_psi != 0.0 ? d.lhs / d.mind_psi : std::numeric_limits<double>::quiet_NaN();
  return d;
}

EnergyBound energy_bound(double e0, double e1, double ehf, double overlap) {
  if (e1 == e0) throw std::invalid_argument("energy_bound: E1 equals E0");
  return EnergyBound{(ehf - e0) / (e1 - e0), distances(overlap).d_brlcm};
}

}  // namespace mindet
