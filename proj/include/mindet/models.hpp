#pragma once

#include <cstdint>

#include "mindet/cisd.hpp"
#include "mindet/grassmann.hpp"
#include "mindet/wavefunction.hpp"

namespace mindet {

/// SplitMix64 (Steele, Lea, Flood). Test vector: seed 0 gives
/// 0xe220a8397b1dcdaf, 0x6e789e6aa1b965f4, 0x06c45d188009454f.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next();
  /// (next() >> 11) * 2^-53, in [0, 1).
  double uniform();
  /// 2 * uniform() - 1, in [-1, 1).
  double symmetric();

 private:
  std::uint64_t state_;
};

/// c0 |phi+ phi+bar> + sqrt(1 - c0^2) |phi- phi-bar> with alpha = {1, 2},
/// beta = {3, 4}: determinants {1, 3} and {2, 4}.
CIWaveFunction generate_h2_model(double c0);

/// Point on the H2 surface: alpha orbital (cos ka, sin ka, 0, 0), beta (0, 0, cos kb, sin kb).
StiefelPoint h2_point(double k_alpha, double k_beta);

struct HubbardDimerSpec {
  double t = 1.0;
  double u = 1.0;
};

struct HubbardSolution {
  CIWaveFunction wf;
  double energy = 0.0;
  double first_excited = 0.0;
  double residual = 0.0;
  /// Restricted mean-field (bonding orbital) energy.
  double mean_field_energy = 0.0;
};

/// Ground state of the half-filled two-site Hubbard model in the M_S = 0
/// sector, site spin-orbitals alpha = {1, 2}, beta = {3, 4}. The largest
/// coefficient is made positive.
HubbardSolution hubbard_dimer_fci(const HubbardDimerSpec& spec);
CIWaveFunction hubbard_dimer(const HubbardDimerSpec& spec);
/// Doubly occupied bonding orbital (1, 1)/sqrt 2.
StiefelPoint hubbard_mean_field(const HubbardDimerSpec& spec);

/// Picks n_terms of the C(M, n) lexicographic determinants by a partial
/// Fisher-Yates shuffle (j = k + next() mod (N - k)), then draws each
/// coefficient with symmetric() in selection order; zeros are redrawn. Normalized.
CIWaveFunction random_ci(int n_orbitals, int n_electrons, int n_terms, std::uint64_t seed);

/// Orthonormalized matrix of symmetric() entries (column-major draw order).
StiefelPoint random_stiefel(int n_orbitals, int n_electrons, std::uint64_t seed);

/// Restricted CISD with c0 = 1 and every single, double and mixed double drawn
/// as amplitude * symmetric().
CISDWaveFunction random_cisd(const std::vector<int>& dims, const std::vector<int>& occ, double amplitude,
                             std::uint64_t seed);

/// One random orthonormal block per irrep.
RestrictedPoint random_restricted_point(const CISDWaveFunction& wf, std::uint64_t seed);

}  // namespace mindet
