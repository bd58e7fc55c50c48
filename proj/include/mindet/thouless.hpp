#pragma once

#include "mindet/grassmann.hpp"
#include "mindet/kernels.hpp"
#include "mindet/newton.hpp"
#include "mindet/wavefunction.hpp"

namespace mindet {

/// Jacobian and Hessian of f(exp(K) Phi_0) at K = 0, Phi_0 = {0..n-1}.
/// K is flattened column-major: (a - n, i) -> i * (M - n) + (a - n).
struct OrbitalRotationSystem {
  Matrix jacobian;  ///< (M - n) x n
  Matrix hessian;   ///< (n (M - n)) x (n (M - n))
  double f0 = 0.0;
};

/// Reads C_0, singles and doubles of `wf` relative to the lowest-n reference,
/// with coefficients divided by |C|.
OrbitalRotationSystem build_jac_hess(const CIWaveFunction& wf);

struct TransformOptions {
  bool force = false;
  ParallelOptions parallel;
};

/// C'_I = sum_J C_J det(U_full[J, I]) over all C(M, n)^2 pairs (I, J).
/// Refuses M > 16 unless opts.force.
CIWaveFunction transform_ci(const CIWaveFunction& wf, const Matrix& u_full, const TransformOptions& opts = {},
                            EvalCounters* counters = nullptr);

/// Permutation basis whose first n columns are the orbitals of `start`
/// (ascending), followed by the remaining orbitals in ascending order.
Matrix relabel_basis(int n_orbitals, const OccupationIndex& start);

/// Newton in the rotation parameters, re-expanding the wave function every step.
NewtonReport optimize_thouless(const CIWaveFunction& wf, const OccupationIndex& start,
                               const ToleranceOptions& opts = {});
/// Same, starting from span(U0): the first basis is complete_basis(U0).
NewtonReport optimize_thouless(const CIWaveFunction& wf, const StiefelPoint& start,
                               const ToleranceOptions& opts = {});

}  // namespace mindet
