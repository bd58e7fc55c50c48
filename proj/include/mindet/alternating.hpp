#pragma once

#include "mindet/grassmann.hpp"
#include "mindet/newton.hpp"
#include "mindet/wavefunction.hpp"

namespace mindet {

struct OrbitalUpdate {
  StiefelPoint u;
  double f_before = 0.0;
  double f_after = 0.0;
  bool changed = false;
};

/// Replaces column q by the unit vector orthogonal to the other columns that
/// maximizes |f|: the normalized projected gradient, oriented so f >= 0.
/// An update that would lower |f| (round-off) is rejected.
OrbitalUpdate update_orbital(const StiefelPoint& u, const CIWaveFunction& wf, int q,
                             EvalCounters* counters = nullptr);

/// Cyclic sweeps over the columns until the per-sweep |f| gain drops below
/// opts.sweep_tol or opts.max_sweeps is reached.
NewtonReport optimize_alternating(const StiefelPoint& u0, const CIWaveFunction& wf,
                                  const ToleranceOptions& opts = {});

/// Sweeps until the gain drops below opts.hybrid_switch, then Newton.
NewtonReport optimize_hybrid(const StiefelPoint& u0, const CIWaveFunction& wf, const ToleranceOptions& opts = {});

}  // namespace mindet
