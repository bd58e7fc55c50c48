#pragma once

#include <string>
#include <vector>

#include "mindet/grassmann.hpp"
#include "mindet/kernels.hpp"
#include "mindet/wavefunction.hpp"

namespace mindet {

/// Projected Newton system at U. Hessian and constraint columns use vec_index.
struct NewtonSystem {
  Matrix hessian;      ///< (Mn) x (Mn)
  Matrix jacobian;     ///< M x n
  Matrix constraints;  ///< n^2 x (Mn), rows of U^T eta = 0
  Matrix u;            ///< the point the system was assembled at
  double f = 0.0;
};

struct AssembleOptions {
  KernelMode mode = KernelMode::Adjugate;
  ParallelOptions parallel;
  /// Divide coefficients by |C| (the overlap of a normalized state).
  bool normalize = true;
};

NewtonSystem assemble_system(const StiefelPoint& u, const CIWaveFunction& wf,
                             const AssembleOptions& opts = {}, EvalCounters* counters = nullptr);

/// Rows of U^T eta = 0 for the given U.
Matrix horizontal_constraints(const Matrix& u);

struct HorizontalSolution {
  Matrix eta;
  int rank = 0;
  int n_unknowns = 0;
  bool rank_deficient = false;
};

/// Minimum-norm least-squares solution of [H; C] vec(eta) = [-J; 0]; singular
/// values below `rel_cutoff * sigma_max` are dropped.
HorizontalSolution solve_horizontal(const NewtonSystem& system, double rel_cutoff = 1e-12);

enum class CriticalPoint { Maximum, Minimum, Saddle, Degenerate };
std::string to_string(CriticalPoint c);

struct Classification {
  CriticalPoint kind = CriticalPoint::Degenerate;
  /// Spectrum of the Hessian restricted to the horizontal space, ascending,
  /// multiplied by sign(f) so that a maximum of |f| has all entries negative.
  Vector eigenvalues;
};

Classification classify(const NewtonSystem& system, double rel_tol = 1e-8);

struct ToleranceOptions {
  double tol_grad = 1e-8;
  double tol_step = 1e-10;
  int max_iter = 20;
  int max_sweeps = 500;
  /// Sweep gain below which the alternating optimizer stops.
  double sweep_tol = 1e-12;
  /// Sweep gain at which the hybrid optimizer hands over to Newton.
  double hybrid_switch = 1e-4;
  /// Halve a Newton step while it lowers |f| by more than 0.5.
  bool safeguard = false;
  bool force = false;
  /// Keep every iterate in NewtonReport::trace.
  bool keep_trace = false;
  AssembleOptions assemble;
};

struct IterationRecord {
  double f = 0.0;
  double grad_norm = 0.0;
  double step_norm = 0.0;
  std::uint64_t n_det_evals = 0;
  double wall_time = 0.0;
  bool rank_deficient = false;
  /// A step was taken from this iterate.
  bool moved = false;
  std::string phase;
};

struct NewtonReport {
  std::string algorithm;
  std::vector<IterationRecord> iterations;
  bool converged = false;
  /// A rank-deficient stacked system or a degenerate horizontal Hessian was met.
  bool singular = false;
  StiefelPoint final_point;
  double final_f = 0.0;
  double final_grad_norm = 0.0;
  CriticalPoint character = CriticalPoint::Degenerate;
  Vector hessian_spectrum;
  std::uint64_t setup_det_evals = 0;
  std::vector<StiefelPoint> trace;
  std::vector<std::string> warnings;

  int steps() const;
};

/// Riemannian Newton on the Grassmannian with geodesic steps.
NewtonReport optimize(const StiefelPoint& u0, const CIWaveFunction& wf, const ToleranceOptions& opts = {});

/// Gradient norm |J|_F and classification at a point (used by other optimizers).
void finalize_report(NewtonReport& report, const CIWaveFunction& wf, const AssembleOptions& opts);

}  // namespace mindet
