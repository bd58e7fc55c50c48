#pragma once

#include <cstdint>

#include "mindet/grassmann.hpp"
#include "mindet/parallel.hpp"
#include "mindet/wavefunction.hpp"

namespace mindet {

enum class KernelMode {
  /// F by LU, G and H from the inverse (adjugate); explicit replacement
  /// determinants only for near-singular minors.
  Adjugate,
  /// Every F, G and H entry is its own determinant (no shortcuts).
  Explicit,
};

struct EvalCounters {
  std::uint64_t n_det_evals = 0;
  EvalCounters& operator+=(const EvalCounters& o) {
    n_det_evals += o.n_det_evals;
    return *this;
  }
};

/// Flattened position of (p, q) in an M x n matrix: q * M + p.
inline Eigen::Index vec_index(int n_orbitals, int p, int q) {
  return static_cast<Eigen::Index>(q) * n_orbitals + p;
}

/// Rows of U selected by I.
Matrix minor(const Matrix& u, const OccupationIndex& index);

/// Determinant by LU with partial pivoting.
double determinant(const Matrix& a, EvalCounters* counters = nullptr);

double compute_F(const Matrix& u, const OccupationIndex& index, EvalCounters* counters = nullptr);
/// G_q^p = det((U <-q e_p)|_I), M x n.
Matrix compute_G(const Matrix& u, const OccupationIndex& index, KernelMode mode = KernelMode::Adjugate,
                 EvalCounters* counters = nullptr);
/// H_{qs}^{pr} = det((U <-q e_p <-s e_r)|_I) by explicit replacement.
double compute_H(const Matrix& u, const OccupationIndex& index, int p, int q, int r, int s,
                 EvalCounters* counters = nullptr);
/// H for q != s, -F delta_pr for q == s.
double compute_Htilde(const Matrix& u, const OccupationIndex& index, int p, int q, int r, int s,
                      EvalCounters* counters = nullptr);
/// Raw H as an (Mn) x (Mn) matrix in vec_index layout; q == s entries are zero.
Matrix compute_H_matrix(const Matrix& u, const OccupationIndex& index,
                        KernelMode mode = KernelMode::Adjugate, EvalCounters* counters = nullptr);

struct DeterminantKernels {
  double F = 0.0;
  Matrix G;
  /// H tilde, (Mn) x (Mn); empty unless requested.
  Matrix Htilde;
};

DeterminantKernels compute_kernels(const Matrix& u, const OccupationIndex& index, bool with_hessian,
                                   KernelMode mode = KernelMode::Adjugate,
                                   EvalCounters* counters = nullptr);

/// Running sums sum_I c_I F_I, sum_I c_I G_I and sum_I c_I Htilde_I.
struct KernelSums {
  double f = 0.0;
  Matrix g;
  Matrix h;
  EvalCounters counters;

  KernelSums() = default;
  KernelSums(int n_orbitals, int n_electrons, bool with_hessian);
  KernelSums& operator+=(const KernelSums& o);
};

/// Adds c * (F, G, Htilde) of one multi-index without materializing Htilde.
void accumulate_kernels(const Matrix& u, const OccupationIndex& index, double c, KernelMode mode,
                        KernelSums& sums);

/// sum_I scale * C_I (F_I, G_I, Htilde_I) over all terms of wf.
KernelSums sum_kernels(const Matrix& u, const CIWaveFunction& wf, double scale, bool with_hessian,
                       KernelMode mode = KernelMode::Adjugate, const ParallelOptions& par = {});

/// sum_I C_I det(U|_I) / |C|.
double overlap_f(const StiefelPoint& u, const CIWaveFunction& wf);
/// sum_I C_I det(U|_I) (no normalization, any M x n matrix).
double overlap_unnormalized(const Matrix& u, const CIWaveFunction& wf);
/// Euclidean gradient of overlap_f with respect to U.
Matrix overlap_gradient(const StiefelPoint& u, const CIWaveFunction& wf);

/// Relations among kernels of the reference I0 = {0..n-1} and its excitations.
/// Occupied i, j in [0, n), virtual a, b in [n, M), 0-based.
/// F of the ascending single {0..n-1} \ {i} u {a} from G_{I0}.
double relation_F_single(const Matrix& u, const Matrix& g0, int i, int a);
/// F of the ascending double from G of the single I_j^b, printed sign
/// (-1)^{i+n+(b>a)}; exact for i < j.
double relation_F_double(const Matrix& u, const Matrix& g_jb, int i, int j, int a, int b);
/// Same with the sign fixed for either order of i and j.
double relation_F_double_any(const Matrix& u, const Matrix& g_jb, int i, int j, int a, int b);
/// G of the ascending single I_i^a from G_{I0} and raw H_{I0} (vec_index layout).
Matrix relation_G_single(const Matrix& u, const Matrix& g0, const Matrix& h0, int i, int a);

/// The single or double excitation of the lowest-n reference, ascending.
OccupationIndex single_excitation(int n_electrons, int i, int a);
OccupationIndex double_excitation(int n_electrons, int i, int j, int a, int b);

}  // namespace mindet
