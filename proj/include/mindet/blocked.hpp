#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mindet/grassmann.hpp"
#include "mindet/kernels.hpp"
#include "mindet/newton.hpp"
#include "mindet/wavefunction.hpp"

namespace mindet {

/// Newton system restricted to the block-diagonal directions of a blocked point.
/// jacobian[b] is M_b x n_b; hessian[b][c] is (M_b n_b) x (M_c n_c), vec_index layout
/// inside each block.
struct BlockedSystem {
  double f = 0.0;
  std::vector<Matrix> jacobian;
  std::vector<std::vector<Matrix>> hessian;
};

/// Multi-index restricted to block b, shifted to block-local numbering; empty
/// optional when the block occupation differs from `occupation`.
std::optional<OccupationIndex> block_index(const OccupationIndex& index, const BlockStructure& structure,
                                           int block, int occupation);

/// sum over occupation-compatible I of C_I prod_b F_{I_b}, divided by |C| when `normalize`.
double blocked_f(const BlockedStiefelPoint& u, const CIWaveFunction& wf, bool normalize = true);

BlockedSystem blocked_assemble(const BlockedStiefelPoint& u, const CIWaveFunction& wf, bool normalize = true,
                               EvalCounters* counters = nullptr);

/// Block-diagonal sub-blocks of a general system assembled at u.assemble().
BlockedSystem restrict_to_blocks(const NewtonSystem& general, const BlockedStiefelPoint& u);

/// Largest elementwise difference of Jacobians and of Hessians applied to
/// horizontal directions (Hessian times (1 x Pi) on the right).
double blocked_system_deviation(const BlockedSystem& a, const BlockedSystem& b, const BlockedStiefelPoint& u);

/// (1_n x Pi) for one block: the projector onto horizontal vec(eta).
Matrix horizontal_projector(const Matrix& block);

/// Newton iterations over the block-diagonal directions only.
NewtonReport optimize_blocked(const BlockedStiefelPoint& u0, const CIWaveFunction& wf,
                              const ToleranceOptions& opts = {});

/// Stacked Hessian, Jacobian and constraints over all blocks; offsets[b] is the
/// first unknown of block b.
struct StackedBlockSystem {
  Matrix hessian;
  Vector jacobian;
  Matrix constraints;
  std::vector<Eigen::Index> offsets;
};

StackedBlockSystem stack_blocks(const BlockedSystem& sys, const std::vector<Matrix>& blocks);

/// Classification of the stacked horizontal Hessian, as classify().
Classification classify_blocks(const BlockedSystem& sys, const std::vector<Matrix>& blocks, double rel_tol = 1e-8);

using BlockAssembler = std::function<BlockedSystem(const std::vector<Matrix>&, EvalCounters*)>;

/// Newton iterations on a product of Grassmannians, one geodesic step per block.
NewtonReport newton_on_blocks(std::vector<Matrix> blocks, const BlockAssembler& assemble,
                              const std::function<Matrix(const std::vector<Matrix>&)>& to_point,
                              const ToleranceOptions& opts, const std::string& algorithm);

/// Default occupations of a blocked point: the blocks of the dominant determinant.
std::vector<int> dominant_occupations(const CIWaveFunction& wf, const BlockStructure& structure);

struct FrozenProblem {
  CIWaveFunction wf;
  /// Reduced representative (M - k) x (n - k); empty when no point was given.
  std::optional<StiefelPoint> u;
  std::vector<int> frozen;
  /// Rows of the original problem kept in the reduced one.
  std::vector<int> kept;
};

/// Removes orbitals occupied in every term. Throws std::invalid_argument when a
/// frozen orbital is missing from some term or (if U is given) not in span(U).
FrozenProblem freeze_core(const CIWaveFunction& wf, const std::vector<int>& frozen,
                          const std::optional<StiefelPoint>& u = std::nullopt);

/// Re-inserts frozen orbitals: returns [e_f..., reduced U] on the original rows.
StiefelPoint thaw(const FrozenProblem& problem, const StiefelPoint& reduced, int n_orbitals);

}  // namespace mindet
