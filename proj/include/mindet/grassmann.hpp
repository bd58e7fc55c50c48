#pragma once

#include <Eigen/Dense>
#include <vector>

#include "mindet/wavefunction.hpp"

namespace mindet {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Column-orthonormal M x n matrix representing one Slater determinant.
class StiefelPoint {
 public:
  StiefelPoint() = default;
  /// Throws std::invalid_argument unless U^T U = 1 within `tol`.
  explicit StiefelPoint(Matrix u, double tol = 1e-10);

  const Matrix& matrix() const noexcept { return u_; }
  int n_orbitals() const noexcept { return static_cast<int>(u_.rows()); }
  int n_electrons() const noexcept { return static_cast<int>(u_.cols()); }

  /// (1; 0): the first n spin-orbitals.
  static StiefelPoint reference(int n_orbitals, int n_electrons);
  /// Unit vectors e_p for p in `occupied`.
  static StiefelPoint from_occupation(int n_orbitals, const OccupationIndex& occupied);

 private:
  Matrix u_;
};

/// Q from a thin QR of `a`, with diag(R) made positive.
StiefelPoint orthonormalize(const Matrix& a);

/// I - U U^T.
Matrix orthonormal_complement_projector(const StiefelPoint& u);
/// M x M orthogonal matrix whose first n columns are U.
Matrix complete_basis(const StiefelPoint& u);
/// M x (M - n) orthonormal basis of the complement of span(U).
Matrix orthonormal_complement_basis(const StiefelPoint& u);

struct ThinSvd {
  Matrix u;
  Vector sigma;
  Matrix v;
};
/// Thin SVD with descending singular values; the first non-negligible entry of
/// every left singular vector is made positive.
ThinSvd thin_svd(const Matrix& a);

/// span(U V cos S + W sin S) for eta = W S V^T, re-orthonormalized.
StiefelPoint geodesic_update(const StiefelPoint& u, const Matrix& eta);

/// 2-norm of the principal angles between span(A) and span(B).
double subspace_distance(const StiefelPoint& a, const StiefelPoint& b);
/// Principal angles, ascending.
Vector principal_angles(const StiefelPoint& a, const StiefelPoint& b);

/// exp of [[0, -K^T], [K, 0]] for K of shape (M - n) x n.
Matrix thouless_rotation(const Matrix& k);
/// First n columns of Q exp([[0, -K^T], [K, 0]]) with Q = complete_basis(U0).
StiefelPoint thouless_to_stiefel(const Matrix& k, const StiefelPoint& u0);

/// <Phi_A|Phi_B> = det(A^T B).
double slater_overlap(const StiefelPoint& a, const StiefelPoint& b);

/// One orthonormal block per (spin, irrep): alpha irreps first, then beta.
class BlockedStiefelPoint {
 public:
  BlockedStiefelPoint(BlockStructure structure, std::vector<Matrix> blocks);

  const BlockStructure& structure() const noexcept { return structure_; }
  const std::vector<Matrix>& blocks() const noexcept { return blocks_; }
  const Matrix& block(int b) const { return blocks_[static_cast<std::size_t>(b)]; }
  int occupation(int b) const { return static_cast<int>(block(b).cols()); }
  std::vector<int> occupations() const;
  int n_electrons() const;
  /// Offset of block b's electrons in the global column order.
  int electron_offset(int b) const;

  /// Global block-diagonal M x n matrix (columns grouped by block).
  StiefelPoint assemble() const;
  /// Cuts a block-diagonal global matrix into blocks with the given occupations.
  static BlockedStiefelPoint from_global(const Matrix& u, const BlockStructure& structure,
                                         const std::vector<int>& occupations);
  /// First occupations[b] orbitals of every block.
  static BlockedStiefelPoint reference(const BlockStructure& structure,
                                       const std::vector<int>& occupations);

 private:
  BlockStructure structure_;
  std::vector<Matrix> blocks_;
};

}  // namespace mindet
