#include "mindet/grassmann.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unsupported/Eigen/MatrixFunctions>

namespace mindet {

StiefelPoint::StiefelPoint(Matrix u, double tol) : u_(std::move(u)) {
  if (u_.cols() > u_.rows() || u_.cols() == 0)
    throw std::invalid_argument("Stiefel point needs 0 < n <= M");
  const double dev = (u_.transpose() * u_ - Matrix::Identity(u_.cols(), u_.cols())).cwiseAbs().maxCoeff();
  if (!(dev <= tol)) throw std::invalid_argument("matrix is not column-orthonormal");
}

StiefelPoint StiefelPoint::reference(int n_orbitals, int n_electrons) {
  return StiefelPoint(Matrix::Identity(n_orbitals, n_electrons));
}

StiefelPoint StiefelPoint::from_occupation(int n_orbitals, const OccupationIndex& occupied) {
  Matrix u = Matrix::Zero(n_orbitals, occupied.size());
  for (int k = 0; k < occupied.size(); ++k) u(occupied[k], k) = 1.0;
  return StiefelPoint(std::move(u));
}

StiefelPoint orthonormalize(const Matrix& a) {
  Eigen::HouseholderQR<Matrix> qr(a);
  Matrix q = qr.householderQ() * Matrix::Identity(a.rows(), a.cols());
  const Matrix r = qr.matrixQR().topRows(a.cols()).triangularView<Eigen::Upper>();
  for (Eigen::Index k = 0; k < a.cols(); ++k) {
    if (r(k, k) == 0.0) throw std::domain_error("orthonormalize: rank-deficient matrix");
    if (r(k, k) < 0) q.col(k) *= -1.0;
  }
  return StiefelPoint(std::move(q));
}

Matrix orthonormal_complement_projector(const StiefelPoint& u) {
  const Matrix& m = u.matrix();
  return Matrix::Identity(m.rows(), m.rows()) - m * m.transpose();
}

Matrix complete_basis(const StiefelPoint& u) {
  const Matrix& m = u.matrix();
  const auto rows = m.rows(), cols = m.cols();
  Eigen::HouseholderQR<Matrix> qr(m);
  Matrix q = qr.householderQ();
  // columns n.. of the full Q span the complement of span(U)
  q.leftCols(cols) = m;
  for (Eigen::Index k = cols; k < rows; ++k) {
    // one Gram-Schmidt pass against U keeps the basis orthonormal to working precision
    q.col(k) -= m * (m.transpose() * q.col(k));
    q.col(k).normalize();
  }
  return q;
}

Matrix orthonormal_complement_basis(const StiefelPoint& u) {
  return complete_basis(u).rightCols(u.n_orbitals() - u.n_electrons());
}

ThinSvd thin_svd(const Matrix& a) {
  Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  ThinSvd out{svd.matrixU(), svd.singularValues(), svd.matrixV()};
  for (Eigen::Index k = 0; k < out.u.cols(); ++k) {
    const double scale = out.u.col(k).cwiseAbs().maxCoeff();
    for (Eigen::Index p = 0; p < out.u.rows(); ++p) {
      if (std::abs(out.u(p, k)) > 1e-12 * scale) {
        if (out.u(p, k) < 0) {
          out.u.col(k) *= -1.0;
          out.v.col(k) *= -1.0;
        }
        break;
      }
    }
  }
  return out;
}

StiefelPoint geodesic_update(const StiefelPoint& u, const Matrix& eta) {
  if (eta.rows() != u.matrix().rows() || eta.cols() != u.matrix().cols())
    throw std::invalid_argument("geodesic_update: shape mismatch");
  const ThinSvd svd = thin_svd(eta);
  if (!svd.sigma.allFinite()) throw std::runtime_error("geodesic_update: SVD breakdown");
  const Vector c = svd.sigma.array().cos();
  const Vector s = svd.sigma.array().sin();
  const Matrix moved = u.matrix() * svd.v * c.asDiagonal() + svd.u * s.asDiagonal();
  return orthonormalize(moved);
}

Vector principal_angles(const StiefelPoint& a, const StiefelPoint& b) {
  const Matrix& ma = a.matrix();
  const Matrix& mb = b.matrix();
  if (ma.rows() != mb.rows() || ma.cols() != mb.cols())
    throw std::invalid_argument("subspace_distance: shape mismatch");
  const Vector cosv = Eigen::JacobiSVD<Matrix>(ma.transpose() * mb).singularValues();
  const Matrix resid = mb - ma * (ma.transpose() * mb);
  const Vector sinv = Eigen::JacobiSVD<Matrix>(resid).singularValues();
  const Eigen::Index n = cosv.size();
  Vector angles(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double c = std::min(1.0, cosv(k));
    // small angles are resolved by their sines, large ones by their cosines
    if (c * c >= 0.5)
      angles(k) = std::asin(std::min(1.0, sinv(n - 1 - k)));
    else
      angles(k) = std::acos(std::max(0.0, c));
  }
  return angles;
}

double subspace_distance(const StiefelPoint& a, const StiefelPoint& b) {
  return principal_angles(a, b).norm();
}

Matrix thouless_rotation(const Matrix& k) {
  const auto nv = k.rows(), ne = k.cols();
  const auto m = nv + ne;
  Matrix gen = Matrix::Zero(m, m);
  gen.block(ne, 0, nv, ne) = k;
  gen.block(0, ne, ne, nv) = -k.transpose();
  return gen.exp();
}

StiefelPoint thouless_to_stiefel(const Matrix& k, const StiefelPoint& u0) {
  if (k.rows() != u0.n_orbitals() - u0.n_electrons() || k.cols() != u0.n_electrons())
    throw std::invalid_argument("thouless_to_stiefel: K must be (M - n) x n");
  const Matrix q = complete_basis(u0);
  const Matrix rot = thouless_rotation(k);
  return orthonormalize(q * rot.leftCols(u0.n_electrons()));
}

double slater_overlap(const StiefelPoint& a, const StiefelPoint& b) {
  return (a.matrix().transpose() * b.matrix()).determinant();
}

BlockedStiefelPoint::BlockedStiefelPoint(BlockStructure structure, std::vector<Matrix> blocks)
    : structure_(std::move(structure)), blocks_(std::move(blocks)) {
  if (static_cast<int>(blocks_.size()) != structure_.n_blocks())
    throw std::invalid_argument("one matrix per (spin, irrep) block required");
  for (int b = 0; b < structure_.n_blocks(); ++b) {
    const Matrix& m = blocks_[static_cast<std::size_t>(b)];
    if (m.rows() != structure_.dim(b) || m.cols() > m.rows())
      throw std::invalid_argument("block " + std::to_string(b) + " has the wrong shape");
    if (m.cols() > 0) {
      const double dev =
          (m.transpose() * m - Matrix::Identity(m.cols(), m.cols())).cwiseAbs().maxCoeff();
      if (!(dev <= 1e-10)) throw std::invalid_argument("block is not column-orthonormal");
    }
  }
}

std::vector<int> BlockedStiefelPoint::occupations() const {
  std::vector<int> out;
  for (int b = 0; b < structure_.n_blocks(); ++b) out.push_back(occupation(b));
  return out;
}

int BlockedStiefelPoint::n_electrons() const {
  int n = 0;
  for (int b = 0; b < structure_.n_blocks(); ++b) n += occupation(b);
  return n;
}

int BlockedStiefelPoint::electron_offset(int b) const {
  int off = 0;
  for (int c = 0; c < b; ++c) off += occupation(c);
  return off;
}

StiefelPoint BlockedStiefelPoint::assemble() const {
  Matrix u = Matrix::Zero(structure_.total(), n_electrons());
  for (int b = 0; b < structure_.n_blocks(); ++b)
    u.block(structure_.offset(b), electron_offset(b), structure_.dim(b), occupation(b)) = block(b);
  return StiefelPoint(std::move(u));
}

BlockedStiefelPoint BlockedStiefelPoint::from_global(const Matrix& u, const BlockStructure& structure,
                                                     const std::vector<int>& occupations) {
  if (static_cast<int>(occupations.size()) != structure.n_blocks())
    throw std::invalid_argument("one occupation per block required");
  std::vector<Matrix> blocks;
  int col = 0;
  for (int b = 0; b < structure.n_blocks(); ++b) {
    const int nb = occupations[static_cast<std::size_t>(b)];
    blocks.push_back(u.block(structure.offset(b), col, structure.dim(b), nb));
    col += nb;
  }
  if (col != u.cols()) throw std::invalid_argument("occupations do not sum to n");
  return BlockedStiefelPoint(structure, std::move(blocks));
}

BlockedStiefelPoint BlockedStiefelPoint::reference(const BlockStructure& structure,
                                                   const std::vector<int>& occupations) {
  std::vector<Matrix> blocks;
  for (int b = 0; b < structure.n_blocks(); ++b)
    blocks.push_back(Matrix::Identity(structure.dim(b), occupations.at(static_cast<std::size_t>(b))));
  return BlockedStiefelPoint(structure, std::move(blocks));
}

}  // namespace mindet
