#include "mindet/kernels.hpp"

#include <cmath>
#include <stdexcept>

namespace mindet {

namespace {

int parity(int k) { return (k % 2 == 0) ? 1 : -1; }

bool near_singular(const Matrix& a, double det) {
  double bound = 1.0;
  for (Eigen::Index k = 0; k < a.cols(); ++k) bound *= a.col(k).norm();
  return !(std::abs(det) > 1e-10 * bound);
}

std::vector<int> zero_rows(const Matrix& a) {
  std::vector<int> out;
  for (Eigen::Index r = 0; r < a.rows(); ++r)
    if ((a.row(r).array() == 0.0).all()) out.push_back(static_cast<int>(r));
  return out;
}

// det of `a` with column q replaced by the k-th unit vector
double replaced_det(Matrix& a, int q, int k, EvalCounters* counters) {
  const Vector saved = a.col(q);
  a.col(q).setZero();
  if (k >= 0) a(k, q) = 1.0;
  const double d = determinant(a, counters);
  a.col(q) = saved;
  return d;
}

double replaced_det2(Matrix& a, int q, int k, int s, int l, EvalCounters* counters) {
  const Vector sq = a.col(q);
  const Vector ss = a.col(s);
  a.col(q).setZero();
  if (k >= 0) a(k, q) = 1.0;
  a.col(s).setZero();
  if (l >= 0) a(l, s) = 1.0;
  const double d = determinant(a, counters);
  a.col(q) = sq;
  a.col(s) = ss;
  return d;
}

void check_shape(const Matrix& u, const OccupationIndex& index) {
  if (index.size() != u.cols()) throw std::invalid_argument("multi-index length differs from n");
  if (index.size() > 0 && index[index.size() - 1] >= u.rows())
    throw std::invalid_argument("multi-index exceeds M");
}

}  // namespace

Matrix minor(const Matrix& u, const OccupationIndex& index) {
  check_shape(u, index);
  Matrix a(index.size(), u.cols());
  for (int k = 0; k < index.size(); ++k) a.row(k) = u.row(index[k]);
  return a;
}

double determinant(const Matrix& a, EvalCounters* counters) {
  if (counters) ++counters->n_det_evals;
  if (a.rows() == 0) return 1.0;
  return Eigen::PartialPivLU<Matrix>(a).determinant();
}

double compute_F(const Matrix& u, const OccupationIndex& index, EvalCounters* counters) {
  return determinant(minor(u, index), counters);
}

Matrix compute_G(const Matrix& u, const OccupationIndex& index, KernelMode mode, EvalCounters* counters) {
  KernelSums sums(static_cast<int>(u.rows()), static_cast<int>(u.cols()), false);
  accumulate_kernels(u, index, 1.0, mode, sums);
  if (counters) *counters += sums.counters;
  return sums.g;
}

double compute_H(const Matrix& u, const OccupationIndex& index, int p, int q, int r, int s,
                 EvalCounters* counters) {
  Matrix a = minor(u, index);
  if (q == s) return replaced_det(a, s, index.position(r), counters);
  return replaced_det2(a, q, index.position(p), s, index.position(r), counters);
}

double compute_Htilde(const Matrix& u, const OccupationIndex& index, int p, int q, int r, int s,
                      EvalCounters* counters) {
  if (q == s) return p == r ? -compute_F(u, index, counters) : 0.0;
  return compute_H(u, index, p, q, r, s, counters);
}

Matrix compute_H_matrix(const Matrix& u, const OccupationIndex& index, KernelMode mode,
                        EvalCounters* counters) {
  const int m = static_cast<int>(u.rows());
  const int n = static_cast<int>(u.cols());
  KernelSums sums(m, n, true);
  accumulate_kernels(u, index, 1.0, mode, sums);
  if (counters) *counters += sums.counters;
  // remove the -F delta_pr diagonal blocks
  for (int q = 0; q < n; ++q) sums.h.block(q * m, q * m, m, m).setZero();
  return sums.h;
}

DeterminantKernels compute_kernels(const Matrix& u, const OccupationIndex& index, bool with_hessian,
                                   KernelMode mode, EvalCounters* counters) {
  KernelSums sums(static_cast<int>(u.rows()), static_cast<int>(u.cols()), with_hessian);
  accumulate_kernels(u, index, 1.0, mode, sums);
  if (counters) *counters += sums.counters;
  return DeterminantKernels{sums.f, std::move(sums.g), std::move(sums.h)};
}

KernelSums::KernelSums(int n_orbitals, int n_electrons, bool with_hessian)
    : g(Matrix::Zero(n_orbitals, n_electrons)) {
  if (with_hessian) {
    const Eigen::Index d = static_cast<Eigen::Index>(n_orbitals) * n_electrons;
    h = Matrix::Zero(d, d);
  }
}

KernelSums& KernelSums::operator+=(const KernelSums& o) {
  f += o.f;
  g += o.g;
  if (o.h.size() > 0) h += o.h;
  counters += o.counters;
  return *this;
}

void accumulate_kernels(const Matrix& u, const OccupationIndex& index, double c, KernelMode mode,
                        KernelSums& sums) {
  const int m = static_cast<int>(u.rows());
  const int n = static_cast<int>(u.cols());
  const bool hess = sums.h.size() > 0;
  Matrix a = minor(u, index);
  EvalCounters* cnt = &sums.counters;

  if (mode == KernelMode::Explicit) {
    const double f = determinant(a, cnt);
    sums.f += c * f;
    for (int q = 0; q < n; ++q)
      for (int p = 0; p < m; ++p) sums.g(p, q) += c * replaced_det(a, q, index.position(p), cnt);
    if (!hess) return;
    for (int s = 0; s < n; ++s)
      for (int r = 0; r < m; ++r)
        for (int q = 0; q < n; ++q)
          for (int p = 0; p < m; ++p) {
            double h;
            if (q == s) {
              replaced_det(a, q, index.position(r), cnt);  // counted, replaced by -F delta
              h = p == r ? -f : 0.0;
            } else {
              h = replaced_det2(a, q, index.position(p), s, index.position(r), cnt);
            }
            sums.h(vec_index(m, p, q), vec_index(m, r, s)) += c * h;
          }
    return;
  }

  Eigen::PartialPivLU<Matrix> lu;
  double f = 1.0;
  if (n > 0) {
    lu.compute(a);
    f = lu.determinant();
  }
  ++cnt->n_det_evals;
  sums.f += c * f;

  if (hess && f != 0.0)
    for (int q = 0; q < n; ++q)
      for (int p = 0; p < m; ++p) sums.h(vec_index(m, p, q), vec_index(m, p, q)) -= c * f;

  if (!near_singular(a, f)) {
    const Matrix inv = lu.inverse();
    for (int k = 0; k < n; ++k)
      for (int q = 0; q < n; ++q) sums.g(index[k], q) += c * f * inv(q, k);
    if (!hess) return;
    for (int s = 0; s < n; ++s)
      for (int l = 0; l < n; ++l)
        for (int q = 0; q < n; ++q) {
          if (q == s) continue;
          for (int k = 0; k < n; ++k) {
            if (k == l) continue;
            const double h = f * (inv(q, k) * inv(s, l) - inv(q, l) * inv(s, k));
            sums.h(vec_index(m, index[k], q), vec_index(m, index[l], s)) += c * h;
          }
        }
    return;
  }

  // near-singular minor: explicit replacement determinants; a replacement must
  // cover every zero row or the determinant vanishes
  const std::vector<int> zr = zero_rows(a);
  const auto covers = [&](int k, int l) {
    for (int z : zr)
      if (z != k && z != l) return false;
    return true;
  };
  if (zr.size() <= 1)
    for (int k = 0; k < n; ++k) {
      if (!covers(k, -1)) continue;
      for (int q = 0; q < n; ++q) sums.g(index[k], q) += c * replaced_det(a, q, k, cnt);
    }
  if (!hess || zr.size() > 2) return;
  for (int s = 0; s < n; ++s)
    for (int l = 0; l < n; ++l)
      for (int q = 0; q < n; ++q) {
        if (q == s) continue;
        for (int k = 0; k < n; ++k) {
          if (k == l || !covers(k, l)) continue;
          const double h = replaced_det2(a, q, k, s, l, cnt);
          sums.h(vec_index(m, index[k], q), vec_index(m, index[l], s)) += c * h;
        }
      }
}

KernelSums sum_kernels(const Matrix& u, const CIWaveFunction& wf, double scale, bool with_hessian,
                       KernelMode mode, const ParallelOptions& par) {
  const int m = static_cast<int>(u.rows());
  const int n = static_cast<int>(u.cols());
  if (wf.n_orbitals() != m || wf.n_electrons() != n)
    throw std::invalid_argument("wave function and Stiefel point dimensions differ");
  const auto terms = wf.terms();
  return chunked_reduce<KernelSums>(
      terms.size(), par, [&] { return KernelSums(m, n, with_hessian); },
      [&](KernelSums& acc, std::size_t b, std::size_t e) {
        for (std::size_t t = b; t < e; ++t)
          accumulate_kernels(u, terms[t].index, scale * terms[t].coefficient, mode, acc);
      },
      [](KernelSums& total, const KernelSums& part) { total += part; });
}

double overlap_unnormalized(const Matrix& u, const CIWaveFunction& wf) {
  double f = 0.0;
  for (const auto& t : wf.terms()) f += t.coefficient * compute_F(u, t.index);
  return f;
}

double overlap_f(const StiefelPoint& u, const CIWaveFunction& wf) {
  if (wf.n_orbitals() != u.n_orbitals() || wf.n_electrons() != u.n_electrons())
    throw std::invalid_argument("wave function and Stiefel point dimensions differ");
  return overlap_unnormalized(u.matrix(), wf) / wf.norm();
}

Matrix overlap_gradient(const StiefelPoint& u, const CIWaveFunction& wf) {
  return sum_kernels(u.matrix(), wf, 1.0 / wf.norm(), false).g;
}

OccupationIndex single_excitation(int n_electrons, int i, int a) {
  std::vector<int> v;
  for (int k = 0; k < n_electrons; ++k)
    if (k != i) v.push_back(k);
  v.push_back(a);
  return reorder_sign(std::move(v)).first;
}

OccupationIndex double_excitation(int n_electrons, int i, int j, int a, int b) {
  std::vector<int> v;
  for (int k = 0; k < n_electrons; ++k)
    if (k != i && k != j) v.push_back(k);
  v.push_back(a);
  v.push_back(b);
  return reorder_sign(std::move(v)).first;
}

double relation_F_single(const Matrix& u, const Matrix& g0, int i, int a) {
  const int n = static_cast<int>(u.cols());
  double s = 0.0;
  for (int q = 0; q < n; ++q) s += u(a, q) * g0(i, q);
  return parity(i + 1 + n) * s;
}

double relation_F_double(const Matrix& u, const Matrix& g_jb, int i, int j, int a, int b) {
  (void)j;
  const int n = static_cast<int>(u.cols());
  double s = 0.0;
  for (int q = 0; q < n; ++q) s += u(a, q) * g_jb(i, q);
  return parity(i + 1 + n + (b > a ? 1 : 0)) * s;
}

double relation_F_double_any(const Matrix& u, const Matrix& g_jb, int i, int j, int a, int b) {
  const int n = static_cast<int>(u.cols());
  const int pos = i < j ? i : i - 1;
  double s = 0.0;
  for (int q = 0; q < n; ++q) s += u(a, q) * g_jb(i, q);
  return parity(n - pos + (a > b ? 1 : 0)) * s;
}

Matrix relation_G_single(const Matrix& u, const Matrix& g0, const Matrix& h0, int i, int a) {
  const int m = static_cast<int>(u.rows());
  const int n = static_cast<int>(u.cols());
  const int sign = parity(i + 1 + n);
  Matrix g = Matrix::Zero(m, n);
  for (int q = 0; q < n; ++q)
    for (int p = 0; p < m; ++p) {
      if (p == a) {
        g(p, q) = sign * g0(i, q);
        continue;
      }
      double s = 0.0;
      for (int qq = 0; qq < n; ++qq)
        if (qq != q) s += u(a, qq) * h0(vec_index(m, p, q), vec_index(m, i, qq));
      g(p, q) = sign * s;
    }
  return g;
}

}  // namespace mindet
