#include "mindet/thouless.hpp"

#include <chrono>
#include <stdexcept>

namespace mindet {

namespace {

int parity(int k) { return (k % 2 == 0) ? 1 : -1; }

}  // namespace

OrbitalRotationSystem build_jac_hess(const CIWaveFunction& wf) {
  const int m = wf.n_orbitals();
  const int n = wf.n_electrons();
  const int v = m - n;
  const double scale = 1.0 / wf.norm();
  OrbitalRotationSystem sys;
  sys.f0 = scale * wf.coefficient(OccupationIndex::lowest(n));
  sys.jacobian = Matrix::Zero(v, n);
  sys.hessian = Matrix::Zero(static_cast<Eigen::Index>(v) * n, static_cast<Eigen::Index>(v) * n);

  for (int i = 0; i < n; ++i)
    for (int a = n; a < m; ++a)
      sys.jacobian(a - n, i) = parity(i + 1 + n) * scale * wf.coefficient(single_excitation(n, i, a));

  for (int i = 0; i < n; ++i)
    for (int a = n; a < m; ++a)
      for (int j = 0; j < n; ++j)
        for (int b = n; b < m; ++b) {
          const Eigen::Index row = static_cast<Eigen::Index>(i) * v + (a - n);
          const Eigen::Index col = static_cast<Eigen::Index>(j) * v + (b - n);
          double h = 0.0;
          if (i == j && a == b) {
            h = -sys.f0;
          } else if (i != j && a != b) {
            // C_ij^ab is antisymmetric in (i, j) and in (a, b); the stored
            // coefficient belongs to the ascending determinant
            const int s = ((i < j) == (a < b)) ? 1 : -1;
            const double cijab = s * scale * wf.coefficient(double_excitation(n, i, j, a, b));
            h = -parity(i + j + 2) * cijab;
          }
          sys.hessian(row, col) = h;
        }
  return sys;
}

CIWaveFunction transform_ci(const CIWaveFunction& wf, const Matrix& u_full, const TransformOptions& opts,
                            EvalCounters* counters) {
  const int m = wf.n_orbitals();
  const int n = wf.n_electrons();
  if (u_full.rows() != m || u_full.cols() != m) throw std::invalid_argument("transform_ci: U_full must be M x M");
  if (m > 16 && !opts.force)
    throw std::length_error("transform_ci: M = " + std::to_string(m) +
                            " > 16 needs C(M,n)^2 determinants; pass force to run anyway");
  const std::vector<OccupationIndex> dets = enumerate_determinants(m, n);
  std::vector<double> cin(dets.size());
  for (std::size_t k = 0; k < dets.size(); ++k) cin[k] = wf.coefficient(dets[k]);

  struct Part {
    std::vector<double> values;
    EvalCounters counters;
  };
  const std::size_t nd = dets.size();
  Part all = chunked_reduce<Part>(
      nd, opts.parallel, [&] { return Part{std::vector<double>(nd, 0.0), {}}; },
      [&](Part& part, std::size_t b, std::size_t e) {
        Matrix sub(n, n);
        for (std::size_t ii = b; ii < e; ++ii) {
          const OccupationIndex& target = dets[ii];
          double acc = 0.0;
          for (std::size_t jj = 0; jj < nd; ++jj) {
            const OccupationIndex& source = dets[jj];
            for (int r = 0; r < n; ++r)
              for (int c = 0; c < n; ++c) sub(r, c) = u_full(source[r], target[c]);
            acc += cin[jj] * determinant(sub, &part.counters);
          }
          part.values[ii] = acc;
        }
      },
      [](Part& total, const Part& part) {
        for (std::size_t k = 0; k < total.values.size(); ++k) total.values[k] += part.values[k];
        total.counters += part.counters;
      });
  if (counters) *counters += all.counters;

  std::vector<Term> terms;
  for (std::size_t k = 0; k < nd; ++k)
    if (all.values[k] != 0.0) terms.push_back(Term{dets[k], all.values[k]});
  CIWaveFunction out(m, n, std::move(terms));
  out.set_block_structure(wf.block_structure());
  return out;
}

Matrix relabel_basis(int n_orbitals, const OccupationIndex& start) {
  Matrix p = Matrix::Zero(n_orbitals, n_orbitals);
  int col = 0;
  for (int orb : start) p(orb, col++) = 1.0;
  for (int orb = 0; orb < n_orbitals; ++orb)
    if (!start.contains(orb)) p(orb, col++) = 1.0;
  return p;
}

namespace {

NewtonReport thouless_from_basis(const CIWaveFunction& wf, Matrix basis, const ToleranceOptions& opts) {
  const int m = wf.n_orbitals();
  const int n = wf.n_electrons();
  const int v = m - n;
  TransformOptions topts{opts.force, opts.assemble.parallel};

  NewtonReport report;
  report.algorithm = "thouless";
  if (m > 16) report.warnings.push_back("thouless: M > 16, full basis transformation is combinatorial");
  EvalCounters setup;
  CIWaveFunction current = transform_ci(wf, basis, topts, &setup);
  report.setup_det_evals = setup.n_det_evals;
  if (opts.keep_trace) report.trace.push_back(orthonormalize(basis.leftCols(n)));

  for (int iter = 0; iter <= opts.max_iter; ++iter) {
    const auto t0 = std::chrono::steady_clock::now();
    const OrbitalRotationSystem sys = build_jac_hess(current);
    IterationRecord rec;
    rec.phase = "thouless";
    rec.f = sys.f0;
    rec.grad_norm = sys.jacobian.norm();
    auto stamp = [&] {
      rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      report.iterations.push_back(rec);
    };
    if (rec.grad_norm < opts.tol_grad) {
      report.converged = true;
      stamp();
      break;
    }
    if (iter == opts.max_iter) {
      stamp();
      break;
    }
    Eigen::BDCSVD<Matrix> svd(sys.hessian, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector& sv = svd.singularValues();
    const double cutoff = sv.size() > 0 ? 1e-12 * sv(0) : 0.0;
    Vector rhs = -svd.matrixU().transpose() * Eigen::Map<const Vector>(sys.jacobian.data(), sys.jacobian.size());
    int rank = 0;
    for (Eigen::Index k = 0; k < sv.size(); ++k) {
      if (sv(k) > cutoff && sv(k) > 0.0) {
        rhs(k) /= sv(k);
        ++rank;
      } else {
        rhs(k) = 0.0;
      }
    }
    const Vector kvec = svd.matrixV() * rhs;
    rec.rank_deficient = rank < sv.size();
    if (rec.rank_deficient) report.singular = true;
    rec.step_norm = kvec.norm();
    if (rec.step_norm < opts.tol_step) {
      report.converged = true;
      stamp();
      break;
    }
    const Matrix k = Eigen::Map<const Matrix>(kvec.data(), v, n);
    const Matrix rot = thouless_rotation(k);
    EvalCounters cnt;
    current = transform_ci(current, rot, topts, &cnt);
    basis = basis * rot;
    rec.n_det_evals = cnt.n_det_evals;
    rec.moved = true;
    stamp();
    if (opts.keep_trace) report.trace.push_back(orthonormalize(basis.leftCols(n)));
  }
  report.final_point = orthonormalize(basis.leftCols(n));
  finalize_report(report, wf, opts.assemble);
  if (!report.converged && report.final_grad_norm < opts.tol_grad) report.converged = true;
  return report;
}

}  // namespace

NewtonReport optimize_thouless(const CIWaveFunction& wf, const OccupationIndex& start, const ToleranceOptions& opts) {
  return thouless_from_basis(wf, relabel_basis(wf.n_orbitals(), start), opts);
}

NewtonReport optimize_thouless(const CIWaveFunction& wf, const StiefelPoint& start, const ToleranceOptions& opts) {
  if (start.n_orbitals() != wf.n_orbitals() || start.n_electrons() != wf.n_electrons())
    throw std::invalid_argument("optimize_thouless: start shape mismatch");
  return thouless_from_basis(wf, complete_basis(start), opts);
}

}  // namespace mindet
