#include "mindet/newton.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

namespace mindet {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

Matrix horizontal_constraints(const Matrix& u) {
  const int m = static_cast<int>(u.rows());
  const int n = static_cast<int>(u.cols());
  Matrix c = Matrix::Zero(static_cast<Eigen::Index>(n) * n, static_cast<Eigen::Index>(m) * n);
  for (int q = 0; q < n; ++q)
    for (int k = 0; k < n; ++k)
      for (int p = 0; p < m; ++p) c(k + n * q, vec_index(m, p, q)) = u(p, k);
  return c;
}

NewtonSystem assemble_system(const StiefelPoint& u, const CIWaveFunction& wf, const AssembleOptions& opts,
                             EvalCounters* counters) {
  const int m = u.n_orbitals();
  const int n = u.n_electrons();
  const double scale = opts.normalize ? 1.0 / wf.norm() : 1.0;
  KernelSums sums = sum_kernels(u.matrix(), wf, scale, true, opts.mode, opts.parallel);
  if (counters) *counters += sums.counters;

  const Matrix proj = orthonormal_complement_projector(u);
  NewtonSystem sys;
  sys.u = u.matrix();
  sys.f = sums.f;
  sys.jacobian = proj * sums.g;
  sys.hessian.resize(sums.h.rows(), sums.h.cols());
  for (int q = 0; q < n; ++q) sys.hessian.middleRows(q * m, m) = proj * sums.h.middleRows(q * m, m);
  sys.constraints = horizontal_constraints(u.matrix());
  return sys;
}

HorizontalSolution solve_horizontal(const NewtonSystem& system, double rel_cutoff) {
  const auto m = system.jacobian.rows();
  const auto n = system.jacobian.cols();
  const auto d = m * n;
  Matrix a(system.hessian.rows() + system.constraints.rows(), d);
  a << system.hessian, system.constraints;
  Vector b = Vector::Zero(a.rows());
  b.head(d) = -Eigen::Map<const Vector>(system.jacobian.data(), d);

  HorizontalSolution out;
  out.n_unknowns = static_cast<int>(d);
  Eigen::BDCSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& sv = svd.singularValues();
  const double cutoff = sv.size() > 0 ? rel_cutoff * sv(0) : 0.0;
  Vector coeff = svd.matrixU().transpose() * b;
  for (Eigen::Index k = 0; k < sv.size(); ++k) {
    if (sv(k) > cutoff && sv(k) > 0.0) {
      coeff(k) /= sv(k);
      ++out.rank;
    } else {
      coeff(k) = 0.0;
    }
  }
  const Vector x = svd.matrixV() * coeff;
  out.eta = Eigen::Map<const Matrix>(x.data(), m, n);
  if (system.u.rows() == m && system.u.cols() == n) out.eta -= system.u * (system.u.transpose() * out.eta);
  out.rank_deficient = out.rank < out.n_unknowns;
  return out;
}

std::string to_string(CriticalPoint c) {
  switch (c) {
    case CriticalPoint::Maximum: return "maximum";
    case CriticalPoint::Minimum: return "minimum";
    case CriticalPoint::Saddle: return "saddle";
    case CriticalPoint::Degenerate: return "degenerate";
  }
  return "unknown";
}

Classification classify(const NewtonSystem& system, double rel_tol) {
  const int m = static_cast<int>(system.u.rows());
  const int n = static_cast<int>(system.u.cols());
  Classification out;
  if (m == n) {
    out.kind = CriticalPoint::Maximum;
    return out;
  }
  const Matrix perp = orthonormal_complement_basis(orthonormalize(system.u));
  const int v = m - n;
  Matrix z = Matrix::Zero(static_cast<Eigen::Index>(m) * n, static_cast<Eigen::Index>(v) * n);
  for (int q = 0; q < n; ++q) z.block(q * m, q * v, m, v) = perp;
  Matrix r = z.transpose() * system.hessian * z;
  r = 0.5 * (r + r.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Matrix> es(r, Eigen::EigenvaluesOnly);
  const double sign = system.f < 0 ? -1.0 : 1.0;
  Vector ev = sign * es.eigenvalues();
  if (sign < 0) ev.reverseInPlace();
  out.eigenvalues = ev;

  const double scale = std::max({std::abs(system.f), ev.cwiseAbs().maxCoeff(), 1e-300});
  bool any_zero = false, any_pos = false, any_neg = false;
  for (Eigen::Index k = 0; k < ev.size(); ++k) {
    if (std::abs(ev(k)) <= rel_tol * scale)
      any_zero = true;
    else if (ev(k) > 0)
      any_pos = true;
    else
      any_neg = true;
  }
  if (any_pos && any_neg)
    out.kind = CriticalPoint::Saddle;
  else if (any_zero)
    out.kind = CriticalPoint::Degenerate;
  else if (any_neg)
    out.kind = CriticalPoint::Maximum;
  else
    out.kind = CriticalPoint::Minimum;
  return out;
}

int NewtonReport::steps() const {
  int k = 0;
  for (const auto& r : iterations) k += r.moved ? 1 : 0;
  return k;
}

void finalize_report(NewtonReport& report, const CIWaveFunction& wf, const AssembleOptions& opts) {
  const NewtonSystem sys = assemble_system(report.final_point, wf, opts);
  report.final_f = sys.f;
  report.final_grad_norm = sys.jacobian.norm();
  const Classification cls = classify(sys);
  report.character = cls.kind;
  report.hessian_spectrum = cls.eigenvalues;
  if (cls.kind == CriticalPoint::Degenerate) report.singular = true;
}

NewtonReport optimize(const StiefelPoint& u0, const CIWaveFunction& wf, const ToleranceOptions& opts) {
  NewtonReport report;
  report.algorithm = "absil";
  StiefelPoint u = u0;
  if (opts.keep_trace) report.trace.push_back(u);

  for (int iter = 0; iter <= opts.max_iter; ++iter) {
    const auto t0 = std::chrono::steady_clock::now();
    EvalCounters cnt;
    const NewtonSystem sys = assemble_system(u, wf, opts.assemble, &cnt);
    IterationRecord rec;
    rec.phase = "newton";
    rec.f = sys.f;
    rec.grad_norm = sys.jacobian.norm();
    if (rec.grad_norm < opts.tol_grad) {
      report.converged = true;
      rec.n_det_evals = cnt.n_det_evals;
      rec.wall_time = seconds_since(t0);
      report.iterations.push_back(rec);
      break;
    }
    if (iter == opts.max_iter) {
      rec.n_det_evals = cnt.n_det_evals;
      rec.wall_time = seconds_since(t0);
      report.iterations.push_back(rec);
      break;
    }
    const HorizontalSolution sol = solve_horizontal(sys);
    rec.rank_deficient = sol.rank_deficient;
    if (sol.rank_deficient) report.singular = true;
    Matrix eta = sol.eta;
    rec.step_norm = eta.norm();
    if (rec.step_norm < opts.tol_step) {
      if (sol.rank_deficient)
        report.warnings.push_back("newton: step vanishes on a singular system; try --alg hybrid");
      else
        report.converged = true;
      rec.n_det_evals = cnt.n_det_evals;
      rec.wall_time = seconds_since(t0);
      report.iterations.push_back(rec);
      break;
    }
    StiefelPoint next = geodesic_update(u, eta);
    if (opts.safeguard) {
      for (int h = 0; h < 30; ++h) {
        const double fn = overlap_f(next, wf);
        if (std::abs(fn) >= std::abs(sys.f) - 0.5) break;
        eta *= 0.5;
        next = geodesic_update(u, eta);
        rec.step_norm = eta.norm();
      }
    }
    u = next;
    rec.moved = true;
    rec.n_det_evals = cnt.n_det_evals;
    rec.wall_time = seconds_since(t0);
    report.iterations.push_back(rec);
    if (opts.keep_trace) report.trace.push_back(u);
  }
  report.final_point = u;
  finalize_report(report, wf, opts.assemble);
  if (!report.converged && report.final_grad_norm < opts.tol_grad) report.converged = true;
  return report;
}

}  // namespace mindet
