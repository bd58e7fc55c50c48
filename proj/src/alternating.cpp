#include "mindet/alternating.hpp"

#include <chrono>
#include <cmath>

namespace mindet {

OrbitalUpdate update_orbital(const StiefelPoint& u, const CIWaveFunction& wf, int q, EvalCounters* counters) {
  const Matrix& um = u.matrix();
  const KernelSums k = sum_kernels(um, wf, 1.0 / wf.norm(), false);
  if (counters) *counters += k.counters;
  OrbitalUpdate out{u, k.f, k.f, false};
  const Vector g = k.g.col(q);
  Matrix others(um.rows(), um.cols() - 1);
  for (Eigen::Index c = 0, k2 = 0; c < um.cols(); ++c)
    if (c != q) others.col(k2++) = um.col(c);
  const Vector pg = g - others * (others.transpose() * g);
  const double norm = pg.norm();
  if (norm < 1e-14) return out;
  // f is linear in column q, so the new value is g . pg / |pg| = |pg|
  const double f_new = norm;
  if (f_new < std::abs(k.f)) return out;
  Matrix next = um;
  next.col(q) = pg / norm;
  out.u = StiefelPoint(std::move(next), 1e-8);
  out.f_after = f_new;
  out.changed = true;
  return out;
}

namespace {

NewtonReport sweeps(const StiefelPoint& u0, const CIWaveFunction& wf, const ToleranceOptions& opts, double stop_gain,
                    const char* algorithm) {
  NewtonReport report;
  report.algorithm = algorithm;
  StiefelPoint u = u0;
  if (opts.keep_trace) report.trace.push_back(u);
  double f = std::abs(overlap_f(u, wf));
  for (int sweep = 0; sweep < opts.max_sweeps; ++sweep) {
    const auto t0 = std::chrono::steady_clock::now();
    EvalCounters cnt;
    const StiefelPoint before = u;
    for (int q = 0; q < u.n_electrons(); ++q) u = update_orbital(u, wf, q, &cnt).u;
    const double f_new = std::abs(overlap_f(u, wf));
    IterationRecord rec;
    rec.phase = "alternating";
    rec.f = f_new;
    rec.step_norm = subspace_distance(before, u);
    rec.n_det_evals = cnt.n_det_evals;
    rec.moved = rec.step_norm > 0.0;
    const double gain = f_new - f;
    f = f_new;
    rec.grad_norm = assemble_system(u, wf, opts.assemble).jacobian.norm();
    rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    report.iterations.push_back(rec);
    if (opts.keep_trace) report.trace.push_back(u);
    if (gain < stop_gain) {
      report.converged = true;
      break;
    }
  }
  report.final_point = u;
  return report;
}

}  // namespace

NewtonReport optimize_alternating(const StiefelPoint& u0, const CIWaveFunction& wf, const ToleranceOptions& opts) {
  NewtonReport report = sweeps(u0, wf, opts, opts.sweep_tol, "alternating");
  finalize_report(report, wf, opts.assemble);
  return report;
}

NewtonReport optimize_hybrid(const StiefelPoint& u0, const CIWaveFunction& wf, const ToleranceOptions& opts) {
  NewtonReport first = sweeps(u0, wf, opts, opts.hybrid_switch, "hybrid");
  NewtonReport second = optimize(first.final_point, wf, opts);
  NewtonReport report = second;
  report.algorithm = "hybrid";
  report.iterations = first.iterations;
  report.iterations.insert(report.iterations.end(), second.iterations.begin(), second.iterations.end());
  if (opts.keep_trace) {
    report.trace = first.trace;
    report.trace.insert(report.trace.end(), second.trace.begin() + (second.trace.empty() ? 0 : 1), second.trace.end());
  }
  return report;
}

}  // namespace mindet
