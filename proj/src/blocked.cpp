#include "mindet/blocked.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

namespace mindet {

std::optional<OccupationIndex> block_index(const OccupationIndex& index, const BlockStructure& structure,
                                           int block, int occupation) {
  const int lo = structure.offset(block);
  const int hi = lo + structure.dim(block);
  std::vector<int> local;
  for (int p : index)
    if (p >= lo && p < hi) local.push_back(p - lo);
  if (static_cast<int>(local.size()) != occupation) return std::nullopt;
  return OccupationIndex(std::move(local));
}

namespace {

struct BlockTerm {
  double c;
  std::vector<OccupationIndex> parts;
};

std::vector<BlockTerm> split_terms(const BlockedStiefelPoint& u, const CIWaveFunction& wf, bool normalize) {
  const BlockStructure& bs = u.structure();
  if (bs.total() != wf.n_orbitals() || u.n_electrons() != wf.n_electrons())
    throw std::invalid_argument("blocked point and wave function dimensions differ");
  const double scale = normalize ? 1.0 / wf.norm() : 1.0;
  std::vector<BlockTerm> out;
  for (const auto& t : wf.terms()) {
    BlockTerm bt{scale * t.coefficient, {}};
    bool ok = true;
    for (int b = 0; b < bs.n_blocks() && ok; ++b) {
      auto local = block_index(t.index, bs, b, u.occupation(b));
      if (!local) ok = false;
      else bt.parts.push_back(std::move(*local));
    }
    if (ok) out.push_back(std::move(bt));
  }
  return out;
}

Matrix flat(const Matrix& g) { return Eigen::Map<const Vector>(g.data(), g.size()); }

}  // namespace

Matrix horizontal_projector(const Matrix& block) {
  const auto m = block.rows(), n = block.cols();
  const Matrix proj = Matrix::Identity(m, m) - block * block.transpose();
  Matrix out = Matrix::Zero(m * n, m * n);
  for (Eigen::Index q = 0; q < n; ++q) out.block(q * m, q * m, m, m) = proj;
  return out;
}

double blocked_f(const BlockedStiefelPoint& u, const CIWaveFunction& wf, bool normalize) {
  double f = 0.0;
  for (const auto& t : split_terms(u, wf, normalize)) {
    double prod = t.c;
    for (int b = 0; b < u.structure().n_blocks(); ++b) prod *= compute_F(u.block(b), t.parts[static_cast<std::size_t>(b)]);
    f += prod;
  }
  return f;
}

BlockedSystem blocked_assemble(const BlockedStiefelPoint& u, const CIWaveFunction& wf, bool normalize,
                               EvalCounters* counters) {
  const int nb = u.structure().n_blocks();
  const auto terms = split_terms(u, wf, normalize);
  BlockedSystem sys;
  sys.jacobian.resize(static_cast<std::size_t>(nb));
  sys.hessian.assign(static_cast<std::size_t>(nb), std::vector<Matrix>(static_cast<std::size_t>(nb)));
  std::vector<Eigen::Index> dims(static_cast<std::size_t>(nb));
  for (int b = 0; b < nb; ++b) {
    const Matrix& ub = u.block(b);
    dims[static_cast<std::size_t>(b)] = ub.rows() * ub.cols();
    sys.jacobian[static_cast<std::size_t>(b)] = Matrix::Zero(ub.rows(), ub.cols());
  }
  for (int b = 0; b < nb; ++b)
    for (int c = 0; c < nb; ++c)
      sys.hessian[static_cast<std::size_t>(b)][static_cast<std::size_t>(c)] =
          Matrix::Zero(dims[static_cast<std::size_t>(b)], dims[static_cast<std::size_t>(c)]);

  EvalCounters cnt;
  std::vector<KernelSums> k(static_cast<std::size_t>(nb));
  std::vector<double> fb(static_cast<std::size_t>(nb));
  for (const auto& t : terms) {
    for (int b = 0; b < nb; ++b) {
      const Matrix& ub = u.block(b);
      auto& kb = k[static_cast<std::size_t>(b)];
      kb = KernelSums(static_cast<int>(ub.rows()), static_cast<int>(ub.cols()), true);
      accumulate_kernels(ub, t.parts[static_cast<std::size_t>(b)], 1.0, KernelMode::Adjugate, kb);
      fb[static_cast<std::size_t>(b)] = kb.f;
      cnt += kb.counters;
    }
    double full = t.c;
    for (double x : fb) full *= x;
    sys.f += full;
    for (int b = 0; b < nb; ++b) {
      const auto ub = static_cast<std::size_t>(b);
      if (u.occupation(b) == 0) continue;
      double others = t.c;
      for (int c = 0; c < nb; ++c)
        if (c != b) others *= fb[static_cast<std::size_t>(c)];
      sys.jacobian[ub] += others * k[ub].g;
      sys.hessian[ub][ub] += others * k[ub].h;
      for (int c = 0; c < nb; ++c) {
        const auto uc = static_cast<std::size_t>(c);
        if (c == b || u.occupation(c) == 0) continue;
        double rest = t.c;
        for (int d = 0; d < nb; ++d)
          if (d != b && d != c) rest *= fb[static_cast<std::size_t>(d)];
        sys.hessian[ub][uc] += rest * flat(k[ub].g) * flat(k[uc].g).transpose();
      }
    }
  }
  if (counters) *counters += cnt;

  std::vector<Matrix> hp(static_cast<std::size_t>(nb));
  for (int b = 0; b < nb; ++b) hp[static_cast<std::size_t>(b)] = horizontal_projector(u.block(b));
  for (int b = 0; b < nb; ++b) {
    const auto ub = static_cast<std::size_t>(b);
    const Matrix& blk = u.block(b);
    sys.jacobian[ub] = (Matrix::Identity(blk.rows(), blk.rows()) - blk * blk.transpose()) * sys.jacobian[ub];
    for (int c = 0; c < nb; ++c) {
      const auto uc = static_cast<std::size_t>(c);
      if (c == b)
        sys.hessian[ub][uc] = hp[ub] * sys.hessian[ub][uc];
      else
        sys.hessian[ub][uc] = hp[ub] * sys.hessian[ub][uc] * hp[uc];
    }
  }
  return sys;
}

BlockedSystem restrict_to_blocks(const NewtonSystem& general, const BlockedStiefelPoint& u) {
  const BlockStructure& bs = u.structure();
  const int nb = bs.n_blocks();
  const int m = bs.total();
  BlockedSystem out;
  out.f = general.f;
  out.jacobian.resize(static_cast<std::size_t>(nb));
  out.hessian.assign(static_cast<std::size_t>(nb), std::vector<Matrix>(static_cast<std::size_t>(nb)));
  for (int b = 0; b < nb; ++b) {
    const int mb = bs.dim(b), ob = bs.offset(b), nbe = u.occupation(b), eb = u.electron_offset(b);
    out.jacobian[static_cast<std::size_t>(b)] = general.jacobian.block(ob, eb, mb, nbe);
    for (int c = 0; c < nb; ++c) {
      const int mc = bs.dim(c), oc = bs.offset(c), nce = u.occupation(c), ec = u.electron_offset(c);
      Matrix h(static_cast<Eigen::Index>(mb) * nbe, static_cast<Eigen::Index>(mc) * nce);
      for (int q = 0; q < nbe; ++q)
        for (int p = 0; p < mb; ++p)
          for (int s = 0; s < nce; ++s)
            for (int r = 0; r < mc; ++r)
              h(vec_index(mb, p, q), vec_index(mc, r, s)) =
                  general.hessian(vec_index(m, ob + p, eb + q), vec_index(m, oc + r, ec + s));
      out.hessian[static_cast<std::size_t>(b)][static_cast<std::size_t>(c)] = std::move(h);
    }
  }
  return out;
}

double blocked_system_deviation(const BlockedSystem& a, const BlockedSystem& b, const BlockedStiefelPoint& u) {
  const int nb = u.structure().n_blocks();
  double dev = std::abs(a.f - b.f);
  for (int x = 0; x < nb; ++x) {
    const auto ux = static_cast<std::size_t>(x);
    if (a.jacobian[ux].size() > 0)
      dev = std::max(dev, (a.jacobian[ux] - b.jacobian[ux]).cwiseAbs().maxCoeff());
    for (int y = 0; y < nb; ++y) {
      const auto uy = static_cast<std::size_t>(y);
      if (a.hessian[ux][uy].size() == 0) continue;
      const Matrix hp = horizontal_projector(u.block(y));
      dev = std::max(dev, ((a.hessian[ux][uy] - b.hessian[ux][uy]) * hp).cwiseAbs().maxCoeff());
    }
  }
  return dev;
}

std::vector<int> dominant_occupations(const CIWaveFunction& wf, const BlockStructure& structure) {
  const OccupationIndex& dom = wf.dominant().index;
  std::vector<int> occ(static_cast<std::size_t>(structure.n_blocks()), 0);
  for (int p : dom) ++occ[static_cast<std::size_t>(structure.block_of(p))];
  return occ;
}

namespace {

Matrix stiefel_perp_lift(const Matrix& blk) {
  Matrix z = Matrix::Zero(blk.size(), blk.cols() * (blk.rows() - blk.cols()));
  if (blk.cols() > 0 && blk.rows() > blk.cols()) {
    const Matrix perp = orthonormal_complement_basis(StiefelPoint(blk));
    const auto v = perp.cols();
    for (Eigen::Index q = 0; q < blk.cols(); ++q) z.block(q * blk.rows(), q * v, blk.rows(), v) = perp;
  }
  return z;
}

}  // namespace

StackedBlockSystem stack_blocks(const BlockedSystem& sys, const std::vector<Matrix>& blocks) {
  const std::size_t nb = blocks.size();
  StackedBlockSystem out;
  out.offsets.assign(nb + 1, 0);
  Eigen::Index ncons = 0;
  for (std::size_t b = 0; b < nb; ++b) {
    out.offsets[b + 1] = out.offsets[b] + blocks[b].size();
    ncons += blocks[b].cols() * blocks[b].cols();
  }
  const Eigen::Index d = out.offsets.back();
  out.hessian = Matrix::Zero(d, d);
  out.jacobian = Vector::Zero(d);
  out.constraints = Matrix::Zero(ncons, d);
  Eigen::Index row = 0;
  for (std::size_t b = 0; b < nb; ++b) {
    const Eigen::Index db = blocks[b].size();
    if (db == 0) continue;
    out.jacobian.segment(out.offsets[b], db) = flat(sys.jacobian[b]);
    for (std::size_t x = 0; x < nb; ++x) {
      if (blocks[x].size() == 0) continue;
      out.hessian.block(out.offsets[b], out.offsets[x], db, blocks[x].size()) = sys.hessian[b][x];
    }
    const Matrix cb = horizontal_constraints(blocks[b]);
    out.constraints.block(row, out.offsets[b], cb.rows(), db) = cb;
    row += cb.rows();
  }
  return out;
}

Classification classify_blocks(const BlockedSystem& sys, const std::vector<Matrix>& blocks, double rel_tol) {
  const StackedBlockSystem st = stack_blocks(sys, blocks);
  std::vector<Matrix> zs;
  Eigen::Index cols = 0;
  for (const Matrix& blk : blocks) {
    zs.push_back(stiefel_perp_lift(blk));
    cols += zs.back().cols();
  }
  Matrix zfull = Matrix::Zero(st.hessian.rows(), cols);
  Eigen::Index cc = 0;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    zfull.block(st.offsets[b], cc, zs[b].rows(), zs[b].cols()) = zs[b];
    cc += zs[b].cols();
  }
  Matrix r = zfull.transpose() * st.hessian * zfull;
  r = 0.5 * (r + r.transpose()).eval();
  Classification cls;
  if (r.size() == 0) {
    cls.kind = CriticalPoint::Maximum;
    return cls;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(r, Eigen::EigenvaluesOnly);
  const double sign = sys.f < 0 ? -1.0 : 1.0;
  Vector ev = sign * es.eigenvalues();
  if (sign < 0) ev.reverseInPlace();
  cls.eigenvalues = ev;
  const double scale = std::max({std::abs(sys.f), ev.cwiseAbs().maxCoeff(), 1e-300});
  bool zero = false, pos = false, neg = false;
  for (Eigen::Index k = 0; k < ev.size(); ++k) {
    if (std::abs(ev(k)) <= rel_tol * scale) zero = true;
    else if (ev(k) > 0) pos = true;
    else neg = true;
  }
  cls.kind = (pos && neg) ? CriticalPoint::Saddle
             : zero       ? CriticalPoint::Degenerate
             : neg        ? CriticalPoint::Maximum
                          : CriticalPoint::Minimum;
  return cls;
}

NewtonReport newton_on_blocks(std::vector<Matrix> blocks, const BlockAssembler& assemble,
                              const std::function<Matrix(const std::vector<Matrix>&)>& to_point,
                              const ToleranceOptions& opts, const std::string& algorithm) {
  NewtonReport report;
  report.algorithm = algorithm;
  if (opts.keep_trace) report.trace.push_back(StiefelPoint(to_point(blocks)));

  auto grad_norm = [](const BlockedSystem& sys) {
    double s = 0.0;
    for (const auto& j : sys.jacobian) s += j.squaredNorm();
    return std::sqrt(s);
  };

  for (int iter = 0; iter <= opts.max_iter; ++iter) {
    const auto t0 = std::chrono::steady_clock::now();
    EvalCounters cnt;
    const BlockedSystem sys = assemble(blocks, &cnt);
    IterationRecord rec;
    rec.phase = algorithm;
    rec.f = sys.f;
    rec.grad_norm = grad_norm(sys);
    rec.n_det_evals = cnt.n_det_evals;
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
    const StackedBlockSystem st = stack_blocks(sys, blocks);
    NewtonSystem ns;
    ns.hessian = st.hessian;
    ns.constraints = st.constraints;
    ns.jacobian = st.jacobian;
    const HorizontalSolution sol = solve_horizontal(ns);
    rec.rank_deficient = sol.rank_deficient;
    if (sol.rank_deficient) report.singular = true;
    Vector x = Eigen::Map<const Vector>(sol.eta.data(), sol.eta.size());
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      const Matrix& blk = blocks[b];
      if (blk.cols() == 0) continue;
      Eigen::Map<Matrix> eta(x.data() + st.offsets[b], blk.rows(), blk.cols());
      eta -= blk * (blk.transpose() * eta);
    }
    rec.step_norm = x.norm();
    if (rec.step_norm < opts.tol_step) {
      if (sol.rank_deficient)
        report.warnings.push_back("newton: step vanishes on a singular system; try --alg hybrid");
      else
        report.converged = true;
      stamp();
      break;
    }
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      Matrix& blk = blocks[b];
      if (blk.cols() == 0) continue;
      const Matrix eta = Eigen::Map<const Matrix>(x.data() + st.offsets[b], blk.rows(), blk.cols());
      blk = geodesic_update(StiefelPoint(blk), eta).matrix();
    }
    rec.moved = true;
    stamp();
    if (opts.keep_trace) report.trace.push_back(StiefelPoint(to_point(blocks)));
  }
  const BlockedSystem fin = assemble(blocks, nullptr);
  report.final_point = StiefelPoint(to_point(blocks));
  report.final_f = fin.f;
  report.final_grad_norm = grad_norm(fin);
  const Classification cls = classify_blocks(fin, blocks);
  report.character = cls.kind;
  report.hessian_spectrum = cls.eigenvalues;
  if (cls.kind == CriticalPoint::Degenerate) report.singular = true;
  if (!report.converged && report.final_grad_norm < opts.tol_grad) report.converged = true;
  return report;
}

NewtonReport optimize_blocked(const BlockedStiefelPoint& u0, const CIWaveFunction& wf, const ToleranceOptions& opts) {
  const BlockStructure structure = u0.structure();
  const int nb = structure.n_blocks();
  std::vector<Matrix> blocks;
  for (int b = 0; b < nb; ++b) blocks.push_back(u0.block(b));
  auto make = [structure](const std::vector<Matrix>& bl) { return BlockedStiefelPoint(structure, bl); };
  return newton_on_blocks(
      std::move(blocks),
      [&](const std::vector<Matrix>& bl, EvalCounters* cnt) {
        return blocked_assemble(make(bl), wf, opts.assemble.normalize, cnt);
      },
      [&](const std::vector<Matrix>& bl) { return make(bl).assemble().matrix(); }, opts, "newton-blocked");
}

FrozenProblem freeze_core(const CIWaveFunction& wf, const std::vector<int>& frozen_in,
                          const std::optional<StiefelPoint>& u) {
  std::vector<int> frozen = frozen_in;
  std::sort(frozen.begin(), frozen.end());
  frozen.erase(std::unique(frozen.begin(), frozen.end()), frozen.end());
  const int m = wf.n_orbitals();
  const int n = wf.n_electrons();
  const int k = static_cast<int>(frozen.size());
  for (int f : frozen)
    if (f < 0 || f >= m) throw std::invalid_argument("frozen orbital out of range");
  if (k > 0 && k == n) {
    throw std::invalid_argument("cannot freeze every electron");
  }

  FrozenProblem out{CIWaveFunction(m - k, n - k), std::nullopt, frozen, {}};
  std::vector<int> newpos(static_cast<std::size_t>(m), -1);
  for (int p = 0; p < m; ++p)
    if (!std::binary_search(frozen.begin(), frozen.end(), p)) {
      newpos[static_cast<std::size_t>(p)] = static_cast<int>(out.kept.size());
      out.kept.push_back(p);
    }

  for (const auto& t : wf.terms()) {
    for (int f : frozen)
      if (!t.index.contains(f))
        throw std::invalid_argument("frozen orbital " + std::to_string(f + 1) +
                                    " is not occupied in every determinant");
    // sign of moving the frozen orbitals to the front
    int swaps = 0;
    std::vector<int> rest;
    for (int p : t.index) {
      if (std::binary_search(frozen.begin(), frozen.end(), p)) continue;
      for (int f : frozen)
        if (p < f) ++swaps;
      rest.push_back(newpos[static_cast<std::size_t>(p)]);
    }
    out.wf.add(OccupationIndex(std::move(rest)), (swaps % 2 == 0 ? 1.0 : -1.0) * t.coefficient);
  }

  if (const auto& bs = wf.block_structure()) {
    BlockStructure reduced = *bs;
    for (int f : frozen) {
      const int b = bs->block_of(f);
      if (b < bs->n_irreps()) --reduced.alpha_dims[static_cast<std::size_t>(b)];
      else --reduced.beta_dims[static_cast<std::size_t>(b - bs->n_irreps())];
    }
    out.wf.set_block_structure(reduced);
  }

  if (u) {
    const Matrix& um = u->matrix();
    for (int f : frozen) {
      const Vector e = Vector::Unit(m, f);
      if ((e - um * (um.transpose() * e)).norm() > 1e-8)
        throw std::invalid_argument("frozen orbital " + std::to_string(f + 1) + " is not in span(U)");
    }
    Matrix rows(static_cast<Eigen::Index>(out.kept.size()), n);
    for (std::size_t r = 0; r < out.kept.size(); ++r) rows.row(static_cast<Eigen::Index>(r)) = um.row(out.kept[r]);
    const ThinSvd svd = thin_svd(rows);
    out.u = orthonormalize(svd.u.leftCols(n - k));
  }
  return out;
}

StiefelPoint thaw(const FrozenProblem& problem, const StiefelPoint& reduced, int n_orbitals) {
  const int k = static_cast<int>(problem.frozen.size());
  Matrix u = Matrix::Zero(n_orbitals, k + reduced.n_electrons());
  for (int j = 0; j < k; ++j) u(problem.frozen[static_cast<std::size_t>(j)], j) = 1.0;
  for (std::size_t r = 0; r < problem.kept.size(); ++r)
    u.row(problem.kept[r]).tail(reduced.n_electrons()) = reduced.matrix().row(static_cast<Eigen::Index>(r));
  return StiefelPoint(std::move(u));
}

}  // namespace mindet
