#include "mindet/checks.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unsupported/Eigen/MatrixFunctions>

#include "mindet/blocked.hpp"
#include "mindet/cisd.hpp"
#include "mindet/kernels.hpp"
#include "mindet/metrics.hpp"
#include "mindet/models.hpp"
#include "mindet/newton.hpp"
#include "mindet/thouless.hpp"

namespace mindet {

std::vector<std::string> check_names() { return {"fd", "equivalence", "blocked", "plucker"}; }

Matrix projected_gradient_map(const Matrix& v, const CIWaveFunction& wf) {
  const Matrix g = sum_kernels(v, wf, 1.0 / wf.norm(), false).g;
  return g - v * (v.transpose() * g);
}

Matrix fd_projected_hessian(const StiefelPoint& u, const CIWaveFunction& wf, double h) {
  const Matrix& um = u.matrix();
  const auto m = um.rows(), n = um.cols();
  const Matrix pi = Matrix::Identity(m, m) - um * um.transpose();
  Matrix out(m * n, m * n);
  for (Eigen::Index q = 0; q < n; ++q)
    for (Eigen::Index p = 0; p < m; ++p) {
      Matrix eta = Matrix::Zero(m, n);
      eta.col(q) = pi.col(p);
      const Matrix d = pi * (projected_gradient_map(um + h * eta, wf) - projected_gradient_map(um - h * eta, wf)) /
                       (2.0 * h);
      out.col(q * m + p) = Eigen::Map<const Vector>(d.data(), d.size());
    }
  return out;
}

Matrix fd_projected_jacobian(const StiefelPoint& u, const CIWaveFunction& wf, double h) {
  const Matrix& um = u.matrix();
  const auto m = um.rows(), n = um.cols();
  Matrix g(m, n);
  const double s = 1.0 / wf.norm();
  for (Eigen::Index q = 0; q < n; ++q)
    for (Eigen::Index p = 0; p < m; ++p) {
      Matrix a = um, b = um;
      a(p, q) += h;
      b(p, q) -= h;
      g(p, q) = s * (overlap_unnormalized(a, wf) - overlap_unnormalized(b, wf)) / (2.0 * h);
    }
  return g - um * (um.transpose() * g);
}

namespace {

Matrix generator(const Matrix& k) {
  const auto nv = k.rows(), ne = k.cols();
  Matrix a = Matrix::Zero(nv + ne, nv + ne);
  a.block(ne, 0, nv, ne) = k;
  a.block(0, ne, ne, nv) = -k.transpose();
  return a;
}

}  // namespace

double thouless_f(const Matrix& k, const StiefelPoint& u, const CIWaveFunction& wf) {
  const Matrix q = complete_basis(u);
  const Matrix v = q * generator(k).exp().leftCols(u.n_electrons());
  return overlap_unnormalized(v, wf) / wf.norm();
}

Matrix thouless_gradient(const Matrix& k, const StiefelPoint& u, const CIWaveFunction& wf) {
  const Matrix q = complete_basis(u);
  const Matrix a = generator(k);
  const auto m = a.rows();
  const auto n = static_cast<Eigen::Index>(u.n_electrons());
  const Matrix v = q * a.exp().leftCols(n);
  const Matrix g = sum_kernels(v, wf, 1.0 / wf.norm(), false).g;
  Matrix out(k.rows(), k.cols());
  for (Eigen::Index i = 0; i < k.cols(); ++i)
    for (Eigen::Index r = 0; r < k.rows(); ++r) {
      Matrix e = Matrix::Zero(k.rows(), k.cols());
      e(r, i) = 1.0;
      // Frechet derivative of exp: upper-right block of exp([[A, dA], [0, A]])
      Matrix big = Matrix::Zero(2 * m, 2 * m);
      big.topLeftCorner(m, m) = a;
      big.bottomRightCorner(m, m) = a;
      big.topRightCorner(m, m) = generator(e);
      const Matrix dv = q * big.exp().topRightCorner(m, m).leftCols(n);
      out(r, i) = (g.array() * dv.array()).sum();
    }
  return out;
}

std::vector<RandomInstance> random_instances(std::uint64_t seed) {
  const int shapes[10][3] = {{4, 2, 6},  {6, 2, 12}, {6, 3, 15}, {6, 4, 10}, {8, 2, 20},
                             {8, 3, 25}, {8, 4, 30}, {6, 3, 20}, {8, 3, 12}, {4, 3, 4}};
  std::vector<RandomInstance> out;
  for (int k = 0; k < 10; ++k) {
    const int m = shapes[k][0], n = shapes[k][1];
    const int terms = std::min<int>(shapes[k][2], static_cast<int>(binomial(m, n)));
    out.push_back({random_ci(m, n, terms, seed + 101 * static_cast<std::uint64_t>(k)),
                   random_stiefel(m, n, seed + 7919 * static_cast<std::uint64_t>(k) + 1)});
  }
  return out;
}

namespace {

double rel_error(const Matrix& analytic, const Matrix& oracle) {
  const double scale = std::max({analytic.norm(), oracle.norm(), 1e-300});
  return (analytic - oracle).norm() / scale;
}

CheckResult check_fd(const CheckOptions& opts, bool fault) {
  double worst = 0.0;
  const double h = 1e-5;
  for (const auto& inst : random_instances(opts.seed)) {
    AssembleOptions ao;
    ao.parallel = opts.parallel;
    const NewtonSystem sys = assemble_system(inst.u, inst.wf, ao);
    const Matrix jac = fault ? Matrix(-sys.jacobian) : sys.jacobian;
    worst = std::max(worst, rel_error(jac, fd_projected_jacobian(inst.u, inst.wf, h)));
    const Matrix hfd = fd_projected_hessian(inst.u, inst.wf, h);
    const Matrix& um = inst.u.matrix();
    const Matrix proj = [&] {
      const auto m = um.rows(), n = um.cols();
      Matrix p = Matrix::Zero(m * n, m * n);
      const Matrix pi = Matrix::Identity(m, m) - um * um.transpose();
      for (Eigen::Index q = 0; q < n; ++q) p.block(q * m, q * m, m, m) = pi;
      return p;
    }();
    worst = std::max(worst, rel_error(sys.hessian * proj, hfd));

    const int m = inst.wf.n_orbitals(), n = inst.wf.n_electrons();
    TransformOptions to;
    to.parallel = opts.parallel;
    const CIWaveFunction rotated = transform_ci(inst.wf, complete_basis(inst.u), to);
    const OrbitalRotationSystem ts = build_jac_hess(rotated);
    Matrix jfd(m - n, n);
    const Matrix zero = Matrix::Zero(m - n, n);
    for (int i = 0; i < n; ++i)
      for (int a = 0; a < m - n; ++a) {
        Matrix kp = zero, km = zero;
        kp(a, i) = h;
        km(a, i) = -h;
        jfd(a, i) = (thouless_f(kp, inst.u, inst.wf) - thouless_f(km, inst.u, inst.wf)) / (2.0 * h);
      }
    worst = std::max(worst, rel_error(ts.jacobian, jfd));
    const Eigen::Index d = static_cast<Eigen::Index>(m - n) * n;
    Matrix hfd2(d, d);
    for (Eigen::Index col = 0; col < d; ++col) {
      Matrix kp = zero, km = zero;
      kp(col % (m - n), col / (m - n)) = h;
      km(col % (m - n), col / (m - n)) = -h;
      const Matrix diff = (thouless_gradient(kp, inst.u, inst.wf) - thouless_gradient(km, inst.u, inst.wf)) / (2.0 * h);
      hfd2.col(col) = Eigen::Map<const Vector>(diff.data(), diff.size());
    }
    worst = std::max(worst, rel_error(ts.hessian, hfd2));
  }
  return {"fd", worst, 1e-6, worst < 1e-6, "max relative error of analytic J/H vs central differences, h = 1e-5"};
}

CheckResult check_equivalence(const CheckOptions& opts, bool fault) {
  double worst = 0.0;
  int min_compared = 1 << 30;
  for (const auto& inst : random_instances(opts.seed)) {
    ToleranceOptions to;
    to.keep_trace = true;
    to.max_iter = 6;
    to.assemble.parallel = opts.parallel;
    const int m = inst.wf.n_orbitals();
    const NewtonReport a = optimize(StiefelPoint::from_occupation(m, inst.wf.dominant().index), inst.wf, to);
    // one Thouless iteration from every Newton iterate
    ToleranceOptions one = to;
    one.max_iter = 1;
    int compared = 0;
    for (std::size_t s = 0; s + 1 < a.trace.size(); ++s) {
      const NewtonReport b = optimize_thouless(inst.wf, a.trace[s], one);
      Matrix bm = b.trace.back().matrix();
      if (fault) bm.row(0) = -bm.row(0);
      worst = std::max(worst, subspace_distance(a.trace[s + 1], orthonormalize(bm)));
      ++compared;
    }
    min_compared = std::min(min_compared, compared);
  }
  std::ostringstream d;
  d << "max subspace distance of one Thouless step from each Newton iterate; " << min_compared
    << " or more iterations per instance";
  return {"equivalence", worst, 1e-10, worst < 1e-10, d.str()};
}

CheckResult check_blocked(const CheckOptions& opts, bool fault) {
  const std::vector<std::pair<std::vector<int>, std::vector<int>>> shapes = {
      {{3, 3}, {1, 1}}, {{4, 3}, {2, 1}}, {{3, 4}, {1, 2}}, {{4, 4}, {2, 2}}};
  double worst = 0.0;
  std::uint64_t seed = opts.seed;
  for (const auto& [dims, occ] : shapes) {
    const CISDWaveFunction cwf = random_cisd(dims, occ, 0.3, seed++);
    const RestrictedPoint u = random_restricted_point(cwf, seed++);
    const CIWaveFunction wf = expand_cisd(cwf, 0.5);
    const BlockedStiefelPoint bu = to_blocked(u, cwf);
    AssembleOptions ao;
    ao.normalize = false;
    ao.parallel = opts.parallel;
    const NewtonSystem general = assemble_system(bu.assemble(), wf, ao);
    const BlockedSystem from_general = restrict_spin(restrict_to_blocks(general, bu), cwf.n_irreps());
    const BlockedSystem blocked = blocked_assemble(bu, wf, false);
    worst = std::max(worst, blocked_system_deviation(blocked, restrict_to_blocks(general, bu), bu));
    for (CisdPath path : {CisdPath::Literal, CisdPath::Guarded}) {
      BlockedSystem fast = cisd_assemble(u, cwf, path);
      if (fault) fast.jacobian[0] = -fast.jacobian[0];
      worst = std::max(worst, restricted_system_deviation(fast, from_general, u));
    }
  }
  return {"blocked", worst, 1e-12, worst < 1e-12, "max elementwise deviation blocked/CISD vs general"};
}

CheckResult check_plucker(const CheckOptions& opts, bool fault) {
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const StiefelPoint u = random_stiefel(4, 2, opts.seed + static_cast<std::uint64_t>(k));
    const auto c = determinant_ci_vector(u);  // lexicographic: 12 13 14 23 24 34
    double r = plucker_residual_2e(c[0], c[5], c[1], c[4], c[2], c[3]);
    if (fault) r += 2.0 * c[1] * c[4];
    worst = std::max(worst, std::abs(r));
  }
  const double s = 1.0 / std::sqrt(2.0);
  const double eq30 = std::abs(plucker_residual_2e(0, 0, s, s, 0, 0));
  const bool pass = worst < 1e-10 && eq30 > 0.1;
  std::ostringstream d;
  d << "max residual over 1000 determinants; two-term state residual " << eq30;
  return {"plucker", worst, 1e-10, pass, d.str()};
}

}  // namespace

std::vector<CheckResult> run_checks(const CheckOptions& opts) {
  const bool fault = opts.inject_fault == "sign-flip";
  if (!opts.inject_fault.empty() && !fault) throw std::invalid_argument("unknown fault '" + opts.inject_fault + "'");
  std::vector<std::string> names = opts.only.empty() ? check_names() : opts.only;
  std::vector<CheckResult> out;
  for (const auto& name : names) {
    if (name == "fd") out.push_back(check_fd(opts, fault));
    else if (name == "equivalence") out.push_back(check_equivalence(opts, fault));
    else if (name == "blocked") out.push_back(check_blocked(opts, fault));
    else if (name == "plucker") out.push_back(check_plucker(opts, fault));
    else throw std::invalid_argument("unknown check '" + name + "'");
  }
  return out;
}

}  // namespace mindet
