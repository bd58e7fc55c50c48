#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mindet/grassmann.hpp"
#include "mindet/parallel.hpp"
#include "mindet/wavefunction.hpp"

namespace mindet {

struct CheckResult {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::string detail;
};

struct CheckOptions {
  /// Empty: all of fd, equivalence, blocked, plucker.
  std::vector<std::string> only;
  /// "sign-flip" perturbs the analytic side of every check (test mode).
  std::string inject_fault;
  std::uint64_t seed = 2024;
  ParallelOptions parallel;
};

std::vector<std::string> check_names();
std::vector<CheckResult> run_checks(const CheckOptions& opts);

/// (I - V V^T) grad f(V) for any M x n matrix V, coefficients divided by |C|.
Matrix projected_gradient_map(const Matrix& v, const CIWaveFunction& wf);

/// Central differences, step h, of the projected gradient map along eta = Pi E_pq
/// for every (p, q), projected by Pi: columns in vec_index order.
Matrix fd_projected_hessian(const StiefelPoint& u, const CIWaveFunction& wf, double h);
/// Pi times central differences of f along every E_pq.
Matrix fd_projected_jacobian(const StiefelPoint& u, const CIWaveFunction& wf, double h);

/// f(K) = f(Q exp([[0, -K^T], [K, 0]]) E_n) with Q = complete_basis(u), and its
/// exact gradient through the Frechet derivative of exp.
double thouless_f(const Matrix& k, const StiefelPoint& u, const CIWaveFunction& wf);
Matrix thouless_gradient(const Matrix& k, const StiefelPoint& u, const CIWaveFunction& wf);

/// Random instances used by the derivative and equivalence checks:
/// (M, n, terms) in {4, 6, 8} x {2, 3, 4} with 10 to 30 terms (capped by C(M, n)).
struct RandomInstance {
  CIWaveFunction wf;
  StiefelPoint u;
};
std::vector<RandomInstance> random_instances(std::uint64_t seed);

}  // namespace mindet
