#include "mindet/models.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace mindet {

std::uint64_t SplitMix64::next() {
  std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double SplitMix64::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double SplitMix64::symmetric() { return 2.0 * uniform() - 1.0; }

CIWaveFunction generate_h2_model(double c0) {
  if (!(std::abs(c0) <= 1.0)) throw std::invalid_argument("h2 model: |c0| must not exceed 1");
  CIWaveFunction wf(4, 2);
  wf.add(OccupationIndex{0, 2}, c0);
  wf.add(OccupationIndex{1, 3}, std::sqrt(std::max(0.0, 1.0 - c0 * c0)));
  wf.set_block_structure(BlockStructure::spin_halves(4));
  return wf;
}

StiefelPoint h2_point(double k_alpha, double k_beta) {
  Matrix u = Matrix::Zero(4, 2);
  u(0, 0) = std::cos(k_alpha);
  u(1, 0) = std::sin(k_alpha);
  u(2, 1) = std::cos(k_beta);
  u(3, 1) = std::sin(k_beta);
  return StiefelPoint(std::move(u));
}

namespace {

/// Applies a_p^dag a_q to an ascending occupation; returns the sign or 0.
int hop(std::vector<int>& occ, int p, int q) {
  auto it = std::find(occ.begin(), occ.end(), q);
  if (it == occ.end()) return 0;
  int sign = ((it - occ.begin()) % 2 == 0) ? 1 : -1;
  occ.erase(it);
  if (std::find(occ.begin(), occ.end(), p) != occ.end()) return 0;
  auto pos = std::lower_bound(occ.begin(), occ.end(), p);
  sign *= ((pos - occ.begin()) % 2 == 0) ? 1 : -1;
  occ.insert(pos, p);
  return sign;
}

}  // namespace

HubbardSolution hubbard_dimer_fci(const HubbardDimerSpec& spec) {
  if (!(spec.t > 0.0)) throw std::invalid_argument("hubbard: t must be positive");
  // site spin-orbitals: 0, 1 alpha on sites 1, 2; 2, 3 beta on sites 1, 2
  std::vector<OccupationIndex> basis;
  for (const auto& idx : enumerate_determinants(4, 2)) {
    int na = 0;
    for (int p : idx) na += p < 2;
    if (na == 1) basis.push_back(idx);
  }
  const auto nb = static_cast<Eigen::Index>(basis.size());
  Matrix h = Matrix::Zero(nb, nb);
  auto find = [&](const std::vector<int>& occ) {
    for (Eigen::Index k = 0; k < nb; ++k)
      if (std::equal(occ.begin(), occ.end(), basis[static_cast<std::size_t>(k)].begin(),
                     basis[static_cast<std::size_t>(k)].end()))
        return k;
    throw std::logic_error("hubbard: state outside the M_S = 0 sector");
  };
  const int pairs[4][2] = {{0, 1}, {1, 0}, {2, 3}, {3, 2}};
  for (Eigen::Index col = 0; col < nb; ++col) {
    const auto& det = basis[static_cast<std::size_t>(col)];
    for (const auto& pq : pairs) {
      std::vector<int> occ(det.begin(), det.end());
      const int s = hop(occ, pq[0], pq[1]);
      if (s != 0) h(find(occ), col) += -spec.t * s;
    }
    for (int site = 0; site < 2; ++site)
      if (det.contains(site) && det.contains(site + 2)) h(col, col) += spec.u;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  Vector v = es.eigenvectors().col(0);
  Eigen::Index imax = 0;
  v.cwiseAbs().maxCoeff(&imax);
  if (v(imax) < 0) v = -v;
  HubbardSolution sol{CIWaveFunction(4, 2), es.eigenvalues()(0), es.eigenvalues()(1),
                      (h * v - es.eigenvalues()(0) * v).norm(), 0.0};
  for (Eigen::Index k = 0; k < nb; ++k)
    if (v(k) != 0.0) sol.wf.add(basis[static_cast<std::size_t>(k)], v(k));
  sol.wf.set_block_structure(BlockStructure::spin_halves(4));
  // <bonding^2|H|bonding^2> = -2t + U/2
  sol.mean_field_energy = -2.0 * spec.t + 0.5 * spec.u;
  return sol;
}

CIWaveFunction hubbard_dimer(const HubbardDimerSpec& spec) { return hubbard_dimer_fci(spec).wf; }

StiefelPoint hubbard_mean_field(const HubbardDimerSpec&) {
  Matrix u = Matrix::Zero(4, 2);
  const double r = 1.0 / std::sqrt(2.0);
  u(0, 0) = u(1, 0) = r;
  u(2, 1) = u(3, 1) = r;
  return StiefelPoint(std::move(u));
}

CIWaveFunction random_ci(int n_orbitals, int n_electrons, int n_terms, std::uint64_t seed) {
  std::vector<OccupationIndex> dets = enumerate_determinants(n_orbitals, n_electrons);
  const std::size_t nd = dets.size();
  if (n_terms < 1 || static_cast<std::size_t>(n_terms) > nd)
    throw std::invalid_argument("random_ci: n_terms must be in [1, C(M, n)]");
  SplitMix64 rng(seed);
  for (std::size_t k = 0; k < static_cast<std::size_t>(n_terms); ++k) {
    const std::size_t j = k + static_cast<std::size_t>(rng.next() % (nd - k));
    std::swap(dets[k], dets[j]);
  }
  std::vector<Term> terms;
  double norm2 = 0.0;
  for (std::size_t k = 0; k < static_cast<std::size_t>(n_terms); ++k) {
    double c = 0.0;
    while (c == 0.0) c = rng.symmetric();
    terms.push_back(Term{dets[k], c});
    norm2 += c * c;
  }
  const double s = 1.0 / std::sqrt(norm2);
  for (auto& t : terms) t.coefficient *= s;
  return CIWaveFunction(n_orbitals, n_electrons, std::move(terms));
}

StiefelPoint random_stiefel(int n_orbitals, int n_electrons, std::uint64_t seed) {
  SplitMix64 rng(seed);
  Matrix a(n_orbitals, n_electrons);
  for (Eigen::Index c = 0; c < a.cols(); ++c)
    for (Eigen::Index r = 0; r < a.rows(); ++r) a(r, c) = rng.symmetric();
  return orthonormalize(a);
}

CISDWaveFunction random_cisd(const std::vector<int>& dims, const std::vector<int>& occ, double amplitude,
                             std::uint64_t seed) {
  CISDWaveFunction wf(dims, occ, 1.0);
  SplitMix64 rng(seed);
  const int g = wf.n_irreps();
  for (int x = 0; x < g; ++x)
    for (int i = 0; i < wf.occ(x); ++i)
      for (int a = wf.occ(x); a < wf.dim(x); ++a) wf.set_single(x, i, a, amplitude * rng.symmetric());
  for (int x = 0; x < g; ++x)
    for (int i = 0; i < wf.occ(x); ++i)
      for (int j = i + 1; j < wf.occ(x); ++j)
        for (int a = wf.occ(x); a < wf.dim(x); ++a)
          for (int b = a + 1; b < wf.dim(x); ++b) wf.set_double(x, i, j, a, b, amplitude * rng.symmetric());
  for (int x = 0; x < g; ++x)
    for (int y = 0; y <= x; ++y)
      for (int i = 0; i < wf.occ(x); ++i)
        for (int a = wf.occ(x); a < wf.dim(x); ++a)
          for (int j = 0; j < wf.occ(y); ++j)
            for (int b = wf.occ(y); b < wf.dim(y); ++b) {
              // same-irrep entries are symmetric; draw each unordered pair once
              if (x == y && std::make_pair(j, b) < std::make_pair(i, a)) continue;
              wf.set_mixed(x, y, i, j, a, b, amplitude * rng.symmetric());
            }
  return wf;
}

RestrictedPoint random_restricted_point(const CISDWaveFunction& wf, std::uint64_t seed) {
  RestrictedPoint u;
  for (int x = 0; x < wf.n_irreps(); ++x) {
    if (wf.occ(x) == 0) {
      u.push_back(Matrix::Zero(wf.dim(x), 0));
      continue;
    }
    u.push_back(random_stiefel(wf.dim(x), wf.occ(x), seed + static_cast<std::uint64_t>(x)).matrix());
  }
  return u;
}

}  // namespace mindet
