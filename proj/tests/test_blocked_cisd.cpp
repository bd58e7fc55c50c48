#include <cmath>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "mindet/blocked.hpp"
#include "mindet/cisd.hpp"
#include "mindet/models.hpp"
#include "mindet/newton.hpp"
#include "oracles.hpp"

using namespace mindet;

namespace {

CIWaveFunction blocked_random_wf(std::uint64_t seed) {
  // two irreps per spin, dims {2, 2} / {2, 2}; one electron in each block
  CIWaveFunction wf(8, 4);
  wf.set_block_structure(BlockStructure{{2, 2}, {2, 2}});
  SplitMix64 rng(seed);
  for (int a = 0; a < 2; ++a)
    for (int b = 2; b < 4; ++b)
      for (int c = 4; c < 6; ++c)
        for (int d = 6; d < 8; ++d) wf.add(OccupationIndex{a, b, c, d}, rng.symmetric());
  // a term with a different block occupation is ignored by the blocked path
  wf.add(OccupationIndex{0, 1, 4, 6}, 0.3);
  return wf;
}

BlockedStiefelPoint random_blocked_point(std::uint64_t seed) {
  std::vector<Matrix> blocks;
  for (int b = 0; b < 4; ++b) blocks.push_back(random_stiefel(2, 1, seed + static_cast<std::uint64_t>(b)).matrix());
  return BlockedStiefelPoint(BlockStructure{{2, 2}, {2, 2}}, blocks);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("blocked_f") {
  const CIWaveFunction wf = blocked_random_wf(1);
  const BlockedStiefelPoint u = random_blocked_point(2);
  CHECK(std::abs(blocked_f(u, wf) - oracle::overlap(u.assemble().matrix(), wf)) < 1e-13);

  // a single block reduces to the unblocked overlap
  const CIWaveFunction plain = random_ci(5, 2, 6, 3);
  CIWaveFunction one = plain;
  one.set_block_structure(BlockStructure{{5}, {0}});
  const BlockedStiefelPoint single(BlockStructure{{5}, {0}},
                                   {random_stiefel(5, 2, 4).matrix(), Matrix(0, 0)});
  CHECK(std::abs(blocked_f(single, one) - overlap_f(single.assemble(), plain)) < 1e-14);
}

TEST_CASE("blocked_assemble agrees with the general path") {
  const CIWaveFunction wf = blocked_random_wf(5);
  const BlockedStiefelPoint u = random_blocked_point(6);
  const NewtonSystem general = assemble_system(u.assemble(), wf);
  CHECK(blocked_system_deviation(blocked_assemble(u, wf), restrict_to_blocks(general, u), u) < 1e-12);
}

TEST_CASE("CISD container") {
  CISDWaveFunction wf({3, 2}, {1, 1}, 0.9);
  wf.set_single(0, 0, 2, 0.1);
  CHECK_THROWS(wf.set_double(0, 0, 0, 1, 2, 0.1));
  CHECK_THROWS(wf.set_single(0, 1, 2, 0.1));
  wf.set_mixed(1, 0, 0, 0, 1, 1, 0.05);
  CHECK(wf.mixed(0, 1, 0, 0, 1, 1) == 0.05);
  CHECK(wf.mixed(1, 0, 0, 0, 1, 1) == 0.05);
  wf.set_mixed(0, 0, 0, 0, 1, 2, 0.02);
  CHECK(wf.mixed(0, 0, 0, 0, 2, 1) == 0.02);
  CHECK_THROWS(wf.set_mixed(0, 0, 0, 0, 2, 1, 0.03));
  CHECK(wf.n_spin_orbitals() == 10);
  CHECK(wf.n_electrons() == 4);
  CHECK(wf.block_occupations() == std::vector<int>{1, 1, 1, 1});
}

TEST_CASE("CISD file round trip and errors") {
  const std::string text = slurp(std::string(MINDET_FIXTURE_DIR) + "/cisd_2irrep.cisd");
  const CISDWaveFunction wf = parse_cisd(text);
  CHECK(wf.n_irreps() == 2);
  CHECK(serialize_cisd(wf) == text);

  CHECK_THROWS_AS(parse_cisd("CISD 1\nnorb 4\nnelec 2\nblocks 1 2\nocc 1\nref 1\ns 1 2 1 0.1\n"), ParseError);
  CHECK_THROWS_AS(parse_cisd("CISD 1\nnorb 4\nnelec 4\nblocks 1 2\nocc 1\nref 1\n"), ParseError);
  CHECK_THROWS_AS(parse_cisd("CISD 1\nnorb 4\nnelec 2\nblocks 1 2\nocc 1\nref 1\nd 1 1 1 2 2 0.1\n"), ParseError);
  CHECK_THROWS_AS(parse_cisd("CISD 1\nnorb 4\nnelec 2\nblocks 1 2\nocc 1\nref 1\nx 1\n"), ParseError);
}

TEST_CASE("cisd_f") {
  const CISDWaveFunction wf = random_cisd({3, 4}, {1, 2}, 0.2, 7);
  const RestrictedPoint u = random_restricted_point(wf, 8);
  const CIWaveFunction full = expand_cisd(wf);
  CHECK(std::abs(cisd_f(u, wf) - overlap_unnormalized(to_blocked(u, wf).assemble().matrix(), full)) < 1e-12);

  // reference only: c0 times the squared block determinants
  CISDWaveFunction ref({3, 4}, {1, 2}, 0.7);
  const double f0 = oracle::F(u[0], {0}) * oracle::F(u[1], {0, 1});
  CHECK(std::abs(cisd_f(u, ref) - 0.7 * f0 * f0) < 1e-14);

  // one same-irrep double: 2 F_0^G C F_ij^ab times the other irreps' F_0^2
  CISDWaveFunction dbl({3, 4}, {1, 2}, 0.0);
  dbl.set_double(1, 0, 1, 2, 3, 0.3);
  const double f0g = oracle::F(u[1], {0, 1});
  const double fd = oracle::F(u[1], {2, 3});
  const double other = std::pow(oracle::F(u[0], {0}), 2);
  CHECK(std::abs(cisd_f(u, dbl) - 2 * f0g * 0.3 * fd * other) < 1e-14);
}

TEST_CASE("expansion is split invariant") {
  const CISDWaveFunction wf = random_cisd({3, 3}, {1, 1}, 0.3, 9);
  const RestrictedPoint u = random_restricted_point(wf, 10);
  const Matrix g = to_blocked(u, wf).assemble().matrix();
  const double ref = overlap_unnormalized(g, expand_cisd(wf, 0.5));
  for (double split : {0.0, 0.3, 1.0}) CHECK(std::abs(overlap_unnormalized(g, expand_cisd(wf, split)) - ref) < 1e-13);
}

TEST_CASE("cisd_assemble paths") {
  CISDWaveFunction bare({3, 3}, {1, 1}, 1.0);
  const BlockedSystem at_ref = cisd_assemble(restricted_reference(bare), bare);
  for (const auto& j : at_ref.jacobian) CHECK(j.isZero());

  const CISDWaveFunction wf = random_cisd({4, 3}, {2, 1}, 0.3, 11);
  const RestrictedPoint u = random_restricted_point(wf, 12);
  const BlockedStiefelPoint bu = to_blocked(u, wf);
  AssembleOptions ao;
  ao.normalize = false;
  const NewtonSystem general = assemble_system(bu.assemble(), expand_cisd(wf), ao);
  const BlockedSystem oracle_sys = restrict_spin(restrict_to_blocks(general, bu), wf.n_irreps());
  const BlockedSystem literal = cisd_assemble(u, wf, CisdPath::Literal);
  const BlockedSystem guarded = cisd_assemble(u, wf, CisdPath::Guarded);
  CHECK(restricted_system_deviation(literal, oracle_sys, u) < 1e-12);
  CHECK(restricted_system_deviation(guarded, oracle_sys, u) < 1e-12);
  CHECK(std::abs(literal.f - general.f) < 1e-13);

  // singular block determinant: the automatic path switches to the guarded form
  RestrictedPoint sing = u;
  sing[1] = StiefelPoint::from_occupation(3, OccupationIndex{2}).matrix();
  const NewtonSystem gs = assemble_system(to_blocked(sing, wf).assemble(), expand_cisd(wf), ao);
  const BlockedSystem os = restrict_spin(restrict_to_blocks(gs, to_blocked(sing, wf)), wf.n_irreps());
  CHECK(restricted_system_deviation(cisd_assemble(sing, wf), os, sing) < 1e-12);
}

TEST_CASE("optimize_cisd agrees with the general optimizer") {
  const CISDWaveFunction wf = random_cisd({3, 3}, {1, 1}, 0.15, 13);
  const NewtonReport r = optimize_cisd(restricted_reference(wf), wf);
  CHECK(r.converged);
  const CIWaveFunction full = expand_cisd(wf);
  const NewtonReport g = optimize(to_blocked(restricted_reference(wf), wf).assemble(), full);
  CHECK(std::abs(std::abs(r.final_f) - std::abs(g.final_f)) < 1e-10);
}

TEST_CASE("freeze_core") {
  const CIWaveFunction wf = random_ci(6, 3, 10, 14);
  const FrozenProblem id = freeze_core(wf, {});
  CHECK(id.wf.n_orbitals() == 6);
  CHECK(id.wf.size() == wf.size());

  CIWaveFunction core(6, 3);
  core.add(OccupationIndex{0, 1, 2}, 0.8);
  core.add(OccupationIndex{0, 3, 4}, 0.5);
  core.add(OccupationIndex{0, 2, 5}, -0.3);
  core.add(OccupationIndex{0, 1, 5}, 0.1);
  const FrozenProblem fp = freeze_core(core, {0});
  CHECK(fp.wf.n_orbitals() == 5);
  CHECK(fp.wf.n_electrons() == 2);
  const NewtonReport full = optimize(StiefelPoint::reference(6, 3), core);
  const NewtonReport reduced = optimize(StiefelPoint::reference(5, 2), fp.wf);
  CHECK(std::abs(std::abs(full.final_f) - std::abs(reduced.final_f)) < 1e-10);
  const StiefelPoint back = thaw(fp, reduced.final_point, 6);
  CHECK(std::abs(std::abs(overlap_f(back, core)) - std::abs(reduced.final_f)) < 1e-12);

  CHECK_THROWS_AS(freeze_core(core, {1}), std::invalid_argument);
  CHECK_THROWS_AS(freeze_core(core, {0, 3, 4}), std::invalid_argument);
}
