#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "mindet/wavefunction.hpp"

using namespace mindet;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("parse a single determinant") {
  const CIWaveFunction wf = parse_wavefunction("WFN 1\nnorb 4\nnelec 2\n1 3 1.0\n");
  CHECK(wf.n_orbitals() == 4);
  CHECK(wf.n_electrons() == 2);
  REQUIRE(wf.size() == 1);
  CHECK(wf.terms()[0].index == OccupationIndex{0, 2});
  CHECK(wf.terms()[0].coefficient == 1.0);
}

TEST_CASE("parse echoes a two-term state") {
  const CIWaveFunction wf = parse_wavefunction("WFN 1\nnorb 4\nnelec 2\n# comment\n\n1 3 0.9798\n2 4 0.2\n");
  CHECK(wf.coefficient(OccupationIndex{0, 2}) == 0.9798);
  CHECK(wf.coefficient(OccupationIndex{1, 3}) == 0.2);
  CHECK(wf.coefficient(OccupationIndex{0, 1}) == 0.0);
}

TEST_CASE("parse errors") {
  const std::string head = "WFN 1\nnorb 4\nnelec 2\n";
  CHECK_THROWS_AS(parse_wavefunction(head + "3 1 1.0\n"), ParseError);
  CHECK_THROWS_AS(parse_wavefunction(head + "1 3 1.0\n1 3 0.5\n"), ParseError);
  CHECK_THROWS_AS(parse_wavefunction(head + "1 2 3 1.0\n"), ParseError);
  CHECK_THROWS_AS(parse_wavefunction(head + "1 5 1.0\n"), ParseError);
  CHECK_THROWS_AS(parse_wavefunction(head + "0 2 1.0\n"), ParseError);
  CHECK_THROWS_AS(parse_wavefunction(head + "1 2 1+2i\n"), ParseError);
  CHECK_THROWS_AS(parse_wavefunction("WFN 2\nnorb 4\nnelec 2\n1 2 1\n"), ParseError);
  CHECK_THROWS_AS(parse_wavefunction("norb 4\nnelec 2\n1 2 1\n"), ParseError);
  CHECK_THROWS_AS(parse_wavefunction(head + "blocks 1 2 3\n1 2 1\n"), ParseError);

  try {
    parse_wavefunction(head + "1 3 1.0\n2 1 1.0\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 5);
  }
}

TEST_CASE("zero coefficients are dropped with a warning") {
  std::vector<std::string> warnings;
  const CIWaveFunction wf = parse_wavefunction("WFN 1\nnorb 4\nnelec 2\n1 3 0\n2 4 1\n", &warnings);
  CHECK(wf.size() == 1);
  CHECK(warnings.size() == 1);
}

TEST_CASE("blocks and frozen lines") {
  const CIWaveFunction wf =
      parse_wavefunction("WFN 1\nnorb 6\nnelec 4\nblocks 2 2 1 2 1\nfrozen 2 1 4\n1 2 4 5 0.5\n1 3 4 6 0.5\n");
  REQUIRE(wf.block_structure().has_value());
  CHECK(wf.block_structure()->alpha_dims == std::vector<int>{2, 1});
  CHECK(wf.block_structure()->beta_dims == std::vector<int>{2, 1});
  CHECK(wf.frozen() == std::vector<int>{0, 3});
}

TEST_CASE("serialize round trip is byte exact") {
  for (const char* name : {"random_ci_6_3_42.wfn", "h2_c0_0.9.wfn"}) {
    const std::string text = slurp(std::string(MINDET_FIXTURE_DIR) + "/" + name);
    CHECK(serialize_wavefunction(parse_wavefunction(text)) == text);
  }
  const std::string text = "WFN 1\nnorb 6\nnelec 4\nblocks 2 2 1 2 1\nfrozen 2 1 4\n1 2 4 5 0.5\n1 3 4 6 -1e-20\n";
  CHECK(serialize_wavefunction(parse_wavefunction(text)) == text);
}

TEST_CASE("format_real is shortest round trip") {
  for (double v : {0.1, -0.5427646471360541, 1e-300, 123456789.0, 1.0 / 3.0}) {
    const std::string s = format_real(v);
    CHECK(std::stod(s) == v);
  }
  CHECK(format_real(0.5) == "0.5");
}

TEST_CASE("reorder_sign") {
  auto [a, sa] = reorder_sign({2, 0});
  CHECK(a == OccupationIndex{0, 2});
  CHECK(sa == -1);
  auto [b, sb] = reorder_sign({0, 2});
  CHECK(b == OccupationIndex{0, 2});
  CHECK(sb == 1);
  auto [c, sc] = reorder_sign({1, 3, 0});
  CHECK(c == OccupationIndex{0, 1, 3});
  CHECK(sc == 1);
  CHECK_THROWS_AS(reorder_sign({1, 2, 1}), VanishingDeterminant);

  // parity against brute-force inversion counting
  std::vector<int> p{4, 0, 3, 1, 2};
  int inv = 0;
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t j = i + 1; j < p.size(); ++j) inv += p[i] > p[j];
  CHECK(reorder_sign(p).second == (inv % 2 ? -1 : 1));
}

TEST_CASE("stored indices are already sorted") {
  const CIWaveFunction wf = parse_wavefunction(
      std::string("WFN 1\nnorb 6\nnelec 3\n1 2 5 0.1\n2 4 6 0.2\n3 4 5 0.3\n"));
  for (const auto& t : wf.terms()) {
    auto [idx, s] = reorder_sign({t.index.begin(), t.index.end()});
    CHECK(idx == t.index);
    CHECK(s == 1);
  }
}

TEST_CASE("excitation_label") {
  CHECK(excitation_label(OccupationIndex{0, 1}, OccupationIndex{0, 1}).rank == 0);
  const Excitation e = excitation_label(OccupationIndex{0, 1}, OccupationIndex{0, 2});
  CHECK(e.rank == 1);
  CHECK(e.holes == std::vector<int>{1});
  CHECK(e.particles == std::vector<int>{2});
  CHECK(e.phase == 1);
  CHECK(excitation_label(OccupationIndex{0, 1, 2, 3}, OccupationIndex{0, 1, 4, 5}).rank == 2);
  // {0,1,2} with 0 -> 3 in place is (3,1,2) = +{1,2,3}
  CHECK(excitation_label(OccupationIndex{0, 1, 2}, OccupationIndex{1, 2, 3}).phase == 1);
  // {0,1,2} with 2 -> 3 in place is already ascending
  CHECK(excitation_label(OccupationIndex{0, 1, 2}, OccupationIndex{0, 1, 3}).phase == 1);
}

TEST_CASE("norm matches a direct sum") {
  const CIWaveFunction wf = parse_wavefunction("WFN 1\nnorb 6\nnelec 3\n1 2 5 0.1\n2 4 6 -0.2\n3 4 5 0.3\n");
  double s = 0.0;
  for (const auto& t : wf.terms()) s += t.coefficient * t.coefficient;
  CHECK(std::abs(wf.norm() - std::sqrt(s)) <= 1e-15 * std::sqrt(s));
  CHECK(std::abs(wf.normalized().norm() - 1.0) < 1e-12);
  CHECK(wf.dominant().index == OccupationIndex{2, 3, 4});
}

TEST_CASE("determinant enumeration") {
  CHECK(binomial(6, 3) == 20);
  CHECK(binomial(16, 8) == 12870);
  const auto dets = enumerate_determinants(5, 2);
  CHECK(dets.size() == 10);
  CHECK(dets.front() == OccupationIndex{0, 1});
  CHECK(dets.back() == OccupationIndex{3, 4});
  CHECK(std::is_sorted(dets.begin(), dets.end()));
}

TEST_CASE("invalid construction") {
  CIWaveFunction wf(4, 2);
  wf.add(OccupationIndex{0, 1}, 0.5);
  CHECK_THROWS(wf.add(OccupationIndex{0, 1}, 0.1));
  CHECK_THROWS(wf.add(OccupationIndex{0, 4}, 0.1));
  CHECK_THROWS(wf.add(OccupationIndex{0}, 0.1));
  CHECK_THROWS(OccupationIndex({2, 1}));
  wf.add(OccupationIndex{2, 3}, 0.0);
  CHECK(wf.size() == 1);
}

TEST_CASE("block structure bookkeeping") {
  const BlockStructure b{{2, 1}, {2, 1}};
  CHECK(b.total() == 6);
  CHECK(b.offset(2) == 3);
  CHECK(b.block_of(4) == 2);
  CHECK(b.block_of(5) == 3);
  CHECK(BlockStructure::spin_halves(4) == BlockStructure{{2}, {2}});
}
