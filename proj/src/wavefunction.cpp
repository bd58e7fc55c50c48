#include "mindet/wavefunction.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "text_scanner.hpp"

namespace mindet {

OccupationIndex::OccupationIndex(std::vector<int> orbitals) : orbitals_(std::move(orbitals)) {
  for (std::size_t k = 0; k < orbitals_.size(); ++k) {
    if (orbitals_[k] < 0) throw std::invalid_argument("negative orbital index");
    if (k > 0 && orbitals_[k] <= orbitals_[k - 1])
      throw std::invalid_argument("occupation index must be strictly ascending");
  }
}

int OccupationIndex::position(int orbital) const noexcept {
  auto it = std::lower_bound(orbitals_.begin(), orbitals_.end(), orbital);
  if (it == orbitals_.end() || *it != orbital) return -1;
  return static_cast<int>(it - orbitals_.begin());
}

OccupationIndex OccupationIndex::lowest(int n) {
  std::vector<int> v(static_cast<std::size_t>(n));
  std::iota(v.begin(), v.end(), 0);
  return OccupationIndex(std::move(v));
}

std::pair<OccupationIndex, int> reorder_sign(std::vector<int> orbitals) {
  int sign = 1;
  // insertion sort, counting transpositions
  for (std::size_t i = 1; i < orbitals.size(); ++i) {
    for (std::size_t j = i; j > 0 && orbitals[j - 1] >= orbitals[j]; --j) {
      if (orbitals[j - 1] == orbitals[j])
        throw VanishingDeterminant("repeated orbital " + std::to_string(orbitals[j]));
      std::swap(orbitals[j - 1], orbitals[j]);
      sign = -sign;
    }
  }
  return {OccupationIndex(std::move(orbitals)), sign};
}

Excitation excitation_label(const OccupationIndex& reference, const OccupationIndex& target) {
  if (reference.size() != target.size())
    throw std::invalid_argument("excitation_label: lengths differ");
  Excitation ex;
  for (int p : reference)
    if (!target.contains(p)) ex.holes.push_back(p);
  for (int p : target)
    if (!reference.contains(p)) ex.particles.push_back(p);
  ex.rank = static_cast<int>(ex.holes.size());

  std::vector<int> replaced(reference.begin(), reference.end());
  for (std::size_t k = 0; k < ex.holes.size(); ++k)
    replaced[static_cast<std::size_t>(reference.position(ex.holes[k]))] = ex.particles[k];
  ex.phase = reorder_sign(std::move(replaced)).second;
  return ex;
}

int BlockStructure::total() const noexcept {
  return std::accumulate(alpha_dims.begin(), alpha_dims.end(), 0) +
         std::accumulate(beta_dims.begin(), beta_dims.end(), 0);
}

int BlockStructure::dim(int block) const {
  const int g = n_irreps();
  if (block < 0 || block >= 2 * g) throw std::out_of_range("block index");
  return block < g ? alpha_dims[static_cast<std::size_t>(block)]
                   : beta_dims[static_cast<std::size_t>(block - g)];
}

int BlockStructure::offset(int block) const {
  int off = 0;
  for (int b = 0; b < block; ++b) off += dim(b);
  return off;
}

int BlockStructure::block_of(int orbital) const {
  int off = 0;
  for (int b = 0; b < n_blocks(); ++b) {
    off += dim(b);
    if (orbital < off) return b;
  }
  throw std::out_of_range("orbital outside block structure");
}

BlockStructure BlockStructure::spin_halves(int n_orbitals) {
  if (n_orbitals % 2 != 0)
    throw std::invalid_argument("default spin blocks need an even number of spin-orbitals");
  return BlockStructure{{n_orbitals / 2}, {n_orbitals / 2}};
}

CIWaveFunction::CIWaveFunction(int n_orbitals, int n_electrons)
    : n_orbitals_(n_orbitals), n_electrons_(n_electrons) {
  if (n_orbitals <= 0 || n_electrons <= 0 || n_electrons > n_orbitals)
    throw std::invalid_argument("need 0 < n_electrons <= n_orbitals");
}

CIWaveFunction::CIWaveFunction(int n_orbitals, int n_electrons, std::vector<Term> terms)
    : CIWaveFunction(n_orbitals, n_electrons) {
  for (const auto& t : terms) check_index(t.index);
  std::erase_if(terms, [](const Term& t) { return t.coefficient == 0.0; });
  std::sort(terms.begin(), terms.end(),
            [](const Term& a, const Term& b) { return a.index < b.index; });
  for (std::size_t k = 1; k < terms.size(); ++k)
    if (terms[k].index == terms[k - 1].index)
      throw std::invalid_argument("duplicate determinant in wave function");
  for (const auto& t : terms)
    if (!std::isfinite(t.coefficient)) throw std::invalid_argument("non-finite coefficient");
  terms_ = std::move(terms);
}

void CIWaveFunction::check_index(const OccupationIndex& index) const {
  if (index.size() != n_electrons_)
    throw std::invalid_argument("electron-count mismatch in determinant");
  if (index.size() > 0 && index[index.size() - 1] >= n_orbitals_)
    throw std::invalid_argument("orbital index out of range");
}

void CIWaveFunction::add(const OccupationIndex& index, double coefficient) {
  check_index(index);
  if (!std::isfinite(coefficient)) throw std::invalid_argument("non-finite coefficient");
  auto it = std::lower_bound(terms_.begin(), terms_.end(), index,
                             [](const Term& t, const OccupationIndex& i) { return t.index < i; });
  if (it != terms_.end() && it->index == index)
    throw std::invalid_argument("duplicate determinant in wave function");
  if (coefficient == 0.0) return;
  terms_.insert(it, Term{index, coefficient});
}

double CIWaveFunction::coefficient(const OccupationIndex& index) const {
  auto it = std::lower_bound(terms_.begin(), terms_.end(), index,
                             [](const Term& t, const OccupationIndex& i) { return t.index < i; });
  return (it != terms_.end() && it->index == index) ? it->coefficient : 0.0;
}

double CIWaveFunction::norm() const {
  double s = 0.0;
  for (const auto& t : terms_) s += t.coefficient * t.coefficient;
  return std::sqrt(s);
}

CIWaveFunction CIWaveFunction::normalized() const {
  const double nrm = norm();
  if (nrm == 0.0) throw std::domain_error("cannot normalize an empty wave function");
  CIWaveFunction out = *this;
  for (auto& t : out.terms_) t.coefficient /= nrm;
  return out;
}

const Term& CIWaveFunction::dominant() const {
  if (terms_.empty()) throw std::domain_error("empty wave function has no dominant term");
  return *std::max_element(terms_.begin(), terms_.end(), [](const Term& a, const Term& b) {
    return std::abs(a.coefficient) < std::abs(b.coefficient);
  });
}

void CIWaveFunction::set_block_structure(std::optional<BlockStructure> blocks) {
  if (blocks) {
    if (blocks->alpha_dims.size() != blocks->beta_dims.size() || blocks->alpha_dims.empty())
      throw std::invalid_argument("block structure needs g alpha and g beta dimensions");
    if (blocks->total() != n_orbitals_)
      throw std::invalid_argument("block dimensions must sum to the number of spin-orbitals");
    for (int b = 0; b < blocks->n_blocks(); ++b)
      if (blocks->dim(b) < 0) throw std::invalid_argument("negative block dimension");
  }
  blocks_ = std::move(blocks);
}

void CIWaveFunction::set_frozen(std::vector<int> frozen) {
  std::sort(frozen.begin(), frozen.end());
  for (std::size_t k = 0; k < frozen.size(); ++k) {
    if (frozen[k] < 0 || frozen[k] >= n_orbitals_)
      throw std::invalid_argument("frozen orbital out of range");
    if (k > 0 && frozen[k] == frozen[k - 1]) throw std::invalid_argument("repeated frozen orbital");
  }
  frozen_ = std::move(frozen);
}

BlockStructure CIWaveFunction::effective_blocks() const {
  return blocks_ ? *blocks_ : BlockStructure::spin_halves(n_orbitals_);
}

std::string format_real(double value) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

CIWaveFunction parse_wavefunction(std::string_view text, std::vector<std::string>* warnings) {
  detail::LineScanner scan(text);
  auto header = scan.next_record();
  if (!header || header->tokens.size() != 2 || header->tokens[0] != "WFN" ||
      header->tokens[1] != "1")
    throw ParseError(header ? header->line : 1, "expected header 'WFN 1'");

  const int n_orbitals = scan.keyed_int("norb");
  const int n_electrons = scan.keyed_int("nelec");
  if (n_orbitals <= 0 || n_electrons <= 0 || n_electrons > n_orbitals)
    throw ParseError(scan.line(), "need 0 < nelec <= norb");

  CIWaveFunction wf(n_orbitals, n_electrons);
  while (auto rec = scan.next_record()) {
    const auto& tok = rec->tokens;
    if (tok[0] == "blocks") {
      const int g = detail::to_int(tok.at(1), rec->line);
      if (g <= 0 || tok.size() != static_cast<std::size_t>(2 + 2 * g))
        throw ParseError(rec->line, "blocks line needs g followed by 2g dimensions");
      BlockStructure bs;
      for (int k = 0; k < g; ++k) bs.alpha_dims.push_back(detail::to_int(tok[2 + k], rec->line));
      for (int k = 0; k < g; ++k)
        bs.beta_dims.push_back(detail::to_int(tok[2 + g + k], rec->line));
      try {
        wf.set_block_structure(bs);
      } catch (const std::invalid_argument& e) {
        throw ParseError(rec->line, e.what());
      }
      continue;
    }
    if (tok[0] == "frozen") {
      const int k = detail::to_int(tok.at(1), rec->line);
      if (k < 0 || tok.size() != static_cast<std::size_t>(2 + k))
        throw ParseError(rec->line, "frozen line needs k followed by k indices");
      std::vector<int> fr;
      for (int j = 0; j < k; ++j) fr.push_back(detail::to_int(tok[2 + j], rec->line) - 1);
      try {
        wf.set_frozen(fr);
      } catch (const std::invalid_argument& e) {
        throw ParseError(rec->line, e.what());
      }
      continue;
    }
    if (tok.size() != static_cast<std::size_t>(n_electrons + 1))
      throw ParseError(rec->line, "electron-count mismatch: expected " +
                                      std::to_string(n_electrons) + " indices and a coefficient");
    std::vector<int> idx;
    for (int k = 0; k < n_electrons; ++k) {
      const int p = detail::to_int(tok[static_cast<std::size_t>(k)], rec->line);
      if (p < 1 || p > n_orbitals) throw ParseError(rec->line, "occupation index out of range");
      if (!idx.empty() && p - 1 <= idx.back())
        throw ParseError(rec->line, "occupation indices not ascending");
      idx.push_back(p - 1);
    }
    const double c = detail::to_real(tok.back(), rec->line);
    OccupationIndex index(std::move(idx));
    if (wf.coefficient(index) != 0.0) throw ParseError(rec->line, "duplicate determinant");
    if (c == 0.0) {
      if (warnings)
        warnings->push_back("line " + std::to_string(rec->line) +
                            ": zero coefficient dropped");
      continue;
    }
    wf.add(index, c);
  }
  return wf;
}

std::string serialize_wavefunction(const CIWaveFunction& wf) {
  std::ostringstream out;
  out << "WFN 1\n";
  out << "norb " << wf.n_orbitals() << "\n";
  out << "nelec " << wf.n_electrons() << "\n";
  if (const auto& bs = wf.block_structure()) {
    out << "blocks " << bs->n_irreps();
    for (int d : bs->alpha_dims) out << ' ' << d;
    for (int d : bs->beta_dims) out << ' ' << d;
    out << "\n";
  }
  if (!wf.frozen().empty()) {
    out << "frozen " << wf.frozen().size();
    for (int p : wf.frozen()) out << ' ' << p + 1;
    out << "\n";
  }
  for (const auto& t : wf.terms()) {
    for (int p : t.index) out << p + 1 << ' ';
    out << format_real(t.coefficient) << "\n";
  }
  return out.str();
}

CIWaveFunction read_wavefunction_file(const std::string& path, std::vector<std::string>* warnings) {
  return parse_wavefunction(detail::slurp(path), warnings);
}

void write_wavefunction_file(const std::string& path, const CIWaveFunction& wf) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << serialize_wavefunction(wf);
}

std::size_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  std::size_t r = 1;
  for (int j = 1; j <= k; ++j) r = r * static_cast<std::size_t>(n - k + j) / static_cast<std::size_t>(j);
  return r;
}

std::vector<OccupationIndex> enumerate_determinants(int n_orbitals, int n_electrons) {
  std::vector<OccupationIndex> out;
  out.reserve(binomial(n_orbitals, n_electrons));
  std::vector<int> c(static_cast<std::size_t>(n_electrons));
  std::iota(c.begin(), c.end(), 0);
  if (n_electrons > n_orbitals) return out;
  while (true) {
    out.emplace_back(c);
    int k = n_electrons - 1;
    while (k >= 0 && c[static_cast<std::size_t>(k)] == n_orbitals - n_electrons + k) --k;
    if (k < 0) break;
    ++c[static_cast<std::size_t>(k)];
    for (int j = k + 1; j < n_electrons; ++j)
      c[static_cast<std::size_t>(j)] = c[static_cast<std::size_t>(j - 1)] + 1;
  }
  return out;
}

}  // namespace mindet
