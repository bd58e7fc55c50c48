#pragma once

#include <compare>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace mindet {

/// Raised for malformed WFN/CISD input. Carries the 1-based line number.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Raised when an orbital list contains a repeated index: the wedge product vanishes.
class VanishingDeterminant : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Strictly ascending list of occupied spin-orbitals (0-based).
class OccupationIndex {
 public:
  OccupationIndex() = default;
  explicit OccupationIndex(std::vector<int> orbitals);
  OccupationIndex(std::initializer_list<int> orbitals)
      : OccupationIndex(std::vector<int>(orbitals)) {}

  std::span<const int> orbitals() const noexcept { return orbitals_; }
  int size() const noexcept { return static_cast<int>(orbitals_.size()); }
  int operator[](int k) const { return orbitals_[static_cast<std::size_t>(k)]; }
  auto begin() const noexcept { return orbitals_.begin(); }
  auto end() const noexcept { return orbitals_.end(); }

  bool contains(int orbital) const noexcept { return position(orbital) >= 0; }
  /// Slot of `orbital` in the ascending list, or -1.
  int position(int orbital) const noexcept;

  auto operator<=>(const OccupationIndex&) const = default;

  /// The first `n` orbitals {0, ..., n-1}.
  static OccupationIndex lowest(int n);

 private:
  std::vector<int> orbitals_;
};

/// Sorts `orbitals` and returns the parity of the sorting permutation.
/// Throws VanishingDeterminant on repeated entries.
std::pair<OccupationIndex, int> reorder_sign(std::vector<int> orbitals);

struct Excitation {
  int rank = 0;
  std::vector<int> holes;      ///< in reference, not in target (ascending)
  std::vector<int> particles;  ///< in target, not in reference (ascending)
  /// Sign relating the ascending target determinant to the reference with each
  /// hole replaced in place by the matching particle:
  ///   |target> = phase * |reference with holes[k] -> particles[k]>.
  int phase = 1;
};

Excitation excitation_label(const OccupationIndex& reference, const OccupationIndex& target);

/// Direct-sum decomposition of the spin-orbital space: alpha irreps first, then
/// beta irreps, each a contiguous range of orbitals.
struct BlockStructure {
  std::vector<int> alpha_dims;
  std::vector<int> beta_dims;

  int n_irreps() const noexcept { return static_cast<int>(alpha_dims.size()); }
  int n_blocks() const noexcept { return 2 * n_irreps(); }
  int total() const noexcept;
  /// Dimension of block b (alpha blocks 0..g-1, beta g..2g-1).
  int dim(int block) const;
  int offset(int block) const;
  /// Block containing spin-orbital p.
  int block_of(int orbital) const;
  bool restricted() const noexcept { return alpha_dims == beta_dims; }

  /// Two blocks (alpha 0..M/2-1, beta M/2..M-1).
  static BlockStructure spin_halves(int n_orbitals);

  bool operator==(const BlockStructure&) const = default;
};

struct Term {
  OccupationIndex index;
  double coefficient = 0.0;
};

/// Sparse CI expansion sum_I C_I phi_{I_1} ^ ... ^ phi_{I_n}.
/// Terms are kept sorted by index; zero coefficients are never stored.
class CIWaveFunction {
 public:
  CIWaveFunction(int n_orbitals, int n_electrons);
  CIWaveFunction(int n_orbitals, int n_electrons, std::vector<Term> terms);

  int n_orbitals() const noexcept { return n_orbitals_; }
  int n_electrons() const noexcept { return n_electrons_; }
  std::span<const Term> terms() const noexcept { return terms_; }
  std::size_t size() const noexcept { return terms_.size(); }

  /// Adds a new determinant; throws on duplicates, range or length violations.
  /// A zero coefficient is ignored.
  void add(const OccupationIndex& index, double coefficient);
  /// Coefficient of `index` (0 when absent).
  double coefficient(const OccupationIndex& index) const;

  double norm() const;
  CIWaveFunction normalized() const;
  /// Term with the largest |C_I| (first in index order on ties).
  const Term& dominant() const;

  const std::optional<BlockStructure>& block_structure() const noexcept { return blocks_; }
  void set_block_structure(std::optional<BlockStructure> blocks);
  const std::vector<int>& frozen() const noexcept { return frozen_; }
  void set_frozen(std::vector<int> frozen);

  /// Blocks used for spin bookkeeping: explicit structure or the spin halves.
  BlockStructure effective_blocks() const;

 private:
  void check_index(const OccupationIndex& index) const;

  int n_orbitals_;
  int n_electrons_;
  std::vector<Term> terms_;
  std::optional<BlockStructure> blocks_;
  std::vector<int> frozen_;
};

/// Parses WFN v1 text. Zero-coefficient lines are dropped and reported in
/// `warnings` when given.
CIWaveFunction parse_wavefunction(std::string_view text,
                                  std::vector<std::string>* warnings = nullptr);
/// Canonical WFN v1 text (shortest round-trip coefficient formatting).
std::string serialize_wavefunction(const CIWaveFunction& wf);

CIWaveFunction read_wavefunction_file(const std::string& path,
                                      std::vector<std::string>* warnings = nullptr);
void write_wavefunction_file(const std::string& path, const CIWaveFunction& wf);

/// Shortest decimal text that parses back to the same double.
std::string format_real(double value);

/// All C(M, n) occupation indices in lexicographic order.
std::vector<OccupationIndex> enumerate_determinants(int n_orbitals, int n_electrons);
/// Binomial coefficient as a 64-bit count.
std::size_t binomial(int n, int k);

}  // namespace mindet
