#pragma once

#include <map>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "mindet/blocked.hpp"
#include "mindet/grassmann.hpp"
#include "mindet/newton.hpp"
#include "mindet/wavefunction.hpp"

namespace mindet {

/// Spin-restricted closed-shell CISD wave function over spatial irreps.
/// All orbital indices are block-local and 0-based: occupied i, j < n_G,
/// virtual a, b in [n_G, M_G).
class CISDWaveFunction {
 public:
  /// `dims[G]` spatial orbitals and `occ[G]` doubly occupied ones per irrep.
  CISDWaveFunction(std::vector<int> dims, std::vector<int> occ, double c0 = 1.0);

  int n_irreps() const noexcept { return static_cast<int>(dims_.size()); }
  int dim(int g) const { return dims_.at(static_cast<std::size_t>(g)); }
  int occ(int g) const { return occ_.at(static_cast<std::size_t>(g)); }
  int virt(int g) const { return dim(g) - occ(g); }
  const std::vector<int>& dims() const noexcept { return dims_; }
  const std::vector<int>& occupations() const noexcept { return occ_; }

  double c0() const noexcept { return c0_; }
  void set_c0(double c) { c0_ = c; }

  void set_single(int g, int i, int a, double c);
  /// Same-irrep double, both spins; requires i < j and a < b.
  void set_double(int g, int i, int j, int a, int b, double c);
  /// D_ij^{ab,GG'} with (i, a) in G and (j, b) in G'. For G == G' the partner
  /// (j, b, i, a) is set too; a conflicting partner value throws.
  void set_mixed(int g, int gp, int i, int j, int a, int b, double c);

  double single(int g, int i, int a) const;
  double double_same(int g, int i, int j, int a, int b) const;
  /// D with (i, a) in G and (j, b) in G', any order of G and G'.
  double mixed(int g, int gp, int i, int j, int a, int b) const;

  const std::map<std::tuple<int, int, int>, double>& singles() const noexcept { return singles_; }
  const std::map<std::tuple<int, int, int, int, int>, double>& doubles() const noexcept { return doubles_; }
  /// Keys (G, G', i, j, a, b) with G >= G'; for G == G' both partners are stored.
  const std::map<std::tuple<int, int, int, int, int, int>, double>& mixed_doubles() const noexcept {
    return mixed_;
  }

  /// Spin-orbital structure: alpha dims = beta dims = dims.
  BlockStructure block_structure() const;
  /// Spin-orbital occupations per block (alpha then beta).
  std::vector<int> block_occupations() const;
  int n_spin_orbitals() const;
  int n_electrons() const;

 private:
  void check_single(int g, int i, int a) const;

  std::vector<int> dims_;
  std::vector<int> occ_;
  double c0_;
  std::map<std::tuple<int, int, int>, double> singles_;
  std::map<std::tuple<int, int, int, int, int>, double> doubles_;
  std::map<std::tuple<int, int, int, int, int, int>, double> mixed_;
};

CISDWaveFunction parse_cisd(std::string_view text);
std::string serialize_cisd(const CISDWaveFunction& wf);
CISDWaveFunction read_cisd_file(const std::string& path);
void write_cisd_file(const std::string& path, const CISDWaveFunction& wf);

/// Explicit determinant expansion; mixed-irrep doubles are split as
/// A = split * D (same spin) and B = (1 - split) * D (opposite spin).
CIWaveFunction expand_cisd(const CISDWaveFunction& wf, double split = 0.5);

/// One M_G x n_G block per irrep, shared by both spins.
using RestrictedPoint = std::vector<Matrix>;

RestrictedPoint restricted_reference(const CISDWaveFunction& wf);
BlockedStiefelPoint to_blocked(const RestrictedPoint& u, const CISDWaveFunction& wf);

enum class CisdPath {
  /// Literal intermediates unless some |F_{I_0^G}| < 1e-10.
  Automatic,
  Literal,
  /// Multiplication form of the dressed singles, no division by F_{I_0^G}.
  Guarded,
};

/// Unnormalized f from the CISD intermediates.
double cisd_f(const RestrictedPoint& u, const CISDWaveFunction& wf);

/// Unnormalized restricted Newton system: one block per irrep.
BlockedSystem cisd_assemble(const RestrictedPoint& u, const CISDWaveFunction& wf,
                            CisdPath path = CisdPath::Automatic, EvalCounters* counters = nullptr);

/// Restricted view of a spin-blocked system: J_G = J_{alpha G},
/// H_G^G' = H_{alpha G, alpha G'} + H_{alpha G, beta G'}.
BlockedSystem restrict_spin(const BlockedSystem& unrestricted, int n_irreps);

/// Deviation as blocked_system_deviation for restricted systems.
double restricted_system_deviation(const BlockedSystem& a, const BlockedSystem& b, const RestrictedPoint& u);

/// Norm of the expansion with the even split of mixed doubles.
double cisd_norm(const CISDWaveFunction& wf);

/// Restricted Newton on the CISD fast path (coefficients divided by cisd_norm).
NewtonReport optimize_cisd(const RestrictedPoint& u0, const CISDWaveFunction& wf,
                           const ToleranceOptions& opts = {});

}  // namespace mindet
