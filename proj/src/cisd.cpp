#include "mindet/cisd.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "text_scanner.hpp"

namespace mindet {

CISDWaveFunction::CISDWaveFunction(std::vector<int> dims, std::vector<int> occ, double c0)
    : dims_(std::move(dims)), occ_(std::move(occ)), c0_(c0) {
  if (dims_.size() != occ_.size()) throw std::invalid_argument("CISD: dims and occupations differ in length");
  if (dims_.empty()) throw std::invalid_argument("CISD: no irreps");
  for (std::size_t g = 0; g < dims_.size(); ++g)
    if (dims_[g] < 0 || occ_[g] < 0 || occ_[g] > dims_[g])
      throw std::invalid_argument("CISD: invalid occupation for irrep " + std::to_string(g + 1));
}

void CISDWaveFunction::check_single(int g, int i, int a) const {
  if (g < 0 || g >= n_irreps()) throw std::out_of_range("CISD: irrep out of range");
  if (i < 0 || i >= occ(g)) throw std::out_of_range("CISD: occupied index out of range");
  if (a < occ(g) || a >= dim(g)) throw std::out_of_range("CISD: virtual index out of range");
}

void CISDWaveFunction::set_single(int g, int i, int a, double c) {
  check_single(g, i, a);
  singles_[{g, i, a}] = c;
}

void CISDWaveFunction::set_double(int g, int i, int j, int a, int b, double c) {
  check_single(g, i, a);
  check_single(g, j, b);
  if (!(i < j && a < b)) throw std::invalid_argument("CISD: same-irrep double needs i < j and a < b");
  doubles_[{g, i, j, a, b}] = c;
}

void CISDWaveFunction::set_mixed(int g, int gp, int i, int j, int a, int b, double c) {
  check_single(g, i, a);
  check_single(gp, j, b);
  if (g < gp) {
    std::swap(g, gp);
    std::swap(i, j);
    std::swap(a, b);
  }
  if (g == gp) {
    auto it = mixed_.find({g, g, j, i, b, a});
    if (it != mixed_.end() && (j != i || b != a) && it->second != c)
      throw std::invalid_argument("CISD: same-irrep mixed double conflicts with its spin partner");
    mixed_[{g, g, j, i, b, a}] = c;
  }
  mixed_[{g, gp, i, j, a, b}] = c;
}

double CISDWaveFunction::single(int g, int i, int a) const {
  auto it = singles_.find({g, i, a});
  return it == singles_.end() ? 0.0 : it->second;
}

double CISDWaveFunction::double_same(int g, int i, int j, int a, int b) const {
  auto it = doubles_.find({g, i, j, a, b});
  return it == doubles_.end() ? 0.0 : it->second;
}

double CISDWaveFunction::mixed(int g, int gp, int i, int j, int a, int b) const {
  if (g < gp) {
    std::swap(g, gp);
    std::swap(i, j);
    std::swap(a, b);
  }
  auto it = mixed_.find({g, gp, i, j, a, b});
  return it == mixed_.end() ? 0.0 : it->second;
}

BlockStructure CISDWaveFunction::block_structure() const { return BlockStructure{dims_, dims_}; }

std::vector<int> CISDWaveFunction::block_occupations() const {
  std::vector<int> out = occ_;
  out.insert(out.end(), occ_.begin(), occ_.end());
  return out;
}

int CISDWaveFunction::n_spin_orbitals() const {
  int m = 0;
  for (int d : dims_) m += d;
  return 2 * m;
}

int CISDWaveFunction::n_electrons() const {
  int n = 0;
  for (int o : occ_) n += o;
  return 2 * n;
}

// ---------------------------------------------------------------------------
// CISD v1 text format

namespace {

std::vector<int> int_list(const detail::Record& rec, std::size_t from) {
  std::vector<int> out;
  for (std::size_t k = from; k < rec.tokens.size(); ++k) out.push_back(detail::to_int(rec.tokens[k], rec.line));
  return out;
}

void expect_count(const detail::Record& rec, std::size_t n) {
  if (rec.tokens.size() != n)
    throw ParseError(rec.line, "record '" + rec.tokens[0] + "' expects " + std::to_string(n - 1) + " fields");
}

}  // namespace

CISDWaveFunction parse_cisd(std::string_view text) {
  detail::LineScanner scan(text);
  auto header = scan.next_record();
  if (!header || header->tokens.size() != 2 || header->tokens[0] != "CISD" || header->tokens[1] != "1")
    throw ParseError(header ? header->line : 1, "expected header 'CISD 1'");
  const int norb = scan.keyed_int("norb");
  const int nelec = scan.keyed_int("nelec");

  auto blocks = scan.next_record();
  if (!blocks || blocks->tokens[0] != "blocks") throw ParseError(scan.line(), "expected 'blocks g d_1 .. d_g'");
  const std::vector<int> bl = int_list(*blocks, 1);
  if (bl.empty() || bl[0] < 1 || static_cast<int>(bl.size()) != bl[0] + 1)
    throw ParseError(blocks->line, "blocks: count does not match the number of dimensions");
  std::vector<int> dims(bl.begin() + 1, bl.end());

  auto occl = scan.next_record();
  if (!occl || occl->tokens[0] != "occ") throw ParseError(scan.line(), "expected 'occ n_1 .. n_g'");
  std::vector<int> occ = int_list(*occl, 1);
  if (occ.size() != dims.size()) throw ParseError(occl->line, "occ: one entry per irrep expected");

  int msum = 0, nsum = 0;
  for (std::size_t g = 0; g < dims.size(); ++g) {
    if (dims[g] < 0 || occ[g] < 0 || occ[g] > dims[g])
      throw ParseError(occl->line, "occ: invalid occupation for irrep " + std::to_string(g + 1));
    msum += dims[g];
    nsum += occ[g];
  }
  if (msum != norb) throw ParseError(blocks->line, "blocks: dimensions do not sum to norb");
  if (2 * nsum != nelec) throw ParseError(occl->line, "occ: doubly occupied orbitals do not match nelec");

  CISDWaveFunction wf(dims, occ, 0.0);
  bool have_ref = false;
  const int g = static_cast<int>(dims.size());
  auto irrep = [&](const detail::Record& rec, std::size_t k) {
    const int v = detail::to_int(rec.tokens[k], rec.line);
    if (v < 1 || v > g) throw ParseError(rec.line, "irrep out of range");
    return v - 1;
  };
  auto occupied = [&](const detail::Record& rec, std::size_t k, int irr) {
    const int v = detail::to_int(rec.tokens[k], rec.line);
    if (v < 1 || v > occ[static_cast<std::size_t>(irr)]) throw ParseError(rec.line, "occupied index out of range");
    return v - 1;
  };
  auto virtual_ = [&](const detail::Record& rec, std::size_t k, int irr) {
    const int v = detail::to_int(rec.tokens[k], rec.line);
    const auto u = static_cast<std::size_t>(irr);
    if (v <= occ[u] || v > dims[u]) throw ParseError(rec.line, "virtual index out of range");
    return v - 1;
  };

  while (auto rec = scan.next_record()) {
    const std::string& kind = rec->tokens[0];
    if (kind == "ref") {
      expect_count(*rec, 2);
      if (have_ref) throw ParseError(rec->line, "duplicate 'ref' record");
      wf.set_c0(detail::to_real(rec->tokens[1], rec->line));
      have_ref = true;
    } else if (kind == "s") {
      expect_count(*rec, 5);
      const int gg = irrep(*rec, 1);
      const int i = occupied(*rec, 2, gg), a = virtual_(*rec, 3, gg);
      if (wf.singles().count({gg, i, a})) throw ParseError(rec->line, "duplicate single");
      wf.set_single(gg, i, a, detail::to_real(rec->tokens[4], rec->line));
    } else if (kind == "d") {
      expect_count(*rec, 7);
      const int gg = irrep(*rec, 1);
      const int i = occupied(*rec, 2, gg), j = occupied(*rec, 3, gg);
      const int a = virtual_(*rec, 4, gg), b = virtual_(*rec, 5, gg);
      if (!(i < j && a < b)) throw ParseError(rec->line, "same-irrep double needs i < j and a < b");
      if (wf.doubles().count({gg, i, j, a, b})) throw ParseError(rec->line, "duplicate double");
      wf.set_double(gg, i, j, a, b, detail::to_real(rec->tokens[6], rec->line));
    } else if (kind == "dm") {
      expect_count(*rec, 8);
      const int g1 = irrep(*rec, 1), g2 = irrep(*rec, 2);
      if (g1 < g2) throw ParseError(rec->line, "mixed double needs the first irrep >= the second");
      const int i = occupied(*rec, 3, g1), j = occupied(*rec, 4, g2);
      const int a = virtual_(*rec, 5, g1), b = virtual_(*rec, 6, g2);
      const double c = detail::to_real(rec->tokens[7], rec->line);
      if (wf.mixed_doubles().count({g1, g2, i, j, a, b})) {
        const double old = wf.mixed(g1, g2, i, j, a, b);
        if (g1 != g2 || old != c) throw ParseError(rec->line, "duplicate mixed double");
        continue;
      }
      try {
        wf.set_mixed(g1, g2, i, j, a, b, c);
      } catch (const std::invalid_argument& e) {
        throw ParseError(rec->line, e.what());
      }
    } else {
      throw ParseError(rec->line, "unknown record '" + kind + "'");
    }
  }
  if (!have_ref) throw ParseError(scan.line(), "missing 'ref' record");
  return wf;
}

std::string serialize_cisd(const CISDWaveFunction& wf) {
  std::ostringstream out;
  int m = 0, n = 0;
  for (int g = 0; g < wf.n_irreps(); ++g) {
    m += wf.dim(g);
    n += 2 * wf.occ(g);
  }
  out << "CISD 1\nnorb " << m << "\nnelec " << n << "\nblocks " << wf.n_irreps();
  for (int d : wf.dims()) out << ' ' << d;
  out << "\nocc";
  for (int o : wf.occupations()) out << ' ' << o;
  out << "\nref " << format_real(wf.c0()) << '\n';
  for (const auto& [k, c] : wf.singles()) {
    const auto [g, i, a] = k;
    out << "s " << g + 1 << ' ' << i + 1 << ' ' << a + 1 << ' ' << format_real(c) << '\n';
  }
  for (const auto& [k, c] : wf.doubles()) {
    const auto [g, i, j, a, b] = k;
    out << "d " << g + 1 << ' ' << i + 1 << ' ' << j + 1 << ' ' << a + 1 << ' ' << b + 1 << ' ' << format_real(c)
        << '\n';
  }
  for (const auto& [k, c] : wf.mixed_doubles()) {
    const auto [g, gp, i, j, a, b] = k;
    if (g == gp && std::make_pair(i, a) > std::make_pair(j, b)) continue;
    out << "dm " << g + 1 << ' ' << gp + 1 << ' ' << i + 1 << ' ' << j + 1 << ' ' << a + 1 << ' ' << b + 1 << ' '
        << format_real(c) << '\n';
  }
  return out.str();
}

CISDWaveFunction read_cisd_file(const std::string& path) { return parse_cisd(detail::slurp(path)); }

void write_cisd_file(const std::string& path, const CISDWaveFunction& wf) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << serialize_cisd(wf);
}

// ---------------------------------------------------------------------------
// expansion

namespace {

/// Block-local orbital lists for the 2g spin blocks; reference everywhere.
std::vector<std::vector<int>> reference_parts(const CISDWaveFunction& wf) {
  std::vector<std::vector<int>> parts;
  for (int s = 0; s < 2; ++s)
    for (int g = 0; g < wf.n_irreps(); ++g) {
      std::vector<int> p;
      for (int k = 0; k < wf.occ(g); ++k) p.push_back(k);
      parts.push_back(std::move(p));
    }
  return parts;
}

void excite(std::vector<int>& part, int i, int a) {
  for (int& p : part)
    if (p == i) p = a;
}

/// Replaces holes by particles in place, then sorts; coefficients refer to the
/// ascending determinant so the sorting sign is not applied.
OccupationIndex global_index(const CISDWaveFunction& wf, std::vector<std::vector<int>> parts) {
  const BlockStructure bs = wf.block_structure();
  std::vector<int> all;
  for (int b = 0; b < bs.n_blocks(); ++b) {
    auto& p = parts[static_cast<std::size_t>(b)];
    std::sort(p.begin(), p.end());
    for (int x : p) all.push_back(bs.offset(b) + x);
  }
  return OccupationIndex(std::move(all));
}

}  // namespace

CIWaveFunction expand_cisd(const CISDWaveFunction& wf, double split) {
  const int g = wf.n_irreps();
  CIWaveFunction out(wf.n_spin_orbitals(), wf.n_electrons());
  out.set_block_structure(wf.block_structure());
  const auto ref = reference_parts(wf);
  auto put = [&](const std::vector<std::vector<int>>& parts, double c) {
    if (c != 0.0) out.add(global_index(wf, parts), c);
  };
  put(ref, wf.c0());
  for (const auto& [k, c] : wf.singles()) {
    const auto [gg, i, a] = k;
    for (int s = 0; s < 2; ++s) {
      auto p = ref;
      excite(p[static_cast<std::size_t>(s * g + gg)], i, a);
      put(p, c);
    }
  }
  for (const auto& [k, c] : wf.doubles()) {
    const auto [gg, i, j, a, b] = k;
    for (int s = 0; s < 2; ++s) {
      auto p = ref;
      auto& blk = p[static_cast<std::size_t>(s * g + gg)];
      excite(blk, i, a);
      excite(blk, j, b);
      put(p, c);
    }
  }
  for (const auto& [k, c] : wf.mixed_doubles()) {
    const auto [g1, g2, i, j, a, b] = k;
    if (g1 == g2) {
      auto p = ref;
      excite(p[static_cast<std::size_t>(g1)], i, a);
      excite(p[static_cast<std::size_t>(g + g1)], j, b);
      put(p, c);
      continue;
    }
    for (int s = 0; s < 2; ++s) {
      auto p = ref;
      excite(p[static_cast<std::size_t>(s * g + g1)], i, a);
      excite(p[static_cast<std::size_t>(s * g + g2)], j, b);
      put(p, split * c);
    }
    {
      auto p = ref;
      excite(p[static_cast<std::size_t>(g + g1)], i, a);
      excite(p[static_cast<std::size_t>(g2)], j, b);
      put(p, (1.0 - split) * c);
    }
    {
      auto p = ref;
      excite(p[static_cast<std::size_t>(g1)], i, a);
      excite(p[static_cast<std::size_t>(g + g2)], j, b);
      put(p, (1.0 - split) * c);
    }
  }
  return out;
}

RestrictedPoint restricted_reference(const CISDWaveFunction& wf) {
  RestrictedPoint u;
  for (int g = 0; g < wf.n_irreps(); ++g) u.push_back(Matrix::Identity(wf.dim(g), wf.occ(g)));
  return u;
}

BlockedStiefelPoint to_blocked(const RestrictedPoint& u, const CISDWaveFunction& wf) {
  std::vector<Matrix> blocks = u;
  blocks.insert(blocks.end(), u.begin(), u.end());
  return BlockedStiefelPoint(wf.block_structure(), std::move(blocks));
}

// ---------------------------------------------------------------------------
// intermediates

namespace {

Vector flat(const Matrix& g) { return Eigen::Map<const Vector>(g.data(), g.size()); }
Matrix outer(const Matrix& a, const Matrix& b) { return flat(a) * flat(b).transpose(); }

/// Kernels and accumulators of one irrep. Singles are indexed ia = i * v + (a - o).
struct Irrep {
  int m = 0, o = 0, v = 0;
  Matrix u;
  double F0 = 1.0;
  Matrix G0, H0;
  Vector Fs;
  std::vector<Matrix> Gs, Hs, Ghat;
  Vector C;
  /// sum_{i<j, a<b} C F_ijab
  double double_overlap = 0.0;
  /// Accumulators without the dressed-singles part.
  Matrix M_base, G_base, H_base;

  int ns() const { return o * v; }
  int ia(int i, int a) const { return i * v + (a - o); }
};

struct Context {
  const CISDWaveFunction& wf;
  int g;
  std::vector<Irrep> ir;
  /// D[x][y]: (i,a) in x by (j,b) in y.
  std::vector<std::vector<Matrix>> D;
  std::vector<double> L;
  std::vector<std::vector<double>> K;

  /// prod over irreps not in `excluded` of F0^2.
  double F0prod(std::initializer_list<int> excluded) const {
    double p = 1.0;
    for (int x = 0; x < g; ++x) {
      bool skip = false;
      for (int e : excluded) skip = skip || (e == x);
      if (!skip) p *= ir[static_cast<std::size_t>(x)].F0 * ir[static_cast<std::size_t>(x)].F0;
    }
    return p;
  }
  /// S^{y}_{ia} for (i,a) in x: sum_{(j,b) in y} F_jb D.
  Vector S(int x, int y) const {
    return D[static_cast<std::size_t>(x)][static_cast<std::size_t>(y)] * ir[static_cast<std::size_t>(y)].Fs;
  }
};

Context build_context(const RestrictedPoint& u, const CISDWaveFunction& wf, bool with_hessian,
                      EvalCounters* counters) {
  const int g = wf.n_irreps();
  if (static_cast<int>(u.size()) != g) throw std::invalid_argument("CISD: one block per irrep expected");
  Context ctx{wf, g, {}, {}, {}, {}};
  EvalCounters cnt;
  for (int x = 0; x < g; ++x) {
    Irrep r;
    r.m = wf.dim(x);
    r.o = wf.occ(x);
    r.v = r.m - r.o;
    r.u = u[static_cast<std::size_t>(x)];
    if (r.u.rows() != r.m || r.u.cols() != r.o) throw std::invalid_argument("CISD: block shape mismatch");
    if (r.o == 0) {
      r.F0 = 1.0;
      r.G0 = Matrix::Zero(r.m, 0);
      r.H0 = Matrix::Zero(0, 0);
    } else {
      DeterminantKernels k = compute_kernels(r.u, OccupationIndex::lowest(r.o), with_hessian, KernelMode::Adjugate, &cnt);
      r.F0 = k.F;
      r.G0 = std::move(k.G);
      r.H0 = std::move(k.Htilde);
    }
    r.Fs = Vector::Zero(r.ns());
    r.C = Vector::Zero(r.ns());
    r.Gs.resize(static_cast<std::size_t>(r.ns()));
    r.Hs.resize(static_cast<std::size_t>(r.ns()));
    r.Ghat.resize(static_cast<std::size_t>(r.ns()));
    for (int i = 0; i < r.o; ++i)
      for (int a = r.o; a < r.m; ++a) {
        const int s = r.ia(i, a);
        DeterminantKernels k =
            compute_kernels(r.u, single_excitation(r.o, i, a), with_hessian, KernelMode::Adjugate, &cnt);
        r.Fs(s) = k.F;
        r.Gs[static_cast<std::size_t>(s)] = std::move(k.G);
        r.Hs[static_cast<std::size_t>(s)] = std::move(k.Htilde);
        r.Ghat[static_cast<std::size_t>(s)] = r.F0 * r.Gs[static_cast<std::size_t>(s)] + r.Fs(s) * r.G0;
        r.C(s) = wf.single(x, i, a);
      }
    r.M_base = wf.c0() * r.F0 * r.G0;
    if (with_hessian) {
      r.G_base = wf.c0() * outer(r.G0, r.G0);
      r.H_base = wf.c0() * r.F0 * r.H0;
    }
    ctx.ir.push_back(std::move(r));
  }

  ctx.D.assign(static_cast<std::size_t>(g), std::vector<Matrix>(static_cast<std::size_t>(g)));
  for (int x = 0; x < g; ++x)
    for (int y = 0; y < g; ++y)
      ctx.D[static_cast<std::size_t>(x)][static_cast<std::size_t>(y)] =
          Matrix::Zero(ctx.ir[static_cast<std::size_t>(x)].ns(), ctx.ir[static_cast<std::size_t>(y)].ns());
  for (const auto& [k, c] : wf.mixed_doubles()) {
    const auto [x, y, i, j, a, b] = k;
    const int r = ctx.ir[static_cast<std::size_t>(x)].ia(i, a);
    const int s = ctx.ir[static_cast<std::size_t>(y)].ia(j, b);
    ctx.D[static_cast<std::size_t>(x)][static_cast<std::size_t>(y)](r, s) = c;
    ctx.D[static_cast<std::size_t>(y)][static_cast<std::size_t>(x)](s, r) = c;
  }

  // same-irrep doubles are streamed: F, G and H tilde used once
  for (const auto& [k, c] : wf.doubles()) {
    const auto [x, i, j, a, b] = k;
    Irrep& r = ctx.ir[static_cast<std::size_t>(x)];
    const OccupationIndex idx = double_excitation(r.o, i, j, a, b);
    if (!with_hessian) {
      const double f = compute_F(r.u, idx, &cnt);
      r.double_overlap += c * f;
      continue;
    }
    DeterminantKernels kd = compute_kernels(r.u, idx, true, KernelMode::Adjugate, &cnt);
    r.double_overlap += c * kd.F;
    r.M_base += c * (r.F0 * kd.G + kd.F * r.G0);
    r.G_base += c * (outer(r.G0, kd.G) + outer(kd.G, r.G0));
    r.H_base += c * (r.F0 * kd.Htilde + kd.F * r.H0);
  }

  // same-irrep mixed doubles (alpha i->a with beta j->b)
  for (int x = 0; x < g; ++x) {
    Irrep& r = ctx.ir[static_cast<std::size_t>(x)];
    if (r.ns() == 0 || !with_hessian) continue;
    const Matrix& dxx = ctx.D[static_cast<std::size_t>(x)][static_cast<std::size_t>(x)];
    const Vector w = dxx.transpose() * r.Fs;
    for (int s = 0; s < r.ns(); ++s) {
      if (w(s) == 0.0) continue;
      r.M_base += w(s) * r.Gs[static_cast<std::size_t>(s)];
      r.H_base += w(s) * r.Hs[static_cast<std::size_t>(s)];
    }
    for (int s = 0; s < r.ns(); ++s)
      for (int t = 0; t < r.ns(); ++t)
        if (dxx(s, t) != 0.0)
          r.G_base += dxx(s, t) * outer(r.Gs[static_cast<std::size_t>(s)], r.Gs[static_cast<std::size_t>(t)]);
  }

  ctx.L.assign(static_cast<std::size_t>(g), 0.0);
  ctx.K.assign(static_cast<std::size_t>(g), std::vector<double>(static_cast<std::size_t>(g), 0.0));
  for (int x = 0; x < g; ++x) {
    const Irrep& r = ctx.ir[static_cast<std::size_t>(x)];
    const Matrix& dxx = ctx.D[static_cast<std::size_t>(x)][static_cast<std::size_t>(x)];
    ctx.L[static_cast<std::size_t>(x)] =
        2.0 * r.F0 * (r.C.dot(r.Fs) + r.double_overlap) + r.Fs.dot(dxx * r.Fs);
    for (int y = 0; y < g; ++y) {
      if (y == x) continue;
      const Irrep& q = ctx.ir[static_cast<std::size_t>(y)];
      ctx.K[static_cast<std::size_t>(x)][static_cast<std::size_t>(y)] =
          2.0 * r.F0 * q.F0 * r.Fs.dot(ctx.D[static_cast<std::size_t>(x)][static_cast<std::size_t>(y)] * q.Fs);
    }
  }
  if (counters) *counters += cnt;
  return ctx;
}

double f_from_context(const Context& ctx) {
  double f = ctx.wf.c0() * ctx.F0prod({});
  for (int x = 0; x < ctx.g; ++x) f += ctx.F0prod({x}) * ctx.L[static_cast<std::size_t>(x)];
  for (int x = 0; x < ctx.g; ++x)
    for (int y = 0; y < x; ++y) f += ctx.F0prod({x, y}) * ctx.K[static_cast<std::size_t>(x)][static_cast<std::size_t>(y)];
  return f;
}

Matrix weighted(const std::vector<Matrix>& ms, const Vector& w, Eigen::Index rows, Eigen::Index cols) {
  Matrix out = Matrix::Zero(rows, cols);
  for (std::size_t s = 0; s < ms.size(); ++s)
    if (w(static_cast<Eigen::Index>(s)) != 0.0) out += w(static_cast<Eigen::Index>(s)) * ms[s];
  return out;
}

/// Singles parts of the outer-product and Hessian accumulators for weights w.
void singles_GH(const Irrep& r, const Vector& w, Matrix& gpart, Matrix& hpart) {
  const Eigen::Index d = static_cast<Eigen::Index>(r.m) * r.o;
  gpart = Matrix::Zero(d, d);
  hpart = Matrix::Zero(d, d);
  for (int s = 0; s < r.ns(); ++s) {
    if (w(s) == 0.0) continue;
    const Matrix& gs = r.Gs[static_cast<std::size_t>(s)];
    gpart += w(s) * (outer(gs, r.G0) + outer(r.G0, gs));
    hpart += w(s) * (r.F0 * r.Hs[static_cast<std::size_t>(s)] + r.Fs(s) * r.H0);
  }
}

}  // namespace

double cisd_f(const RestrictedPoint& u, const CISDWaveFunction& wf) {
  return f_from_context(build_context(u, wf, false, nullptr));
}

BlockedSystem cisd_assemble(const RestrictedPoint& u, const CISDWaveFunction& wf, CisdPath path,
                            EvalCounters* counters) {
  const Context ctx = build_context(u, wf, true, counters);
  const int g = ctx.g;
  if (path == CisdPath::Automatic) {
    path = CisdPath::Literal;
    for (const auto& r : ctx.ir)
      if (std::abs(r.F0) < 1e-10) path = CisdPath::Guarded;
  }
  const bool literal = path == CisdPath::Literal;
  auto IR = [&](int x) -> const Irrep& { return ctx.ir[static_cast<std::size_t>(x)]; };
  auto Kx = [&](int x, int y) { return ctx.K[static_cast<std::size_t>(x)][static_cast<std::size_t>(y)]; };

  BlockedSystem sys;
  sys.f = f_from_context(ctx);
  sys.jacobian.resize(static_cast<std::size_t>(g));
  sys.hessian.assign(static_cast<std::size_t>(g), std::vector<Matrix>(static_cast<std::size_t>(g)));

  std::vector<Matrix> proj(static_cast<std::size_t>(g)), hproj(static_cast<std::size_t>(g));
  for (int x = 0; x < g; ++x) {
    const Irrep& r = IR(x);
    proj[static_cast<std::size_t>(x)] = Matrix::Identity(r.m, r.m) - r.u * r.u.transpose();
    hproj[static_cast<std::size_t>(x)] = horizontal_projector(r.u);
  }

  // S[x][y] = sum_{(j,b) in y} F_jb D^{xy}
  std::vector<std::vector<Vector>> S(static_cast<std::size_t>(g), std::vector<Vector>(static_cast<std::size_t>(g)));
  for (int x = 0; x < g; ++x)
    for (int y = 0; y < g; ++y) S[static_cast<std::size_t>(x)][static_cast<std::size_t>(y)] = ctx.S(x, y);
  auto Sx = [&](int x, int y) -> const Vector& { return S[static_cast<std::size_t>(x)][static_cast<std::size_t>(y)]; };

  // literal dressed singles and script-M
  std::vector<Vector> cbar(static_cast<std::size_t>(g));
  std::vector<Matrix> script_m(static_cast<std::size_t>(g));
  if (literal)
    for (int x = 0; x < g; ++x) {
      const Irrep& r = IR(x);
      Vector c = r.C;
      for (int y = 0; y < g; ++y)
        if (y != x) c += (1.0 / IR(y).F0) * Sx(x, y);
      cbar[static_cast<std::size_t>(x)] = c;
      script_m[static_cast<std::size_t>(x)] = r.M_base + weighted(r.Ghat, c, r.m, r.o);
    }

  for (int x = 0; x < g; ++x) {
    const Irrep& r = IR(x);
    const auto ux = static_cast<std::size_t>(x);
    const double fx = ctx.F0prod({x});
    double xw = 0.0;
    for (int y = 0; y < g; ++y) {
      if (y == x) continue;
      xw += ctx.F0prod({x, y}) * ctx.L[static_cast<std::size_t>(y)];
      for (int z = 0; z < y; ++z)
        if (z != x) xw += ctx.F0prod({x, y, z}) * Kx(y, z);
    }

    Matrix fm;  // F0^x M^x
    Matrix gpart, hpart;
    if (literal) {
      fm = fx * script_m[ux];
      singles_GH(r, cbar[ux], gpart, hpart);
      gpart = fx * (r.G_base + gpart);
      hpart = fx * (r.H_base + hpart);
    } else {
      Vector w = fx * r.C;
      for (int y = 0; y < g; ++y)
        if (y != x) w += IR(y).F0 * ctx.F0prod({x, y}) * Sx(x, y);
      fm = fx * r.M_base + weighted(r.Ghat, w, r.m, r.o);
      singles_GH(r, w, gpart, hpart);
      gpart += fx * r.G_base;
      hpart += fx * r.H_base;
    }
    sys.jacobian[ux] = proj[ux] * (fm + xw * r.F0 * r.G0);
    sys.hessian[ux][ux] =
        hproj[ux] * (hpart + gpart * hproj[ux] + xw * (r.F0 * r.H0 + outer(r.G0, proj[ux] * r.G0)));
  }

  for (int x = 0; x < g; ++x)
    for (int y = 0; y < g; ++y) {
      if (x == y) continue;
      const Irrep& r = IR(x);
      const Irrep& q = IR(y);
      const auto ux = static_cast<std::size_t>(x), uy = static_cast<std::size_t>(y);
      const double fxy = ctx.F0prod({x, y});

      // F0^{xy} F0_y M^x and F0^{xy} F0_x M^y
      auto m_term = [&](int a, int b) -> Matrix {
        const Irrep& ra = IR(a);
        if (literal) return fxy * IR(b).F0 * script_m[static_cast<std::size_t>(a)];
        Vector w = fxy * IR(b).F0 * ra.C + fxy * Sx(a, b);
        for (int z = 0; z < g; ++z)
          if (z != a && z != b) w += IR(b).F0 * IR(z).F0 * ctx.F0prod({a, b, z}) * Sx(a, z);
        return fxy * IR(b).F0 * ra.M_base + weighted(ra.Ghat, w, ra.m, ra.o);
      };
      const Matrix mx = m_term(x, y);
      const Matrix my = m_term(y, x);

      Matrix inner = outer(mx, q.G0) + outer(r.G0, my);
      const Matrix& dxy = ctx.D[ux][uy];
      Matrix hat_pairs = Matrix::Zero(r.u.size(), q.u.size());
      for (int s = 0; s < r.ns(); ++s)
        for (int t = 0; t < q.ns(); ++t)
          if (dxy(s, t) != 0.0)
            hat_pairs += dxy(s, t) * outer(r.Ghat[static_cast<std::size_t>(s)], q.Ghat[static_cast<std::size_t>(t)]);
      inner += fxy * 0.5 * hat_pairs;
      inner -= fxy * outer(weighted(r.Ghat, Sx(x, y), r.m, r.o), q.G0);
      inner -= fxy * outer(r.G0, weighted(q.Ghat, Sx(y, x), q.m, q.o));

      double scal = -wf.c0() * fxy;
      for (int z = 0; z < g; ++z) {
        if (z == x || z == y) continue;
        scal += ctx.F0prod({x, y, z}) * ctx.L[static_cast<std::size_t>(z)];
        for (int t = 0; t < z; ++t)
          if (t != x && t != y) scal += ctx.F0prod({x, y, z, t}) * Kx(z, t);
      }
      inner += scal * r.F0 * q.F0 * outer(r.G0, q.G0);
      sys.hessian[ux][uy] = 2.0 * hproj[ux] * inner * hproj[uy];
    }
  return sys;
}

BlockedSystem restrict_spin(const BlockedSystem& unrestricted, int n_irreps) {
  BlockedSystem out;
  out.f = unrestricted.f;
  const auto g = static_cast<std::size_t>(n_irreps);
  if (unrestricted.jacobian.size() != 2 * g) throw std::invalid_argument("restrict_spin: expected 2g blocks");
  out.jacobian.assign(unrestricted.jacobian.begin(), unrestricted.jacobian.begin() + static_cast<long>(g));
  out.hessian.assign(g, std::vector<Matrix>(g));
  for (std::size_t x = 0; x < g; ++x)
    for (std::size_t y = 0; y < g; ++y) out.hessian[x][y] = unrestricted.hessian[x][y] + unrestricted.hessian[x][g + y];
  return out;
}

double restricted_system_deviation(const BlockedSystem& a, const BlockedSystem& b, const RestrictedPoint& u) {
  double dev = std::abs(a.f - b.f);
  for (std::size_t x = 0; x < u.size(); ++x) {
    if (a.jacobian[x].size() > 0) dev = std::max(dev, (a.jacobian[x] - b.jacobian[x]).cwiseAbs().maxCoeff());
    for (std::size_t y = 0; y < u.size(); ++y) {
      if (a.hessian[x][y].size() == 0) continue;
      const Matrix hp = horizontal_projector(u[y]);
      dev = std::max(dev, ((a.hessian[x][y] - b.hessian[x][y]) * hp).cwiseAbs().maxCoeff());
    }
  }
  return dev;
}

double cisd_norm(const CISDWaveFunction& wf) { return expand_cisd(wf, 0.5).norm(); }

NewtonReport optimize_cisd(const RestrictedPoint& u0, const CISDWaveFunction& wf, const ToleranceOptions& opts) {
  const double scale = 1.0 / cisd_norm(wf);
  return newton_on_blocks(
      u0,
      [&](const std::vector<Matrix>& bl, EvalCounters* cnt) {
        BlockedSystem sys = cisd_assemble(bl, wf, CisdPath::Automatic, cnt);
        sys.f *= scale;
        for (auto& j : sys.jacobian) j *= scale;
        for (auto& row : sys.hessian)
          for (auto& h : row) h *= scale;
        return sys;
      },
      [&](const std::vector<Matrix>& bl) { return to_blocked(bl, wf).assemble().matrix(); }, opts, "newton-cisd");
}

}  // namespace mindet
