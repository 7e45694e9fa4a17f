#pragma once
// Finite graded-commutative dg-algebra models.
//
// A CDGAModel is a finite graded basis with tables for the differential, the
// product, an integration functional supported in the top degree, and
// (optionally) a homotopy operator h with its associated projection.  These
// models stand in for the de Rham algebras of a closed manifold: every axiom
// the kernel relies on (Stokes, Leibniz, graded commutativity, Poincare
// nondegeneracy of the signed pairing) is checkable by finite exact linear
// algebra, and check_model does exactly that.
//
// A RelativePair couples a model X of formal dimension 2n with a model L of
// dimension n through a degree-0 dg-algebra morphism r ("restriction to L").
// The relative subspace consists of the degree-0 elements whose restriction is
// a multiple of the unit together with the positive-degree elements whose
// restriction vanishes; period functionals on relative 2-cochains, one per
// lattice generator, complete the data.
//
// CElem is an element of (L-model) tensor R over the Novikov ring R; the
// product and pairing extend R-bilinearly (R is concentrated in even degrees).

#include <algorithm>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ainfty/linalg.hpp"
#include "ainfty/novikov.hpp"
#include "ainfty/report.hpp"
#include "ainfty/signs.hpp"

namespace ainfty {

// Sparse vector over a model basis.
using Vec = std::map<int, Rat>;

inline void vec_accumulate(Vec& dst, const Vec& src, const Rat& scale = Rat(1)) {
  if (scale == 0) return;
  for (const auto& [i, c] : src) {
    Rat& slot = dst[i];
    slot += scale * c;
    if (slot == 0) dst.erase(i);
  }
}
inline Vec vec_scaled(const Vec& v, const Rat& scale) {
  Vec out;
  vec_accumulate(out, v, scale);
  return out;
}

// ---------------------------------------------------------------------------
// CDGAModel
// ---------------------------------------------------------------------------

struct CDGAModel {
  int n = 0;  // formal dimension
  std::vector<std::string> names;
  std::vector<int> degs;
  int unit = 0;
  std::vector<Vec> d;                  // d[i] = d(e_i)
  std::vector<std::vector<Vec>> mult;  // mult[i][j] = e_i wedge e_j
  std::vector<Rat> integral;           // integral[i] = ∫ e_i
  bool has_h = false;
  std::vector<Vec> h;     // homotopy (degree -1)
  std::vector<Vec> proj;  // projection onto the harmonic complement

  int size() const { return static_cast<int>(names.size()); }
  int deg(int i) const { return degs.at(static_cast<size_t>(i)); }

  Vec apply(const std::vector<Vec>& table, const Vec& v) const {
    Vec out;
    for (const auto& [i, c] : v) vec_accumulate(out, table.at(static_cast<size_t>(i)), c);
    return out;
  }
  Vec dv(const Vec& v) const { return apply(d, v); }
  Vec hv(const Vec& v) const { return apply(h, v); }
  Vec piv(const Vec& v) const { return apply(proj, v); }

  Vec wedge(const Vec& u, const Vec& v) const {
    Vec out;
    for (const auto& [i, ci] : u)
      for (const auto& [j, cj] : v)
        vec_accumulate(out, mult.at(static_cast<size_t>(i)).at(static_cast<size_t>(j)), ci * cj);
    return out;
  }

  Rat integ(const Vec& v) const {
    Rat s = 0;
    for (const auto& [i, c] : v) s += c * integral.at(static_cast<size_t>(i));
    return s;
  }

  // Signed Poincare pairing <u,v> = (-1)^{|v|} ∫ u∧v, extended bilinearly
  // using per-basis degrees.
  Rat pair(const Vec& u, const Vec& v) const {
    Rat s = 0;
    for (const auto& [j, cj] : v) {
      Parity sg = Parity::of(deg(j));
      for (const auto& [i, ci] : u) {
        Rat term = ci * cj * integ(mult.at(static_cast<size_t>(i)).at(static_cast<size_t>(j)));
        s += sg.apply(term);
      }
    }
    return s;
  }

  std::optional<int> deg_of(const Vec& v) const {
    std::optional<int> p;
    for (const auto& [i, c] : v) {
      if (p && *p != deg(i)) return std::nullopt;  // inhomogeneous
      p = deg(i);
    }
    return p;  // nullopt also for zero
  }
  bool is_homogeneous(const Vec& v) const { return v.empty() || deg_of(v).has_value(); }

  std::vector<int> basis_of_degree(int p) const {
    std::vector<int> out;
    for (int i = 0; i < size(); ++i)
      if (deg(i) == p) out.push_back(i);
    return out;
  }
  Vec basis_vec(int i) const { return Vec{{i, Rat(1)}}; }
};

using ModelPtr = std::shared_ptr<const CDGAModel>;

// ---------------------------------------------------------------------------
// Model verification
// ---------------------------------------------------------------------------

inline Report check_model(const CDGAModel& m) {
  Report rep;
  const int N = m.size();

  // Table shapes and basic well-formedness.
  bool shapes = static_cast<int>(m.degs.size()) == N &&
                static_cast<int>(m.d.size()) == N &&
                static_cast<int>(m.mult.size()) == N &&
                static_cast<int>(m.integral.size()) == N && m.unit >= 0 &&
                m.unit < N && N > 0;
  if (shapes)
    for (const auto& row : m.mult) shapes = shapes && static_cast<int>(row.size()) == N;
  if (shapes && m.has_h)
    shapes = static_cast<int>(m.h.size()) == N && static_cast<int>(m.proj.size()) == N;
  if (shapes) {
    std::set<std::string> seen(m.names.begin(), m.names.end());
    shapes = seen.size() == m.names.size();
    for (int i = 0; i < N; ++i) shapes = shapes && m.degs[static_cast<size_t>(i)] >= 0 &&
                                         m.degs[static_cast<size_t>(i)] <= m.n;
    shapes = shapes && m.deg(m.unit) == 0;
  }
  rep.add("basis_wellformed", shapes);
  if (!shapes) return rep;  // the remaining checks assume shapes

  auto vec_eq = [](const Vec& a, const Vec& b) { return a == b; };

  bool ok = true;
  std::string wit;
  for (int i = 0; i < N && ok; ++i)
    if (!m.dv(m.d[static_cast<size_t>(i)]).empty()) { ok = false; wit = m.names[static_cast<size_t>(i)]; }
  rep.add("d_squared_zero", ok, wit);

  ok = true; wit.clear();
  for (int i = 0; i < N && ok; ++i)
    for (const auto& [j, c] : m.d[static_cast<size_t>(i)])
      if (m.deg(j) != m.deg(i) + 1) { ok = false; wit = m.names[static_cast<size_t>(i)]; break; }
  rep.add("d_degree_one", ok, wit);

  ok = true; wit.clear();
  for (int i = 0; i < N && ok; ++i) {
    if (!vec_eq(m.wedge(m.basis_vec(m.unit), m.basis_vec(i)), m.basis_vec(i)) ||
        !vec_eq(m.wedge(m.basis_vec(i), m.basis_vec(m.unit)), m.basis_vec(i))) {
      ok = false; wit = m.names[static_cast<size_t>(i)];
    }
  }
  rep.add("unit_neutral", ok, wit);

  ok = true; wit.clear();
  for (int i = 0; i < N && ok; ++i)
    for (int j = 0; j < N && ok; ++j) {
      for (const auto& [t, c] : m.mult[static_cast<size_t>(i)][static_cast<size_t>(j)])
        if (m.deg(t) != m.deg(i) + m.deg(j)) { ok = false; break; }
      Parity sg = Parity::of(m.deg(i)) * Parity::of(m.deg(j));
      Vec rhs = vec_scaled(m.mult[static_cast<size_t>(j)][static_cast<size_t>(i)], Rat(sg.sign()));
      if (!vec_eq(m.mult[static_cast<size_t>(i)][static_cast<size_t>(j)], rhs)) {
        ok = false; wit = m.names[static_cast<size_t>(i)] + "," + m.names[static_cast<size_t>(j)];
      }
    }
  rep.add("graded_commutative", ok, wit);

  ok = true; wit.clear();
  for (int i = 0; i < N && ok; ++i)
    for (int j = 0; j < N && ok; ++j)
      for (int k = 0; k < N && ok; ++k)
        if (!vec_eq(m.wedge(m.wedge(m.basis_vec(i), m.basis_vec(j)), m.basis_vec(k)),
                    m.wedge(m.basis_vec(i), m.wedge(m.basis_vec(j), m.basis_vec(k))))) {
          ok = false;
          wit = m.names[static_cast<size_t>(i)] + "," + m.names[static_cast<size_t>(j)] + "," + m.names[static_cast<size_t>(k)];
        }
  rep.add("associative", ok, wit);

  ok = true; wit.clear();
  for (int i = 0; i < N && ok; ++i)
    for (int j = 0; j < N && ok; ++j) {
      Vec lhs = m.dv(m.wedge(m.basis_vec(i), m.basis_vec(j)));
      Vec rhs = m.wedge(m.d[static_cast<size_t>(i)], m.basis_vec(j));
      vec_accumulate(rhs, m.wedge(m.basis_vec(i), m.d[static_cast<size_t>(j)]),
                     Rat(Parity::of(m.deg(i)).sign()));
      if (!vec_eq(lhs, rhs)) { ok = false; wit = m.names[static_cast<size_t>(i)] + "," + m.names[static_cast<size_t>(j)]; }
    }
  rep.add("leibniz", ok, wit);

  ok = true; wit.clear();
  for (int i = 0; i < N && ok; ++i)
    if (m.integ(m.d[static_cast<size_t>(i)]) != 0) { ok = false; wit = m.names[static_cast<size_t>(i)]; }
  rep.add("stokes_closed", ok, wit);

  ok = true; wit.clear();
  for (int i = 0; i < N && ok; ++i)
    if (m.deg(i) != m.n && m.integral[static_cast<size_t>(i)] != 0) { ok = false; wit = m.names[static_cast<size_t>(i)]; }
  rep.add("integral_top_support", ok, wit);

  ok = true; wit.clear();
  for (int p = 0; p <= m.n && ok; ++p) {
    auto rowsi = m.basis_of_degree(p), colsj = m.basis_of_degree(m.n - p);
    if (rowsi.size() != colsj.size()) { ok = false; wit = "degree " + std::to_string(p); break; }
    RatMat g(rowsi.size(), RatVec(colsj.size()));
    for (size_t a = 0; a < rowsi.size(); ++a)
      for (size_t b = 0; b < colsj.size(); ++b)
        g[a][b] = m.pair(m.basis_vec(rowsi[a]), m.basis_vec(colsj[b]));
    if (rank(g) != static_cast<int>(rowsi.size())) { ok = false; wit = "degree " + std::to_string(p); }
  }
  rep.add("pairing_nondegenerate", ok, wit);

  if (m.has_h) {
    ok = true; wit.clear();
    for (int i = 0; i < N && ok; ++i) {
      for (const auto& [j, c] : m.h[static_cast<size_t>(i)])
        if (m.deg(j) != m.deg(i) - 1) { ok = false; wit = m.names[static_cast<size_t>(i)]; }
      for (const auto& [j, c] : m.proj[static_cast<size_t>(i)])
        if (m.deg(j) != m.deg(i)) { ok = false; wit = m.names[static_cast<size_t>(i)]; }
    }
    rep.add("homotopy_degrees", ok, wit);

    ok = true; wit.clear();
    for (int i = 0; i < N && ok; ++i) {
      Vec lhs = m.dv(m.h[static_cast<size_t>(i)]);
      vec_accumulate(lhs, m.hv(m.d[static_cast<size_t>(i)]));
      vec_accumulate(lhs, m.proj[static_cast<size_t>(i)]);
      if (!vec_eq(lhs, m.basis_vec(i))) { ok = false; wit = m.names[static_cast<size_t>(i)]; }
    }
    rep.add("homotopy_identity", ok, wit);

    ok = true; wit.clear();
    for (int i = 0; i < N && ok; ++i)
      if (!m.hv(m.h[static_cast<size_t>(i)]).empty()) { ok = false; wit = m.names[static_cast<size_t>(i)]; }
    rep.add("homotopy_square_zero", ok, wit);

    ok = true; wit.clear();
    for (int i = 0; i < N && ok; ++i)
      if (!vec_eq(m.piv(m.proj[static_cast<size_t>(i)]), m.proj[static_cast<size_t>(i)])) { ok = false; wit = m.names[static_cast<size_t>(i)]; }
    rep.add("proj_idempotent", ok, wit);

    ok = true; wit.clear();
    for (int i = 0; i < N && ok; ++i)
      if (!m.dv(m.proj[static_cast<size_t>(i)]).empty()) { ok = false; wit = m.names[static_cast<size_t>(i)]; }
    rep.add("proj_lands_in_kernel", ok, wit);

    ok = true; wit.clear();
    for (int i = 0; i < N && ok; ++i)
      if (!m.piv(m.d[static_cast<size_t>(i)]).empty()) { ok = false; wit = m.names[static_cast<size_t>(i)]; }
    rep.add("proj_kills_exact", ok, wit);

    ok = true; wit.clear();
    for (int i = 0; i < N && ok; ++i)
      if (!m.hv(m.proj[static_cast<size_t>(i)]).empty()) { ok = false; wit = m.names[static_cast<size_t>(i)]; }
    rep.add("h_proj_zero", ok, wit);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Builders
// ---------------------------------------------------------------------------

// Free graded-commutative algebra on odd degree-1 generators, i.e. an exterior
// algebra on subsets of the generators (basis index = generator bitmask),
// with the differential induced from its values on generators via Leibniz.
// The integral picks out the top-subset coefficient scaled by `top_integral`.
// `h_table` (mask -> Vec) specifies the homotopy on basis elements; the
// projection is derived as id - dh - hd.
inline std::shared_ptr<CDGAModel> build_exterior_odd(
    const std::vector<std::string>& gen_names, const std::map<int, Vec>& d_gens,
    const Rat& top_integral, const std::map<int, Vec>& h_table) {
  const int g = static_cast<int>(gen_names.size());
  const int N = 1 << g;
  auto m = std::make_shared<CDGAModel>();
  m->n = g;
  m->unit = 0;
  for (int mask = 0; mask < N; ++mask) {
    std::string nm;
    for (int b = 0; b < g; ++b)
      if (mask & (1 << b)) nm += gen_names[static_cast<size_t>(b)];
    m->names.push_back(mask == 0 ? "1" : nm);
    m->degs.push_back(__builtin_popcount(static_cast<unsigned>(mask)));
  }
  // Products: disjoint masks with the permutation sign of merging.
  m->mult.assign(static_cast<size_t>(N), std::vector<Vec>(static_cast<size_t>(N)));
  for (int s = 0; s < N; ++s)
    for (int t = 0; t < N; ++t) {
      if (s & t) continue;  // repeated odd generator
      long inv = 0;
      for (int b = 0; b < g; ++b)
        if (t & (1 << b)) inv += __builtin_popcount(static_cast<unsigned>(s) >> (b + 1));
      m->mult[static_cast<size_t>(s)][static_cast<size_t>(t)][s | t] = Parity::of(inv).apply(Rat(1));
    }
  // Differential by the Leibniz rule.
  m->d.assign(static_cast<size_t>(N), Vec{});
  for (int s = 0; s < N; ++s) {
    int pos = 0;  // position of the generator within the increasing subset
    for (int b = 0; b < g; ++b) {
      if (!(s & (1 << b))) continue;
      auto it = d_gens.find(1 << b);
      if (it != d_gens.end()) {
        int left = s & ((1 << b) - 1), right = s & ~((1 << b) - 1) & ~(1 << b);
        Vec part = m->wedge(m->basis_vec(left), m->wedge(it->second, m->basis_vec(right)));
        vec_accumulate(m->d[static_cast<size_t>(s)], part, Parity::of(pos).apply(Rat(1)));
      }
      ++pos;
    }
  }
  m->integral.assign(static_cast<size_t>(N), Rat(0));
  m->integral[static_cast<size_t>(N - 1)] = top_integral;
  // Homotopy and derived projection.
  m->has_h = true;
  m->h.assign(static_cast<size_t>(N), Vec{});
  for (const auto& [mask, img] : h_table) m->h.at(static_cast<size_t>(mask)) = img;
  m->proj.assign(static_cast<size_t>(N), Vec{});
  for (int i = 0; i < N; ++i) {
    Vec p = m->basis_vec(i);
    vec_accumulate(p, m->dv(m->h[static_cast<size_t>(i)]), Rat(-1));
    vec_accumulate(p, m->hv(m->d[static_cast<size_t>(i)]), Rat(-1));
    m->proj[static_cast<size_t>(i)] = p;
  }
  return m;
}

// Circle: basis 1, theta; d = 0; ∫theta = 1.
inline std::shared_ptr<CDGAModel> build_circle() {
  return build_exterior_odd({"theta"}, {}, Rat(1), {});
}

// Two-torus (harmonic forms): basis 1, theta1, theta2, theta1 theta2;
// d = 0; ∫ theta1 theta2 = 1.
inline std::shared_ptr<CDGAModel> build_torus2() {
  return build_exterior_odd({"theta1", "theta2"}, {}, Rat(1), {});
}

// A four-dimensional nilmanifold model: generators x, y, z, w of degree 1
// with dz = xy and dx = dy = dw = 0; ∫ xyzw = 1.  The homotopy contracts the
// two exact directions: h(xy) = z, h(xyw) = zw.  Its degree-2 cohomology has
// rank 4 (classes xz, yz, xw, yw) while xy is exact, which is what the
// obstruction-theory instances need: nonzero periods on non-exact classes.
inline std::shared_ptr<CDGAModel> build_nilmanifold4() {
  const int X = 1, Y = 2, Z = 4, W = 8;
  std::map<int, Vec> dg;
  dg[Z] = Vec{{X | Y, Rat(1)}};
  std::map<int, Vec> ht;
  ht[X | Y] = Vec{{Z, Rat(1)}};
  ht[X | Y | W] = Vec{{Z | W, Rat(1)}};
  return build_exterior_odd({"x", "y", "z", "w"}, dg, Rat(1), ht);
}

// A two-sphere-like model: basis 1 and a degree-2 class v with v∧v = 0
// (formal dimension 2), d = 0, ∫ v = 1.
inline std::shared_ptr<CDGAModel> build_sphere2() {
  auto m = std::make_shared<CDGAModel>();
  m->n = 2;
  m->names = {"1", "v"};
  m->degs = {0, 2};
  m->unit = 0;
  m->d.assign(2, Vec{});
  m->mult.assign(2, std::vector<Vec>(2));
  m->mult[0][0] = Vec{{0, Rat(1)}};
  m->mult[0][1] = Vec{{1, Rat(1)}};
  m->mult[1][0] = Vec{{1, Rat(1)}};
  // v∧v lives above the top degree: zero.
  m->integral = {Rat(0), Rat(1)};
  m->has_h = true;
  m->h.assign(2, Vec{});
  m->proj = {Vec{{0, Rat(1)}}, Vec{{1, Rat(1)}}};
  return m;
}

// ---------------------------------------------------------------------------
// RelativePair
// ---------------------------------------------------------------------------

struct RelativePair {
  ModelPtr X;  // ambient model, formal dimension 2n
  ModelPtr L;  // boundary model, dimension n
  std::vector<Vec> r;           // restriction X -> L on the X basis
  std::vector<RatVec> periods;  // periods[gen][X-basis index], degree-2 support

  Vec restrict(const Vec& xv) const {
    Vec out;
    for (const auto& [i, c] : xv) vec_accumulate(out, r.at(static_cast<size_t>(i)), c);
    return out;
  }

  // Relative = degree-0 part restricts to a multiple of the unit, and every
  // positive-degree part restricts to zero.
  bool is_relative(const Vec& xv) const {
    Vec deg0, pos;
    for (const auto& [i, c] : xv) (X->deg(i) == 0 ? deg0 : pos)[i] = c;
    if (!restrict(pos).empty()) return false;
    Vec r0 = restrict(deg0);
    for (const auto& [j, c] : r0)
      if (j != L->unit) return false;
    return true;
  }

  // Pairing of a lattice element with a closed relative 2-cochain.
  Rat period(const Beta& beta, const Vec& gamma) const {
    if (beta.size() != periods.size())
      throw std::invalid_argument("period: lattice element of wrong rank");
    if (!is_relative(gamma)) throw std::invalid_argument("period: cochain is not relative");
    for (const auto& [i, c] : gamma)
      if (X->deg(i) != 2) throw std::invalid_argument("period: cochain is not of degree 2");
    if (!X->dv(gamma).empty()) throw std::invalid_argument("period: cochain is not closed");
    Rat s = 0;
    for (size_t gidx = 0; gidx < periods.size(); ++gidx) {
      if (beta[gidx] == 0) continue;
      Rat v = 0;
      for (const auto& [i, c] : gamma) v += c * periods[gidx].at(static_cast<size_t>(i));
      s += beta[gidx] * v;
    }
    return s;
  }

  // Basis of the relative subspace in one degree, as X-vectors.
  std::vector<Vec> relative_basis(int degree) const {
    std::vector<int> idx = X->basis_of_degree(degree);
    if (idx.empty()) return {};
    // Rows = constraints: each L-basis coordinate of the restriction must
    // vanish (for degree 0, each coordinate other than the unit's).
    std::vector<int> lconstraints;
    for (int j = 0; j < L->size(); ++j)
      if (degree != 0 || j != L->unit) lconstraints.push_back(j);
    RatMat a(lconstraints.size(), RatVec(idx.size(), Rat(0)));
    for (size_t col = 0; col < idx.size(); ++col) {
      const Vec& ri = r.at(static_cast<size_t>(idx[col]));
      for (size_t row = 0; row < lconstraints.size(); ++row) {
        auto it = ri.find(lconstraints[row]);
        if (it != ri.end()) a[row][col] = it->second;
      }
    }
    std::vector<Vec> out;
    for (const RatVec& x : nullspace(a)) {
      Vec v;
      for (size_t col = 0; col < idx.size(); ++col)
        if (x[col] != 0) v[idx[col]] = x[col];
      out.push_back(std::move(v));
    }
    return out;
  }
};

inline Report check_relative_pair(const RelativePair& rp) {
  Report rep;
  const CDGAModel& X = *rp.X;
  const CDGAModel& L = *rp.L;
  rep.add("dimension_doubling", X.n == 2 * L.n,
          X.n == 2 * L.n ? "" : "dim X != 2 dim L");
  bool shapes = static_cast<int>(rp.r.size()) == X.size();
  for (const auto& pf : rp.periods) shapes = shapes && static_cast<int>(pf.size()) == X.size();
  rep.add("tables_wellformed", shapes);
  if (!shapes) return rep;

  bool ok = true;
  std::string wit;
  for (int i = 0; i < X.size() && ok; ++i)
    for (const auto& [j, c] : rp.r[static_cast<size_t>(i)])
      if (L.deg(j) != X.deg(i)) { ok = false; wit = X.names[static_cast<size_t>(i)]; }
  rep.add("r_degree_zero", ok, wit);

  rep.add("r_unit", rp.r[static_cast<size_t>(X.unit)] == Vec{{L.unit, Rat(1)}});

  ok = true; wit.clear();
  for (int i = 0; i < X.size() && ok; ++i)
    for (int j = 0; j < X.size() && ok; ++j) {
      Vec lhs = rp.restrict(X.wedge(X.basis_vec(i), X.basis_vec(j)));
      Vec rhs = L.wedge(rp.r[static_cast<size_t>(i)], rp.r[static_cast<size_t>(j)]);
      if (lhs != rhs) { ok = false; wit = X.names[static_cast<size_t>(i)] + "," + X.names[static_cast<size_t>(j)]; }
    }
  rep.add("r_multiplicative", ok, wit);

  ok = true; wit.clear();
  for (int i = 0; i < X.size() && ok; ++i) {
    Vec lhs = rp.restrict(X.d[static_cast<size_t>(i)]);
    Vec rhs = L.dv(rp.r[static_cast<size_t>(i)]);
    if (lhs != rhs) { ok = false; wit = X.names[static_cast<size_t>(i)]; }
  }
  rep.add("r_chain_map", ok, wit);

  ok = true; wit.clear();
  for (int p = 0; p <= X.n && ok; ++p)
    for (const Vec& v : rp.relative_basis(p))
      if (!rp.is_relative(X.dv(v))) { ok = false; wit = "degree " + std::to_string(p); }
  rep.add("relative_d_closed", ok, wit);

  ok = true; wit.clear();
  for (size_t gidx = 0; gidx < rp.periods.size() && ok; ++gidx)
    for (int i = 0; i < X.size(); ++i)
      if (X.deg(i) != 2 && rp.periods[gidx][static_cast<size_t>(i)] != 0) {
        ok = false; wit = "generator " + std::to_string(gidx);
      }
  rep.add("periods_degree2_support", ok, wit);

  ok = true; wit.clear();
  for (const Vec& eta : rp.relative_basis(1)) {
    Vec de = X.dv(eta);
    for (size_t gidx = 0; gidx < rp.periods.size(); ++gidx) {
      Rat v = 0;
      for (const auto& [i, c] : de) v += c * rp.periods[gidx][static_cast<size_t>(i)];
      if (v != 0) { ok = false; wit = "generator " + std::to_string(gidx); }
    }
  }
  rep.add("periods_kill_exact", ok, wit);
  return rep;
}

// ---------------------------------------------------------------------------
// CElem: (model) tensor R
// ---------------------------------------------------------------------------

class CElem {
 public:
  CElem(ModelPtr model, RingContextPtr rctx)
      : model_(std::move(model)), rctx_(std::move(rctx)) {}

  static CElem from_form(ModelPtr model, RingContextPtr rctx, const Vec& v) {
    CElem e(std::move(model), std::move(rctx));
    for (const auto& [i, c] : v) e.set(i, c * RingElem::one(e.rctx_));
    return e;
  }
  static CElem monomial(ModelPtr model, RingContextPtr rctx, int basis, RingElem r) {
    CElem e(std::move(model), std::move(rctx));
    e.set(basis, std::move(r));
    return e;
  }

  const ModelPtr& model() const { return model_; }
  const RingContextPtr& rctx() const { return rctx_; }
  const std::map<int, RingElem>& components() const { return c_; }
  RingElem coefficient(int i) const {
    auto it = c_.find(i);
    return it == c_.end() ? RingElem::zero(rctx_) : it->second;
  }

  bool is_zero() const { return c_.empty(); }
  bool truncated() const {
    for (const auto& [i, r] : c_)
      if (r.truncated()) return true;
    return false;
  }

  void set(int i, RingElem r) {
    if (r.is_zero() && !r.truncated()) { c_.erase(i); return; }
    if (r.is_zero()) { trunc_note_ = true; c_.erase(i); return; }
    c_.insert_or_assign(i, std::move(r));
  }
  // Whether some coefficient was dropped entirely by truncation.
  bool truncation_noted() const { return trunc_note_ || truncated(); }

  friend CElem operator+(const CElem& x, const CElem& y) {
    x.require_compatible(y);
    CElem out = x;
    out.trunc_note_ = x.trunc_note_ || y.trunc_note_;
    for (const auto& [i, r] : y.c_) out.set(i, out.coefficient(i) + r);
    return out;
  }
  friend CElem operator-(const CElem& x) {
    CElem out(x.model_, x.rctx_);
    out.trunc_note_ = x.trunc_note_;
    for (const auto& [i, r] : x.c_) out.c_.emplace(i, -r);
    return out;
  }
  friend CElem operator-(const CElem& x, const CElem& y) { return x + (-y); }
  friend CElem operator*(const Rat& s, const CElem& x) {
    CElem out(x.model_, x.rctx_);
    out.trunc_note_ = x.trunc_note_;
    if (s == 0) return out;
    for (const auto& [i, r] : x.c_) out.c_.emplace(i, s * r);
    return out;
  }
  // Ring scalars are even, so no Koszul sign is involved.
  CElem ring_scaled(const RingElem& s) const {
    CElem out(model_, rctx_);
    out.trunc_note_ = trunc_note_;
    for (const auto& [i, r] : c_) out.set(i, s * r);
    return out;
  }

  friend CElem wedge(const CElem& x, const CElem& y) {
    x.require_compatible(y);
    CElem out(x.model_, x.rctx_);
    out.trunc_note_ = x.trunc_note_ || y.trunc_note_;
    for (const auto& [i, ri] : x.c_)
      for (const auto& [j, rj] : y.c_) {
        RingElem rij = ri * rj;
        for (const auto& [t, c] : x.model_->mult.at(static_cast<size_t>(i)).at(static_cast<size_t>(j)))
          out.set(t, out.coefficient(t) + c * rij);
      }
    return out;
  }

  CElem d() const {
    CElem out(model_, rctx_);
    out.trunc_note_ = trunc_note_;
    for (const auto& [i, r] : c_)
      for (const auto& [j, c] : model_->d.at(static_cast<size_t>(i)))
        out.set(j, out.coefficient(j) + c * r);
    return out;
  }

  friend RingElem pairing(const CElem& x, const CElem& y) {
    x.require_compatible(y);
    RingElem out = RingElem::zero(x.rctx_);
    for (const auto& [j, rj] : y.c_) {
      Parity sg = Parity::of(x.model_->deg(j));
      for (const auto& [i, ri] : x.c_) {
        Rat w = x.model_->integ(x.model_->mult.at(static_cast<size_t>(i)).at(static_cast<size_t>(j)));
        if (w != 0) out = out + sg.apply(w) * (ri * rj);
      }
    }
    return out;
  }

  std::optional<Rat> valuation() const {
    std::optional<Rat> v;
    for (const auto& [i, r] : c_) {
      auto vr = r.valuation();
      if (vr && (!v || *vr < *v)) v = vr;
    }
    return v;
  }

  // Total degrees (form degree + ring grade) present in this element.
  std::set<long> total_degrees() const {
    std::set<long> out;
    for (const auto& [i, r] : c_)
      for (const auto& [k, c] : r.terms())
        out.insert(model_->deg(i) + rctx_->grade(k.beta, k.t));
    return out;
  }
  bool is_degc_homogeneous() const { return total_degrees().size() <= 1; }
  // Projection onto one total degree.
  CElem degc_component(long degree) const {
    CElem out(model_, rctx_);
    for (const auto& [i, r] : c_) {
      RingElem keep = RingElem::zero(rctx_);
      for (const auto& [k, c] : r.terms())
        if (model_->deg(i) + rctx_->grade(k.beta, k.t) == degree)
          keep = keep + RingElem::monomial(rctx_, k.beta, k.t, c);
      out.set(i, keep);
    }
    return out;
  }
  // Projection onto one form degree (the L-grading only).
  CElem form_component(int degree) const {
    CElem out(model_, rctx_);
    for (const auto& [i, r] : c_)
      if (model_->deg(i) == degree) out.set(i, r);
    return out;
  }

  friend bool operator==(const CElem& x, const CElem& y) {
    return x.model_ == y.model_ && same_context(x.rctx_, y.rctx_) && x.c_ == y.c_;
  }

 private:
  void require_compatible(const CElem& y) const {
    if (model_ != y.model_ || !same_context(rctx_, y.rctx_))
      throw std::invalid_argument("CElem: mismatched model or ring context");
  }

  ModelPtr model_;
  RingContextPtr rctx_;
  std::map<int, RingElem> c_;
  bool trunc_note_ = false;  // a coefficient vanished entirely below the cutoff
};

}  // namespace ainfty
