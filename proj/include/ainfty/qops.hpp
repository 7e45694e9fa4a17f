#pragma once
// Correlator data and the q-operator layer.
//
// CorrelatorData abstracts the moduli push-forwards: for each lattice element
// beta within the energy cutoff it stores multilinear tensors
//   disk channel   q^beta_{k,l} : (L-basis)^k x (X-basis)^l -> L-model   (k >= 0)
//   scalar channel q^beta_{-1,l}: (X-basis)^l -> rationals
//   sphere channel q^beta_{@,l} : (X-basis)^l -> X-model
// indexed by basis tuples.  Stored values are the raw push-forward tensors;
// the operator dressing sign epsilon is applied at evaluation time, in exactly
// one place.  The energy-zero (beta = 0) channel is definitional — never
// stored — and evaluates to the pinned table
//   q^0_{1,0} = d,  q^0_{2,0}(a1,a2) = (-1)^{|a1|} a1^a2,
//   q^0_{0,1}(g) = (-1)^{|g|+1} g|_L,  all other (k,l) = 0,
//   q^0_{-1,l} = 0,  sphere q^0_{@,2}(g1,g2) = g1^g2 and 0 for other arities
// (constant spheres: with two inputs the moduli space is the ambient space
// and the push-forward is the identity).
// Tensors absent beyond the truncation bounds (K_max, L_max, cutoff E) are
// treated as zero, consistently here and in the generator.
//
// The checkers in this header work at the data level: the structure relations
// per (beta, k, l) with the gluing signs, the k = -1 relations against the
// sphere channel, the chain-map law, well-formedness (degree laws, interior
// symmetry), and the directly-checkable operator axioms (unit, fundamental
// class, divisor, energy zero, top degree, cyclicity).

#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ainfty/model.hpp"
#include "ainfty/novikov.hpp"
#include "ainfty/report.hpp"
#include "ainfty/signs.hpp"

namespace ainfty {

using Tuple = std::vector<int>;

struct DiskKey {
  Beta beta;
  int k = 0;
  int l = 0;
  friend auto operator<=>(const DiskKey&, const DiskKey&) = default;
};
struct IntKey {  // key for the k = -1 and sphere channels
  Beta beta;
  int l = 0;
  friend auto operator<=>(const IntKey&, const IntKey&) = default;
};

inline std::string beta_str(const Beta& b) {
  std::string s = "(";
  for (size_t i = 0; i < b.size(); ++i) s += (i ? "," : "") + std::to_string(b[i]);
  return s + ")";
}
inline std::string tuple_str(const Tuple& t) {
  std::string s = "[";
  for (size_t i = 0; i < t.size(); ++i) s += (i ? "," : "") + std::to_string(t[i]);
  return s + "]";
}

struct CorrelatorData {
  RingContextPtr rctx;
  ModelPtr L;
  ModelPtr X;
  RelativePair rel;  // rel.X == X, rel.L == L
  int K_max = 0;
  int L_max = 0;

  std::map<DiskKey, std::map<Tuple, Vec>> disk;    // k >= 0, values in L
  std::map<IntKey, std::map<Tuple, Rat>> minus1;   // k = -1, scalar values
  bool has_sphere = false;
  std::map<IntKey, std::map<Tuple, Vec>> sphere;   // values in X
  int gw_sign = +1;  // recorded sign of the sphere term in the k = -1 relation

  int n() const { return L->n; }
  bool is_beta_zero(const Beta& b) const {
    for (int c : b)
      if (c != 0) return false;
    return true;
  }
};

// All lattice elements with energy <= bound, in lexicographic order.
inline std::vector<Beta> enumerate_betas(const RingContext& ctx, const Rat& bound) {
  std::vector<Beta> out;
  Beta cur(static_cast<size_t>(ctx.rank()), 0);
  std::function<void(int, Rat)> rec = [&](int pos, Rat used) {
    if (pos == ctx.rank()) {
      out.push_back(cur);
      return;
    }
    const Rat& w = ctx.generators()[static_cast<size_t>(pos)].omega;
    for (int c = 0;; ++c) {
      Rat next = used + c * w;
      if (next > bound) break;
      cur[static_cast<size_t>(pos)] = c;
      rec(pos + 1, next);
    }
    cur[static_cast<size_t>(pos)] = 0;
  };
  rec(0, Rat(0));
  return out;
}

// All index tuples of the given length over [0, basis_size), lexicographic.
inline std::vector<Tuple> enumerate_tuples(int length, int basis_size) {
  std::vector<Tuple> out;
  Tuple cur(static_cast<size_t>(length), 0);
  if (length == 0) {
    out.push_back(cur);
    return out;
  }
  for (;;) {
    out.push_back(cur);
    int pos = length - 1;
    while (pos >= 0 && cur[static_cast<size_t>(pos)] == basis_size - 1) {
      cur[static_cast<size_t>(pos)] = 0;
      --pos;
    }
    if (pos < 0) break;
    ++cur[static_cast<size_t>(pos)];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Evaluation (rational core)
// ---------------------------------------------------------------------------

// Raw sparse contraction of a stored tensor against model-vector inputs,
// with a per-basis-tuple sign callback (parity as a function of the tuple).
// The k boundary inputs come first in the tuple, then the l interior inputs.
template <class Value>
inline void contract_tensor(const std::map<Tuple, Value>& tensor,
                            const std::vector<Vec>& alphas,
                            const std::vector<Vec>& gammas,
                            const std::function<Parity(const Tuple&)>& sign_of,
                            const std::function<void(const Value&, const Rat&)>& emit) {
  const size_t k = alphas.size(), l = gammas.size();
  for (const auto& [key, value] : tensor) {
    Rat coeff(1);
    bool dead = false;
    for (size_t j = 0; j < k + l && !dead; ++j) {
      const Vec& input = j < k ? alphas[j] : gammas[j - k];
      auto it = input.find(key[j]);
      if (it == input.end()) dead = true;
      else coeff *= it->second;
    }
    if (dead || coeff == 0) continue;
    emit(value, sign_of(key).apply(coeff));
  }
}

// Dressed disk operator for k >= 0 on model vectors (rational coefficients).
// beta = 0 is definitional; otherwise the stored raw tensor is contracted and
// the sign (-1)^{epsilon(alpha;gamma)} is applied per basis combination.
inline Vec eval_q_vec(const CorrelatorData& D, const Beta& beta, int k, int l,
                      const std::vector<Vec>& alphas, const std::vector<Vec>& gammas) {
  if (k < 0 || static_cast<int>(alphas.size()) != k || static_cast<int>(gammas.size()) != l)
    throw std::invalid_argument("eval_q_vec: arity mismatch");
  Vec out;
  if (D.is_beta_zero(beta)) {
    if (k == 1 && l == 0) return D.L->dv(alphas[0]);
    if (k == 2 && l == 0) {
      for (const auto& [i, c] : alphas[0]) {
        Parity sg = Parity::of(D.L->deg(i));
        vec_accumulate(out, D.L->wedge(D.L->basis_vec(i), alphas[1]), sg.apply(c));
      }
      return out;
    }
    if (k == 0 && l == 1) {
      for (const auto& [i, c] : gammas[0]) {
        Parity sg = Parity::of(D.X->deg(i) + 1);
        vec_accumulate(out, D.rel.r.at(static_cast<size_t>(i)), sg.apply(c));
      }
      return out;
    }
    return out;  // all other energy-zero disk operators vanish
  }
  auto it = D.disk.find(DiskKey{beta, k, l});
  if (it == D.disk.end()) return out;  // absent tensors are zero
  const int nn = D.n();
  auto sign_of = [&](const Tuple& key) {
    std::vector<int> ad(static_cast<size_t>(k)), gd(static_cast<size_t>(l));
    for (int j = 0; j < k; ++j) ad[static_cast<size_t>(j)] = D.L->deg(key[static_cast<size_t>(j)]);
    for (int j = 0; j < l; ++j) gd[static_cast<size_t>(j)] = D.X->deg(key[static_cast<size_t>(k + j)]);
    return epsilon(ad, gd, nn);
  };
  contract_tensor<Vec>(it->second, alphas, gammas, sign_of,
                       [&](const Vec& v, const Rat& c) { vec_accumulate(out, v, c); });
  return out;
}

// Dressed k = -1 operator: scalar-valued, sign epsilon(gamma) = sum|g|+n+1.
inline Rat eval_q_minus1_rat(const CorrelatorData& D, const Beta& beta, int l,
                             const std::vector<Vec>& gammas) {
  if (static_cast<int>(gammas.size()) != l)
    throw std::invalid_argument("eval_q_minus1_rat: arity mismatch");
  if (D.is_beta_zero(beta)) return Rat(0);
  auto it = D.minus1.find(IntKey{beta, l});
  Rat out(0);
  if (it == D.minus1.end()) return out;
  const int nn = D.n();
  auto sign_of = [&](const Tuple& key) {
    std::vector<int> gd(static_cast<size_t>(l));
    for (int j = 0; j < l; ++j) gd[static_cast<size_t>(j)] = D.X->deg(key[static_cast<size_t>(j)]);
    return epsilon_minus1(gd, nn);
  };
  contract_tensor<Rat>(it->second, {}, gammas, sign_of,
                       [&](const Rat& v, const Rat& c) { out += v * c; });
  return out;
}

// Sphere operator: X-valued, no dressing sign.
inline Vec eval_q_sphere_vec(const CorrelatorData& D, const Beta& beta, int l,
                             const std::vector<Vec>& gammas) {
  if (static_cast<int>(gammas.size()) != l)
    throw std::invalid_argument("eval_q_sphere_vec: arity mismatch");
  Vec out;
  if (D.is_beta_zero(beta)) {
    // Definitional channel: constant spheres.  With two inputs the moduli
    // space is the ambient space itself and evaluation is the identity, so
    // the operator is the wedge product; every other arity has a positive
    // fiber dimension and the push-forward vanishes.
    if (l == 2) out = D.X->wedge(gammas[0], gammas[1]);
    return out;
  }
  auto it = D.sphere.find(IntKey{beta, l});
  if (it == D.sphere.end()) return out;
  auto sign_of = [&](const Tuple&) { return Parity::even(); };
  contract_tensor<Vec>(it->second, {}, gammas, sign_of,
                       [&](const Vec& v, const Rat& c) { vec_accumulate(out, v, c); });
  return out;
}

// ---------------------------------------------------------------------------
// Evaluation (ring coefficients)
// ---------------------------------------------------------------------------

// Multilinear extension to ring-coefficient elements.  Ring grades are even,
// so coefficients move through the operators without Koszul signs; the spatial
// part reduces to eval_q_vec per combination of model-basis components.
inline CElem eval_q(const CorrelatorData& D, const Beta& beta, int k, int l,
                    const std::vector<CElem>& alphas, const std::vector<CElem>& gammas) {
  if (static_cast<int>(alphas.size()) != k || static_cast<int>(gammas.size()) != l)
    throw std::invalid_argument("eval_q: arity mismatch");
  CElem out(D.L, D.rctx);
  // Odometer over components of every input.
  std::vector<std::vector<std::pair<int, RingElem>>> comps;
  for (const CElem& a : alphas) {
    if (a.model() != D.L) throw std::invalid_argument("eval_q: boundary input on wrong model");
    comps.emplace_back(a.components().begin(), a.components().end());
  }
  for (const CElem& g : gammas) {
    if (g.model() != D.X) throw std::invalid_argument("eval_q: interior input on wrong model");
    comps.emplace_back(g.components().begin(), g.components().end());
  }
  std::vector<size_t> pos(comps.size(), 0);
  for (const auto& c : comps)
    if (c.empty()) return out;
  for (;;) {
    RingElem coeff = RingElem::one(D.rctx);
    std::vector<Vec> av, gv;
    for (size_t j = 0; j < comps.size(); ++j) {
      const auto& [idx, r] = comps[j][pos[j]];
      coeff = coeff * r;
      (j < static_cast<size_t>(k) ? av : gv).push_back(Vec{{idx, Rat(1)}});
    }
    if (!(coeff.is_zero() && !coeff.truncated())) {
      Vec spatial = eval_q_vec(D, beta, k, l, av, gv);
      for (const auto& [i, c] : spatial) out.set(i, out.coefficient(i) + c * coeff);
    }
    size_t j = comps.size();
    for (;;) {
      if (j == 0) return out;
      --j;
      if (++pos[j] < comps[j].size()) break;
      pos[j] = 0;
    }
  }
}

inline RingElem eval_q_minus1(const CorrelatorData& D, const Beta& beta, int l,
                              const std::vector<CElem>& gammas) {
  RingElem out = RingElem::zero(D.rctx);
  std::vector<std::vector<std::pair<int, RingElem>>> comps;
  for (const CElem& g : gammas) comps.emplace_back(g.components().begin(), g.components().end());
  for (const auto& c : comps)
    if (c.empty()) return out;
  std::vector<size_t> pos(comps.size(), 0);
  for (;;) {
    RingElem coeff = RingElem::one(D.rctx);
    std::vector<Vec> gv;
    for (size_t j = 0; j < comps.size(); ++j) {
      const auto& [idx, r] = comps[j][pos[j]];
      coeff = coeff * r;
      gv.push_back(Vec{{idx, Rat(1)}});
    }
    Rat s = eval_q_minus1_rat(D, beta, l, gv);
    if (s != 0) out = out + s * coeff;
    size_t j = comps.size();
    for (;;) {
      if (j == 0) return out;
      --j;
      if (++pos[j] < comps[j].size()) break;
      pos[j] = 0;
    }
  }
}

// ---------------------------------------------------------------------------
// Well-formedness: bounds, degree laws, interior symmetry
// ---------------------------------------------------------------------------

inline Report check_data_wellformed(const CorrelatorData& D) {
  Report rep;
  const RingContext& rc = *D.rctx;
  const Rat& E = rc.cutoff();

  bool ok = true;
  std::string wit;
  auto check_key = [&](const Beta& beta, int k, int l, const char* chan) {
    rc.check_beta(beta);
    if (D.is_beta_zero(beta)) { ok = false; wit = std::string(chan) + " stores an energy-zero tensor"; }
    else if (rc.omega(beta) > E) { ok = false; wit = std::string(chan) + " beta=" + beta_str(beta) + " beyond cutoff"; }
    else if (k > D.K_max || l > D.L_max || l < 0) { ok = false; wit = std::string(chan) + " (k,l) out of bounds"; }
  };
  for (const auto& [key, t] : D.disk) check_key(key.beta, key.k, key.l, "disk");
  for (const auto& [key, t] : D.minus1) check_key(key.beta, 0, key.l, "minus1");
  for (const auto& [key, t] : D.sphere) check_key(key.beta, 0, key.l, "sphere");
  rep.add("channel_bounds", ok, wit);

  // Tuple shapes and basis ranges.
  ok = true; wit.clear();
  auto check_tuple = [&](const Tuple& tup, int k, int l) {
    if (static_cast<int>(tup.size()) != k + l) return false;
    for (int j = 0; j < k; ++j)
      if (tup[static_cast<size_t>(j)] < 0 || tup[static_cast<size_t>(j)] >= D.L->size()) return false;
    for (int j = 0; j < l; ++j)
      if (tup[static_cast<size_t>(k + j)] < 0 || tup[static_cast<size_t>(k + j)] >= D.X->size()) return false;
    return true;
  };
  for (const auto& [key, t] : D.disk)
    for (const auto& [tup, v] : t)
      if (!check_tuple(tup, key.k, key.l)) { ok = false; wit = "disk " + tuple_str(tup); }
  for (const auto& [key, t] : D.minus1)
    for (const auto& [tup, v] : t)
      if (!check_tuple(tup, 0, key.l)) { ok = false; wit = "minus1 " + tuple_str(tup); }
  for (const auto& [key, t] : D.sphere)
    for (const auto& [tup, v] : t)
      if (!check_tuple(tup, 0, key.l)) { ok = false; wit = "sphere " + tuple_str(tup); }
  rep.add("tuple_shapes", ok, wit);
  if (!rep.all_pass()) return rep;

  // Degree laws.  Disk k >= 0: value degree = sum|a| + sum|g| - mu(beta) - k - 2l + 2.
  ok = true; wit.clear();
  for (const auto& [key, t] : D.disk) {
    long mu = rc.maslov(key.beta);
    for (const auto& [tup, v] : t) {
      long want = -mu - key.k - 2 * key.l + 2;
      for (int j = 0; j < key.k; ++j) want += D.L->deg(tup[static_cast<size_t>(j)]);
      for (int j = 0; j < key.l; ++j) want += D.X->deg(tup[static_cast<size_t>(key.k + j)]);
      for (const auto& [i, c] : v)
        if (D.L->deg(i) != want) {
          ok = false;
          wit = "disk beta=" + beta_str(key.beta) + " k=" + std::to_string(key.k) +
                " l=" + std::to_string(key.l) + " " + tuple_str(tup);
        }
    }
  }
  rep.add("degree_law_disk", ok, wit);

  // k = -1: a nonzero scalar requires sum|g| = n + mu(beta) + 2l - 3.
  ok = true; wit.clear();
  for (const auto& [key, t] : D.minus1) {
    long mu = rc.maslov(key.beta);
    for (const auto& [tup, v] : t) {
      if (v == 0) continue;
      long have = 0;
      for (int j = 0; j < key.l; ++j) have += D.X->deg(tup[static_cast<size_t>(j)]);
      if (have != D.n() + mu + 2 * key.l - 3) {
        ok = false;
        wit = "minus1 beta=" + beta_str(key.beta) + " l=" + std::to_string(key.l) + " " + tuple_str(tup);
      }
    }
  }
  rep.add("degree_law_minus1", ok, wit);

  // Sphere: value degree = sum|g| - mu(beta) - 2l + 4.
  ok = true; wit.clear();
  for (const auto& [key, t] : D.sphere) {
    long mu = rc.maslov(key.beta);
    for (const auto& [tup, v] : t) {
      long want = -mu - 2 * key.l + 4;
      for (int j = 0; j < key.l; ++j) want += D.X->deg(tup[static_cast<size_t>(j)]);
      for (const auto& [i, c] : v)
        if (D.X->deg(i) != want) {
          ok = false;
          wit = "sphere beta=" + beta_str(key.beta) + " l=" + std::to_string(key.l) + " " + tuple_str(tup);
        }
    }
  }
  rep.add("degree_law_sphere", ok, wit);

  // Koszul symmetry in the interior slots: swapping adjacent interior inputs
  // multiplies the raw tensor by (-1)^{|g_j||g_{j+1}|}.
  ok = true; wit.clear();
  for (const auto& [key, t] : D.disk) {
    Vec zero;
    for (const auto& [tup, v] : t)
      for (int j = 0; j + 1 < key.l; ++j) {
        Tuple swapped = tup;
        std::swap(swapped[static_cast<size_t>(key.k + j)], swapped[static_cast<size_t>(key.k + j + 1)]);
        Parity sg = Parity::of(D.X->deg(tup[static_cast<size_t>(key.k + j)])) *
                    Parity::of(D.X->deg(tup[static_cast<size_t>(key.k + j + 1)]));
        auto other = t.find(swapped);
        Vec expected = vec_scaled(v, Rat(sg.sign()));
        Vec actual = other == t.end() ? zero : other->second;
        if (actual != expected) { ok = false; wit = "disk " + tuple_str(tup); }
      }
  }
  for (const auto& [key, t] : D.minus1)
    for (const auto& [tup, v] : t)
      for (int j = 0; j + 1 < key.l; ++j) {
        Tuple swapped = tup;
        std::swap(swapped[static_cast<size_t>(j)], swapped[static_cast<size_t>(j + 1)]);
        Parity sg = Parity::of(D.X->deg(tup[static_cast<size_t>(j)])) *
                    Parity::of(D.X->deg(tup[static_cast<size_t>(j + 1)]));
        auto other = t.find(swapped);
        Rat expected = sg.apply(v);
        Rat actual = other == t.end() ? Rat(0) : other->second;
        if (actual != expected) { ok = false; wit = "minus1 " + tuple_str(tup); }
      }
  for (const auto& [key, t] : D.sphere)
    for (const auto& [tup, v] : t)
      for (int j = 0; j + 1 < key.l; ++j) {
        Tuple swapped = tup;
        std::swap(swapped[static_cast<size_t>(j)], swapped[static_cast<size_t>(j + 1)]);
        Parity sg = Parity::of(D.X->deg(tup[static_cast<size_t>(j)])) *
                    Parity::of(D.X->deg(tup[static_cast<size_t>(j + 1)]));
        auto other = t.find(swapped);
        Vec expected = vec_scaled(v, Rat(sg.sign()));
        Vec actual = other == t.end() ? Vec{} : other->second;
        if (actual != expected) { ok = false; wit = "sphere " + tuple_str(tup); }
      }
  rep.add("interior_koszul_symmetry", ok, wit);
  rep.add("gw_sign_valid", D.gw_sign == 1 || D.gw_sign == -1);
  return rep;
}

// ---------------------------------------------------------------------------
// Structure relations
// ---------------------------------------------------------------------------

// Residual of the structure relation at (beta, k, l) on one basis tuple:
//   sum_j (-1)^{sum_{m<j}|g_m|} q_{k,l}(a; g_1..dg_j..g_l)
// + sum_{partitions, splits, beta1+beta2=beta} (-1)^{iota}
//     q_{k1,|I|}(a-prefix, q_{k2,|J|}(a-mid; g_J), a-suffix; g_I).
inline Vec q_relation_residual(const CorrelatorData& D, const Beta& beta, int k, int l,
                               const Tuple& atup, const Tuple& gtup) {
  const CDGAModel& Lm = *D.L;
  const CDGAModel& Xm = *D.X;
  std::vector<Vec> alphas, gammas;
  std::vector<int> adeg, gdeg;
  for (int j = 0; j < k; ++j) {
    alphas.push_back(Lm.basis_vec(atup[static_cast<size_t>(j)]));
    adeg.push_back(Lm.deg(atup[static_cast<size_t>(j)]));
  }
  for (int j = 0; j < l; ++j) {
    gammas.push_back(Xm.basis_vec(gtup[static_cast<size_t>(j)]));
    gdeg.push_back(Xm.deg(gtup[static_cast<size_t>(j)]));
  }
  Vec res;
  // Interior differential terms.
  long pref = 0;
  for (int j = 0; j < l; ++j) {
    Vec dg = Xm.dv(gammas[static_cast<size_t>(j)]);
    if (!dg.empty()) {
      std::vector<Vec> g2 = gammas;
      g2[static_cast<size_t>(j)] = dg;
      vec_accumulate(res, eval_q_vec(D, beta, k, l, alphas, g2),
                     Parity::of(pref).apply(Rat(1)));
    }
    pref += gdeg[static_cast<size_t>(j)];
  }
  // Gluing terms.
  std::vector<SplitIJ> splits = enumerate_splits(l);
  std::vector<Beta> subs = enumerate_betas(*D.rctx, D.rctx->omega(beta));
  for (const Partition3& P : enumerate_partitions(k)) {
    const int k2 = P.i2;
    const int k1 = k - k2 + 1;
    const int i = P.i1 + 1;  // 1-based insertion position
    std::vector<Vec> amid(alphas.begin() + P.i1, alphas.begin() + P.block2_end());
    for (const SplitIJ& sp : splits) {
      Parity sgn = iota(adeg, gdeg, i, sp);
      std::vector<Vec> gI, gJ;
      for (int j : sp.I) gI.push_back(gammas[static_cast<size_t>(j)]);
      for (int j : sp.J) gJ.push_back(gammas[static_cast<size_t>(j)]);
      for (const Beta& b2 : subs) {
        // beta1 = beta - b2, coordinatewise (subs stay within the lattice).
        Beta b1 = beta;
        bool okb = true;
        for (size_t c = 0; c < b1.size(); ++c) {
          b1[c] -= b2[c];
          if (b1[c] < 0) okb = false;
        }
        if (!okb) continue;
        Vec inner = eval_q_vec(D, b2, k2, static_cast<int>(sp.J.size()), amid, gJ);
        if (inner.empty()) continue;
        std::vector<Vec> aouter(alphas.begin(), alphas.begin() + P.i1);
        aouter.push_back(inner);
        aouter.insert(aouter.end(), alphas.begin() + P.block2_end(), alphas.end());
        vec_accumulate(res, eval_q_vec(D, b1, k1, static_cast<int>(sp.I.size()), aouter, gI),
                       sgn.apply(Rat(1)));
      }
    }
  }
  return res;
}

struct SlotFilter {
  std::optional<Beta> beta;
  std::optional<int> k, l;
  bool admits(const Beta& b, int kk, int ll) const {
    return (!beta || *beta == b) && (!k || *k == kk) && (!l || *l == ll);
  }
};

// Checks the structure relations for every slot within the truncation bounds.
// One report item per (beta, k, l); failures carry the first offending tuple.
inline Report check_q_relations(const CorrelatorData& D, const SlotFilter& filter = {}) {
  Report rep;
  for (const Beta& beta : enumerate_betas(*D.rctx, D.rctx->cutoff()))
    for (int k = 0; k <= D.K_max; ++k)
      for (int l = 0; l <= D.L_max; ++l) {
        if (!filter.admits(beta, k, l)) continue;
        long fails = 0;
        std::string wit;
        for (const Tuple& at : enumerate_tuples(k, D.L->size()))
          for (const Tuple& gt : enumerate_tuples(l, D.X->size())) {
            Vec r = q_relation_residual(D, beta, k, l, at, gt);
            if (!r.empty()) {
              if (fails == 0) wit = "first at " + tuple_str(at) + "x" + tuple_str(gt);
              ++fails;
            }
          }
        rep.add("q_relation beta=" + beta_str(beta) + " k=" + std::to_string(k) +
                    " l=" + std::to_string(l),
                fails == 0, fails == 0 ? "" : wit + ", " + std::to_string(fails) + " tuples");
      }
  return rep;
}

// Residual of the k = -1 relation at (beta, l) on one interior tuple, with the
// sphere term weighted by `sphere_sign`:
//   sum_j (-1)^{sum_{m<j}|g_m|} q_{-1,l}(g_1..dg_j..g_l)
// - 1/2 sum_{I u J, beta1+beta2} (-1)^{sgn(sigma) + |g_J|} < q^{b1}_{0,|I|}(g_I), q^{b2}_{0,|J|}(g_J) >
// + sphere_sign * ∫_L i* q^beta_{@,l}(g).
inline Rat q_minus1_residual(const CorrelatorData& D, const Beta& beta, int l,
                             const Tuple& gtup, int sphere_sign) {
  const CDGAModel& Xm = *D.X;
  std::vector<Vec> gammas;
  std::vector<int> gdeg;
  for (int j = 0; j < l; ++j) {
    gammas.push_back(Xm.basis_vec(gtup[static_cast<size_t>(j)]));
    gdeg.push_back(Xm.deg(gtup[static_cast<size_t>(j)]));
  }
  Rat res(0);
  long pref = 0;
  for (int j = 0; j < l; ++j) {
    Vec dg = Xm.dv(gammas[static_cast<size_t>(j)]);
    if (!dg.empty()) {
      std::vector<Vec> g2 = gammas;
      g2[static_cast<size_t>(j)] = dg;
      Rat term = eval_q_minus1_rat(D, beta, l, g2);
      res += Parity::of(pref).apply(term);
    }
    pref += gdeg[static_cast<size_t>(j)];
  }
  std::vector<Beta> subs = enumerate_betas(*D.rctx, D.rctx->omega(beta));
  for (const SplitIJ& sp : enumerate_splits(l)) {
    long gJ_deg = 0;
    for (int j : sp.J) gJ_deg += gdeg[static_cast<size_t>(j)];
    Parity sgn = koszul_sign(sp, gdeg) + Parity::of(gJ_deg);
    std::vector<Vec> gI, gJ;
    for (int j : sp.I) gI.push_back(gammas[static_cast<size_t>(j)]);
    for (int j : sp.J) gJ.push_back(gammas[static_cast<size_t>(j)]);
    for (const Beta& b2 : subs) {
      Beta b1 = beta;
      bool okb = true;
      for (size_t c = 0; c < b1.size(); ++c) {
        b1[c] -= b2[c];
        if (b1[c] < 0) okb = false;
      }
      if (!okb) continue;
      Vec qi = eval_q_vec(D, b1, 0, static_cast<int>(sp.I.size()), {}, gI);
      if (qi.empty()) continue;
      Vec qj = eval_q_vec(D, b2, 0, static_cast<int>(sp.J.size()), {}, gJ);
      if (qj.empty()) continue;
      Rat term = D.L->pair(qi, qj);
      res += rat(-1, 2) * sgn.apply(term);
    }
  }
  Vec sph = eval_q_sphere_vec(D, beta, l, gammas);
  if (!sph.empty()) res += sphere_sign * D.L->integ(D.rel.restrict(sph));
  return res;
}

// Verifies the k = -1 relations under the recorded sphere-term sign, and
// reports which sign (if either) balances every slot.
inline Report check_q_minus1_relations(const CorrelatorData& D) {
  Report rep;
  rep.add("sphere_channel_present", true,
          D.has_sphere ? "" : "absent; treated as the zero channel");
  bool plus_ok = true, minus_ok = true;
  for (const Beta& beta : enumerate_betas(*D.rctx, D.rctx->cutoff()))
    for (int l = 0; l <= D.L_max; ++l) {
      long fails = 0;
      std::string wit;
      for (const Tuple& gt : enumerate_tuples(l, D.X->size())) {
        Rat r = q_minus1_residual(D, beta, l, gt, D.gw_sign);
        if (r != 0) {
          if (fails == 0) wit = "first at " + tuple_str(gt) + " residual " + format_rational(r);
          ++fails;
        }
        if (q_minus1_residual(D, beta, l, gt, +1) != 0) plus_ok = false;
        if (q_minus1_residual(D, beta, l, gt, -1) != 0) minus_ok = false;
      }
      rep.add("q_minus1_relation beta=" + beta_str(beta) + " l=" + std::to_string(l),
              fails == 0, fails == 0 ? "" : wit + ", " + std::to_string(fails) + " tuples");
    }
  std::string which = plus_ok && minus_ok ? "both (sphere term vanishes)"
                      : plus_ok           ? "+1"
                      : minus_ok          ? "-1"
                                          : "neither";
  rep.add("gw_sign_analysis", true,
          "recorded " + std::to_string(D.gw_sign) + "; balancing sign: " + which);
  return rep;
}

// Chain-map law for the sphere channel: d q_@(g) = sum_j (-1)^{sum_{m<j}|g_m|}
// q_@(g_1..dg_j..g_l) on every basis tensor within bounds.
inline Report check_chain_map(const CorrelatorData& D) {
  Report rep;
  rep.add("sphere_channel_present", true,
          D.has_sphere ? "" : "absent; treated as the zero channel");
  for (const Beta& beta : enumerate_betas(*D.rctx, D.rctx->cutoff())) {
    for (int l = 0; l <= D.L_max; ++l) {
      long fails = 0;
      std::string wit;
      for (const Tuple& gt : enumerate_tuples(l, D.X->size())) {
        std::vector<Vec> gammas;
        std::vector<int> gdeg;
        for (int j = 0; j < l; ++j) {
          gammas.push_back(D.X->basis_vec(gt[static_cast<size_t>(j)]));
          gdeg.push_back(D.X->deg(gt[static_cast<size_t>(j)]));
        }
        Vec lhs = D.X->dv(eval_q_sphere_vec(D, beta, l, gammas));
        Vec rhs;
        long pref = 0;
        for (int j = 0; j < l; ++j) {
          Vec dg = D.X->dv(gammas[static_cast<size_t>(j)]);
          if (!dg.empty()) {
            std::vector<Vec> g2 = gammas;
            g2[static_cast<size_t>(j)] = dg;
            vec_accumulate(rhs, eval_q_sphere_vec(D, beta, l, g2), Parity::of(pref).apply(Rat(1)));
          }
          pref += gdeg[static_cast<size_t>(j)];
        }
        vec_accumulate(lhs, rhs, Rat(-1));
        if (!lhs.empty()) {
          if (fails == 0) wit = "first at " + tuple_str(gt);
          ++fails;
        }
      }
      rep.add("sphere_chain_map beta=" + beta_str(beta) + " l=" + std::to_string(l),
              fails == 0, fails == 0 ? "" : wit + ", " + std::to_string(fails) + " tuples");
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Operator axioms checked directly on tensors
// ---------------------------------------------------------------------------

inline Report check_axioms_on_data(const CorrelatorData& D) {
  Report rep;
  const CDGAModel& Lm = *D.L;
  const CDGAModel& Xm = *D.X;

  // (i) unit law: inserting the boundary unit annihilates every stored tensor
  // (the surviving cases live in the definitional energy-zero channel).
  bool ok = true;
  std::string wit;
  for (const auto& [key, t] : D.disk)
    for (const auto& [tup, v] : t)
      for (int j = 0; j < key.k; ++j)
        if (tup[static_cast<size_t>(j)] == Lm.unit && !v.empty()) {
          ok = false;
          wit = "disk beta=" + beta_str(key.beta) + " " + tuple_str(tup);
        }
  rep.add("unit_insertion", ok, wit);

  // (ii) fundamental class: inserting the ambient unit annihilates every
  // stored tensor (disk, k = -1, by interior symmetry any slot).
  ok = true; wit.clear();
  for (const auto& [key, t] : D.disk)
    for (const auto& [tup, v] : t)
      for (int j = 0; j < key.l; ++j)
        if (tup[static_cast<size_t>(key.k + j)] == Xm.unit && !v.empty()) {
          ok = false;
          wit = "disk beta=" + beta_str(key.beta) + " " + tuple_str(tup);
        }
  for (const auto& [key, t] : D.minus1)
    for (const auto& [tup, v] : t)
      for (int j = 0; j < key.l; ++j)
        if (tup[static_cast<size_t>(j)] == Xm.unit && v != 0) {
          ok = false;
          wit = "minus1 beta=" + beta_str(key.beta) + " " + tuple_str(tup);
        }
  rep.add("fundamental_class", ok, wit);
  // The surviving energy-zero case q^0_{0,1}(1_X) = -1 (definitional).
  {
    Vec got = eval_q_vec(D, D.rctx->beta_zero(), 0, 1, {}, {Xm.basis_vec(Xm.unit)});
    rep.add("fundamental_class_energy_zero",
            got == vec_scaled(Lm.basis_vec(Lm.unit), rat(-1)));
  }

  // (iii) divisor: for closed relative degree-2 basis directions g1 in the
  // first interior slot, q^beta_{k,l}(a; g1, g..) = (∫_beta g1) q^beta_{k,l-1}(a; g..).
  ok = true; wit.clear();
  std::vector<int> divisor_dirs;
  for (int i = 0; i < Xm.size(); ++i)
    if (Xm.deg(i) == 2 && Xm.d[static_cast<size_t>(i)].empty() &&
        D.rel.is_relative(Xm.basis_vec(i)))
      divisor_dirs.push_back(i);
  for (const Beta& beta : enumerate_betas(*D.rctx, D.rctx->cutoff())) {
    if (D.is_beta_zero(beta)) continue;
    for (int k = 0; k <= D.K_max; ++k)
      for (int l = 1; l <= D.L_max; ++l)
        for (int g1 : divisor_dirs) {
          Rat per = D.rel.period(beta, Xm.basis_vec(g1));
          for (const Tuple& at : enumerate_tuples(k, Lm.size()))
            for (const Tuple& gt : enumerate_tuples(l - 1, Xm.size())) {
              std::vector<Vec> alphas, grest;
              for (int j = 0; j < k; ++j) alphas.push_back(Lm.basis_vec(at[static_cast<size_t>(j)]));
              std::vector<Vec> gfull{Xm.basis_vec(g1)};
              for (int j = 0; j + 1 < l; ++j) {
                grest.push_back(Xm.basis_vec(gt[static_cast<size_t>(j)]));
                gfull.push_back(Xm.basis_vec(gt[static_cast<size_t>(j)]));
              }
              Vec lhs = eval_q_vec(D, beta, k, l, alphas, gfull);
              Vec rhs = vec_scaled(eval_q_vec(D, beta, k, l - 1, alphas, grest), per);
              if (lhs != rhs) {
                ok = false;
                wit = "beta=" + beta_str(beta) + " k=" + std::to_string(k) +
                      " l=" + std::to_string(l) + " dir=" + Xm.names[static_cast<size_t>(g1)];
              }
            }
          // k = -1 version.
          for (const Tuple& gt : enumerate_tuples(l - 1, Xm.size())) {
            std::vector<Vec> grest, gfull{Xm.basis_vec(g1)};
            for (int j = 0; j + 1 < l; ++j) {
              grest.push_back(Xm.basis_vec(gt[static_cast<size_t>(j)]));
              gfull.push_back(Xm.basis_vec(gt[static_cast<size_t>(j)]));
            }
            Rat lhs = eval_q_minus1_rat(D, beta, l, gfull);
            Rat rhs = per * eval_q_minus1_rat(D, beta, l - 1, grest);
            if (lhs != rhs) {
              ok = false;
              wit = "beta=" + beta_str(beta) + " k=-1 l=" + std::to_string(l) +
                    " dir=" + Xm.names[static_cast<size_t>(g1)];
            }
          }
        }
  }
  rep.add("divisor", ok, wit);

  // (iv) energy-zero table (definitional channel sanity).
  ok = true;
  for (int i = 0; i < Lm.size() && ok; ++i) {
    ok = eval_q_vec(D, D.rctx->beta_zero(), 1, 0, {Lm.basis_vec(i)}, {}) == Lm.d[static_cast<size_t>(i)];
    for (int j = 0; j < Lm.size() && ok; ++j) {
      Vec want = vec_scaled(Lm.wedge(Lm.basis_vec(i), Lm.basis_vec(j)),
                            Rat(Parity::of(Lm.deg(i)).sign()));
      ok = eval_q_vec(D, D.rctx->beta_zero(), 2, 0, {Lm.basis_vec(i), Lm.basis_vec(j)}, {}) == want;
    }
  }
  for (int i = 0; i < Xm.size() && ok; ++i) {
    Vec want = vec_scaled(D.rel.r[static_cast<size_t>(i)], Rat(Parity::of(Xm.deg(i) + 1).sign()));
    ok = eval_q_vec(D, D.rctx->beta_zero(), 0, 1, {}, {Xm.basis_vec(i)}) == want;
  }
  ok = ok && eval_q_vec(D, D.rctx->beta_zero(), 0, 0, {}, {}).empty();
  ok = ok && eval_q_minus1_rat(D, D.rctx->beta_zero(), 0, {}) == 0;
  ok = ok && eval_q_sphere_vec(D, D.rctx->beta_zero(), 0, {}).empty();
  ok = ok && eval_q_sphere_vec(D, D.rctx->beta_zero(), 1, {Xm.basis_vec(0)}).empty();
  for (int i = 0; i < Xm.size() && ok; ++i)
    for (int j = 0; j < Xm.size() && ok; ++j)
      ok = eval_q_sphere_vec(D, D.rctx->beta_zero(), 2, {Xm.basis_vec(i), Xm.basis_vec(j)}) ==
           Xm.wedge(Xm.basis_vec(i), Xm.basis_vec(j));
  ok = ok && eval_q_sphere_vec(D, D.rctx->beta_zero(), 3,
                               {Xm.basis_vec(0), Xm.basis_vec(0), Xm.basis_vec(0)}).empty();
  rep.add("energy_zero_table", ok);

  // (v) top degree: stored disk values have no degree-n component (the three
  // exceptional operators all live in the energy-zero channel).
  ok = true; wit.clear();
  for (const auto& [key, t] : D.disk)
    for (const auto& [tup, v] : t)
      for (const auto& [i, c] : v)
        if (Lm.deg(i) == D.n()) {
          ok = false;
          wit = "disk beta=" + beta_str(key.beta) + " " + tuple_str(tup);
        }
  rep.add("top_degree_vanishing", ok, wit);

  // (vi) cyclic law on dressed operators, k >= 1:
  // <q_{k,l}(a_1..a_k;g), a_{k+1}> =
  //   (-1)^{(|a_{k+1}|+1) sum_{j<=k}(|a_j|+1)} <q_{k,l}(a_{k+1},a_1..a_{k-1};g), a_k>.
  ok = true; wit.clear();
  for (const Beta& beta : enumerate_betas(*D.rctx, D.rctx->cutoff()))
    for (int k = 1; k <= D.K_max; ++k)
      for (int l = 0; l <= D.L_max; ++l) {
        // Skip slots that are identically zero to save time.
        if (!D.is_beta_zero(beta) && D.disk.find(DiskKey{beta, k, l}) == D.disk.end()) continue;
        for (const Tuple& at : enumerate_tuples(k + 1, Lm.size()))
          for (const Tuple& gt : enumerate_tuples(l, Xm.size())) {
            std::vector<Vec> a1, a2, gammas;
            std::vector<int> degs;
            for (int j = 0; j < k; ++j) a1.push_back(Lm.basis_vec(at[static_cast<size_t>(j)]));
            a2.push_back(Lm.basis_vec(at[static_cast<size_t>(k)]));
            for (int j = 0; j + 1 < k; ++j) a2.push_back(Lm.basis_vec(at[static_cast<size_t>(j)]));
            for (int j = 0; j <= k; ++j) degs.push_back(Lm.deg(at[static_cast<size_t>(j)]));
            for (int j = 0; j < l; ++j) gammas.push_back(Xm.basis_vec(gt[static_cast<size_t>(j)]));
            Rat lhs = Lm.pair(eval_q_vec(D, beta, k, l, a1, gammas),
                              Lm.basis_vec(at[static_cast<size_t>(k)]));
            Rat rhs = Lm.pair(eval_q_vec(D, beta, k, l, a2, gammas),
                              Lm.basis_vec(at[static_cast<size_t>(k - 1)]));
            if (lhs != cyclic_sign(degs).apply(rhs)) {
              ok = false;
              wit = "beta=" + beta_str(beta) + " k=" + std::to_string(k) +
                    " l=" + std::to_string(l) + " " + tuple_str(at);
            }
          }
      }
  rep.add("cyclic_tensors", ok, wit);
  return rep;
}

}  // namespace ainfty
