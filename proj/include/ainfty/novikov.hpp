#pragma once
// Exact arithmetic in the Novikov coefficient ring.
//
// The ring is generated over the rationals by monomials T^beta q-adically
// weighted by an energy functional, together with finitely many even-degree
// formal variables t_0..t_N.  A lattice element beta is a nonnegative integer
// combination of finitely many effective generators, each carrying an energy
// omega > 0 and an even Maslov index mu; energy and Maslov are additive.  This
// makes every series finite below any fixed energy cutoff E, so completion is
// implemented by brute truncation: operations silently drop terms whose weight
//   weight = omega(beta) + (sum of t-exponents)
// exceeds E, but set a per-element "truncated" flag so callers can tell an
// exact zero from a zero-below-cutoff.  Coefficients are exact rationals.
//
// The valuation of an element is the minimum weight over its stored terms
// (+infinity for zero, represented as std::nullopt), and the grading of a
// monomial is mu(beta) + sum_a l_a * deg(t_a).

#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "ainfty/rational.hpp"

namespace ainfty {

using Beta = std::vector<int>;  // coordinates over the lattice generators
using TExp = std::vector<int>;  // exponents of the formal variables

// One effective lattice generator: energy > 0, Maslov even.
struct LatticeGen {
  Rat omega;
  long maslov = 0;
};

// Shared immutable context: the lattice, the formal-variable degrees, and the
// energy cutoff.  Elements may only be combined when their contexts agree.
class RingContext {
 public:
  RingContext(std::vector<LatticeGen> gens, std::vector<long> tdegs, Rat cutoff)
      : gens_(std::move(gens)), tdegs_(std::move(tdegs)), cutoff_(std::move(cutoff)) {
    for (const auto& g : gens_) {
      if (g.omega <= 0) throw std::invalid_argument("lattice generator with energy <= 0");
      if (g.maslov % 2 != 0) throw std::invalid_argument("lattice generator with odd Maslov index");
    }
    for (long d : tdegs_) {
      if (d % 2 != 0) throw std::invalid_argument("formal variable with odd degree");
    }
    if (cutoff_ < 0) throw std::invalid_argument("negative energy cutoff");
  }

  int rank() const { return static_cast<int>(gens_.size()); }
  int num_vars() const { return static_cast<int>(tdegs_.size()); }
  const std::vector<LatticeGen>& generators() const { return gens_; }
  long tdeg(int a) const { return tdegs_.at(static_cast<size_t>(a)); }
  const Rat& cutoff() const { return cutoff_; }

  Beta beta_zero() const { return Beta(static_cast<size_t>(rank()), 0); }

  Rat omega(const Beta& b) const {
    check_beta(b);
    Rat w = 0;
    for (size_t i = 0; i < b.size(); ++i) w += b[i] * gens_[i].omega;
    return w;
  }
  long maslov(const Beta& b) const {
    check_beta(b);
    long m = 0;
    for (size_t i = 0; i < b.size(); ++i) m += b[i] * gens_[i].maslov;
    return m;
  }
  // sum of t-exponents (each power of any t_a contributes 1 to the weight)
  static long texp_total(const TExp& t) {
    long s = 0;
    for (int l : t) s += l;
    return s;
  }
  Rat weight(const Beta& b, const TExp& t) const { return omega(b) + texp_total(t); }
  long grade(const Beta& b, const TExp& t) const {
    if (static_cast<int>(t.size()) != num_vars())
      throw std::invalid_argument("t-exponent vector of wrong length");
    long g = maslov(b);
    for (size_t a = 0; a < t.size(); ++a) g += t[a] * tdegs_[a];
    return g;
  }

  void check_beta(const Beta& b) const {
    if (static_cast<int>(b.size()) != rank())
      throw std::invalid_argument("lattice element of wrong rank");
    for (int c : b)
      if (c < 0) throw std::invalid_argument("lattice element with negative coordinate");
  }

  friend bool operator==(const RingContext& a, const RingContext& b) {
    if (a.tdegs_ != b.tdegs_ || a.cutoff_ != b.cutoff_ ||
        a.gens_.size() != b.gens_.size())
      return false;
    for (size_t i = 0; i < a.gens_.size(); ++i)
      if (a.gens_[i].omega != b.gens_[i].omega || a.gens_[i].maslov != b.gens_[i].maslov)
        return false;
    return true;
  }

 private:
  std::vector<LatticeGen> gens_;
  std::vector<long> tdegs_;
  Rat cutoff_;
};

using RingContextPtr = std::shared_ptr<const RingContext>;

inline bool same_context(const RingContextPtr& a, const RingContextPtr& b) {
  return a == b || (a && b && *a == *b);
}

// Monomial key: which T^beta and which t-exponents.
struct RKey {
  Beta beta;
  TExp t;
  friend auto operator<=>(const RKey&, const RKey&) = default;
};

// An element of the truncated Novikov ring.  Immutable after construction;
// all operations are pure and context-checked.
class RingElem {
 public:
  explicit RingElem(RingContextPtr ctx) : ctx_(std::move(ctx)) { require_ctx(); }

  static RingElem zero(RingContextPtr ctx) { return RingElem(std::move(ctx)); }
  static RingElem scalar(RingContextPtr ctx, const Rat& c) {
    RingElem e(std::move(ctx));
    e.add_term(e.ctx_->beta_zero(), TExp(static_cast<size_t>(e.ctx_->num_vars()), 0), c);
    return e;
  }
  static RingElem one(RingContextPtr ctx) { return scalar(std::move(ctx), 1); }
  // T^beta
  static RingElem tpow(RingContextPtr ctx, const Beta& beta) {
    RingElem e(std::move(ctx));
    e.add_term(beta, TExp(static_cast<size_t>(e.ctx_->num_vars()), 0), 1);
    return e;
  }
  // the formal variable t_a
  static RingElem tvar(RingContextPtr ctx, int a) {
    RingElem e(std::move(ctx));
    TExp t(static_cast<size_t>(e.ctx_->num_vars()), 0);
    t.at(static_cast<size_t>(a)) = 1;
    e.add_term(e.ctx_->beta_zero(), t, 1);
    return e;
  }
  static RingElem monomial(RingContextPtr ctx, const Beta& beta, const TExp& t, const Rat& c) {
    RingElem e(std::move(ctx));
    e.add_term(beta, t, c);
    return e;
  }

  const RingContextPtr& context() const { return ctx_; }
  const std::map<RKey, Rat>& terms() const { return terms_; }
  bool truncated() const { return truncated_; }
  bool is_zero() const { return terms_.empty(); }

  // Valuation: minimum weight over stored terms; nullopt encodes +infinity.
  std::optional<Rat> valuation() const {
    std::optional<Rat> v;
    for (const auto& [k, c] : terms_) {
      Rat w = ctx_->weight(k.beta, k.t);
      if (!v || w < *v) v = w;
    }
    return v;
  }

  // The image under the quotient by {valuation > 0}: the weight-zero
  // coefficient.  This reduction is a ring morphism onto the rationals.
  Rat constant_term() const {
    RKey k{ctx_->beta_zero(), TExp(static_cast<size_t>(ctx_->num_vars()), 0)};
    auto it = terms_.find(k);
    return it == terms_.end() ? Rat(0) : it->second;
  }

  bool is_homogeneous() const {
    std::optional<long> g;
    for (const auto& [k, c] : terms_) {
      long gk = ctx_->grade(k.beta, k.t);
      if (g && *g != gk) return false;
      g = gk;
    }
    return true;
  }
  // Grade of a homogeneous element; nullopt for zero; throws if inhomogeneous.
  std::optional<long> grade() const {
    std::optional<long> g;
    for (const auto& [k, c] : terms_) {
      long gk = ctx_->grade(k.beta, k.t);
      if (g && *g != gk) throw std::logic_error("grade() on inhomogeneous ring element");
      g = gk;
    }
    return g;
  }

  friend RingElem operator+(const RingElem& x, const RingElem& y) {
    x.require_same(y);
    RingElem r(x.ctx_);
    r.terms_ = x.terms_;
    r.truncated_ = x.truncated_ || y.truncated_;
    for (const auto& [k, c] : y.terms_) {
      auto [it, inserted] = r.terms_.try_emplace(k, c);
      if (!inserted) {
        it->second += c;
        if (it->second == 0) r.terms_.erase(it);
      }
    }
    return r;
  }
  friend RingElem operator-(const RingElem& x) {
    RingElem r(x.ctx_);
    r.truncated_ = x.truncated_;
    for (const auto& [k, c] : x.terms_) r.terms_.emplace(k, -c);
    return r;
  }
  friend RingElem operator-(const RingElem& x, const RingElem& y) { return x + (-y); }

  friend RingElem operator*(const Rat& c, const RingElem& x) {
    RingElem r(x.ctx_);
    r.truncated_ = x.truncated_;
    if (c == 0) return r;
    for (const auto& [k, v] : x.terms_) r.terms_.emplace(k, c * v);
    return r;
  }

  friend RingElem operator*(const RingElem& x, const RingElem& y) {
    x.require_same(y);
    RingElem r(x.ctx_);
    r.truncated_ = x.truncated_ || y.truncated_;
    for (const auto& [kx, cx] : x.terms_)
      for (const auto& [ky, cy] : y.terms_) {
        Beta b(kx.beta);
        for (size_t i = 0; i < b.size(); ++i) b[i] += ky.beta[i];
        TExp t(kx.t);
        for (size_t a = 0; a < t.size(); ++a) t[a] += ky.t[a];
        r.add_term(b, t, cx * cy);
      }
    return r;
  }

  // Formal partial derivative in the formal variable t_a.
  RingElem tderiv(int a) const {
    if (a < 0 || a >= ctx_->num_vars()) throw std::invalid_argument("tderiv: no such variable");
    RingElem r(ctx_);
    r.truncated_ = truncated_;
    for (const auto& [k, c] : terms_) {
      int la = k.t[static_cast<size_t>(a)];
      if (la == 0) continue;
      RKey nk = k;
      nk.t[static_cast<size_t>(a)] = la - 1;
      r.terms_[nk] += la * c;
      if (r.terms_[nk] == 0) r.terms_.erase(nk);
    }
    return r;
  }

  // Equality compares stored terms (not the truncation flag).
  friend bool operator==(const RingElem& x, const RingElem& y) {
    return same_context(x.ctx_, y.ctx_) && x.terms_ == y.terms_;
  }

  std::string to_string() const {
    if (terms_.empty()) return truncated_ ? "0 (truncated)" : "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& [k, c] : terms_) {
      if (!first) os << " + ";
      first = false;
      os << format_rational(c);
      for (size_t i = 0; i < k.beta.size(); ++i)
        if (k.beta[i] != 0) os << "*T" << i << "^" << k.beta[i];
      for (size_t a = 0; a < k.t.size(); ++a)
        if (k.t[a] != 0) os << "*t" << a << "^" << k.t[a];
    }
    if (truncated_) os << " (truncated)";
    return os.str();
  }

 private:
  void require_ctx() const {
    if (!ctx_) throw std::invalid_argument("null ring context");
  }
  void require_same(const RingElem& y) const {
    if (!same_context(ctx_, y.ctx_)) throw std::invalid_argument("mismatched ring contexts");
  }
  // Adds one term, enforcing the cutoff and pruning zeros.
  void add_term(const Beta& beta, const TExp& t, const Rat& c) {
    if (c == 0) return;
    if (static_cast<int>(t.size()) != ctx_->num_vars())
      throw std::invalid_argument("t-exponent vector of wrong length");
    for (int l : t)
      if (l < 0) throw std::invalid_argument("negative t-exponent");
    if (ctx_->weight(beta, t) > ctx_->cutoff()) {
      truncated_ = true;
      return;
    }
    RKey k{beta, t};
    auto [it, inserted] = terms_.try_emplace(k, c);
    if (!inserted) {
      it->second += c;
      if (it->second == 0) terms_.erase(it);
    }
  }

  RingContextPtr ctx_;
  std::map<RKey, Rat> terms_;
  bool truncated_ = false;
};

}  // namespace ainfty
