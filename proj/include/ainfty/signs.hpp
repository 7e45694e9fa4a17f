#pragma once
// Sign calculus and partition combinatorics for the A-infinity kernel.
//
// Every sign in the library is a parity (an element of Z/2) computed by pure
// integer arithmetic; the Parity type keeps parities from being confused with
// ordinary ints.  Degree arguments are ordinary (possibly negative) integers;
// only their residues mod 2 matter.
//
// Conventions used throughout:
//  - Lists are 0-indexed in code.  Where a formula depends on a 1-based
//    position (epsilon's j*(deg+1) term), the code says so explicitly.
//  - A SplitIJ is an ordered two-block shuffle decomposition of {0,..,l-1}; a
//    Partition3 is an ordered three-block interval decomposition of {0,..,k-1}.

#include <cassert>
#include <cstdint>
#include <vector>

namespace ainfty {

// ---------------------------------------------------------------------------
// Parity
// ---------------------------------------------------------------------------

class Parity {
 public:
  constexpr Parity() = default;

  // Reduce an arbitrary integer mod 2 (handles negatives).
  static constexpr Parity of(long long x) { return Parity((x % 2 + 2) % 2 != 0); }
  static constexpr Parity even() { return Parity(false); }
  static constexpr Parity odd() { return Parity(true); }

  constexpr bool is_odd() const { return odd_; }
  constexpr bool is_even() const { return !odd_; }
  // The multiplicative sign (-1)^parity as an int, for arithmetic use.
  constexpr int sign() const { return odd_ ? -1 : 1; }

  friend constexpr Parity operator+(Parity a, Parity b) { return Parity(a.odd_ != b.odd_); }
  friend constexpr Parity operator*(Parity a, Parity b) { return Parity(a.odd_ && b.odd_); }
  constexpr Parity& operator+=(Parity b) { odd_ = (odd_ != b.odd_); return *this; }
  friend constexpr bool operator==(Parity a, Parity b) { return a.odd_ == b.odd_; }
  friend constexpr bool operator!=(Parity a, Parity b) { return a.odd_ != b.odd_; }

  // Negate v iff the parity is odd.  Works for any type with unary minus.
  template <class T>
  T apply(T v) const { return odd_ ? T(-v) : v; }

 private:
  explicit constexpr Parity(bool odd) : odd_(odd) {}
  bool odd_ = false;
};

// Parity of a sum of integers.
inline Parity parity_sum(const std::vector<int>& xs) {
  long long s = 0;
  for (int x : xs) s += x;
  return Parity::of(s);
}

// ---------------------------------------------------------------------------
// Partition and shuffle types
// ---------------------------------------------------------------------------

// Ordered 3-block interval decomposition of the index list [0, k):
//   block 1 = [0, i1),  block 2 = [i1, i1+i2),  block 3 = [i1+i2, k).
// Blocks may be empty; concatenating them in order recovers [0, k).
struct Partition3 {
  int k = 0;   // total size
  int i1 = 0;  // length of block 1
  int i2 = 0;  // length of block 2

  int block2_begin() const { return i1; }
  int block2_end() const { return i1 + i2; }
  int block3_len() const { return k - i1 - i2; }
  bool valid() const { return i1 >= 0 && i2 >= 0 && i1 + i2 <= k; }
  friend bool operator==(const Partition3&, const Partition3&) = default;
};

// Ordered shuffle split of {0,..,l-1} into complementary increasing lists I, J.
struct SplitIJ {
  int l = 0;
  std::vector<int> I;  // strictly increasing, subset of [0, l)
  std::vector<int> J;  // the complement, strictly increasing

  bool valid() const {
    std::vector<char> seen(static_cast<size_t>(l), 0);
    auto mark = [&](const std::vector<int>& v) {
      int prev = -1;
      for (int x : v) {
        if (x < prev || x < 0 || x >= l || seen[static_cast<size_t>(x)]) return false;
        seen[static_cast<size_t>(x)] = 1;
        prev = x;
      }
      return true;
    };
    if (!mark(I) || !mark(J)) return false;
    return static_cast<int>(I.size() + J.size()) == l;
  }
  friend bool operator==(const SplitIJ&, const SplitIJ&) = default;
};

// All ordered 3-block decompositions of [0, k), lexicographic in (i1, i2).
// There are (k+1)(k+2)/2 of them.
inline std::vector<Partition3> enumerate_partitions(int k) {
  assert(k >= 0);
  std::vector<Partition3> out;
  out.reserve(static_cast<size_t>((k + 1) * (k + 2) / 2));
  for (int i1 = 0; i1 <= k; ++i1)
    for (int i2 = 0; i1 + i2 <= k; ++i2) out.push_back(Partition3{k, i1, i2});
  return out;
}

// All 2^l shuffle splits of [0, l).  Enumeration order: the I-membership
// bitmask ascending, bit j set meaning j goes to I.  This order is part of the
// library's deterministic-report contract.
inline std::vector<SplitIJ> enumerate_splits(int l) {
  assert(l >= 0 && l < 31);
  std::vector<SplitIJ> out;
  out.reserve(static_cast<size_t>(1) << l);
  for (std::uint32_t mask = 0; mask < (1u << l); ++mask) {
    SplitIJ s;
    s.l = l;
    for (int j = 0; j < l; ++j) ((mask >> j) & 1u ? s.I : s.J).push_back(j);
    out.push_back(std::move(s));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Sign functions
// ---------------------------------------------------------------------------

// Koszul sign of the shuffle that reorders the concatenation (x_I, x_J) back
// into the original order x_0,..,x_{l-1}:
//   sum over pairs i in I, j in J with j < i of degs[i]*degs[j]  (mod 2).
// Such pairs are exactly the transposed pairs of the shuffle permutation.
inline Parity koszul_sign(const SplitIJ& split, const std::vector<int>& degs) {
  assert(split.valid());
  assert(static_cast<int>(degs.size()) == split.l);
  long long acc = 0;
  for (int i : split.I)
    for (int j : split.J)
      if (j < i) acc += static_cast<long long>(degs[static_cast<size_t>(i)]) *
                        degs[static_cast<size_t>(j)];
  return Parity::of(acc);
}

// The operator dressing sign for k >= 0:
//   epsilon(alpha; gamma) = sum_{j=1..k} j*(|alpha_j|+1) + sum_j |gamma_j| + k*n + 1
// with 1-based positions j in the first sum.
inline Parity epsilon(const std::vector<int>& alpha_degs,
                      const std::vector<int>& gamma_degs, int n) {
  long long acc = 1;
  for (size_t j = 0; j < alpha_degs.size(); ++j)
    acc += static_cast<long long>(j + 1) * (alpha_degs[j] + 1);
  for (int g : gamma_degs) acc += g;
  acc += static_cast<long long>(alpha_degs.size()) * n;
  return Parity::of(acc);
}

// The dressing sign for the k = -1 operators:
//   epsilon(gamma) = sum_j |gamma_j| + n + 1.
inline Parity epsilon_minus1(const std::vector<int>& gamma_degs, int n) {
  long long acc = 1 + n;
  for (int g : gamma_degs) acc += g;
  return Parity::of(acc);
}

// The structure-relation sign iota.  `i` is the 1-based insertion position of
// the inner operator among the alpha inputs (so the outer prefix alpha block
// is positions 1..i-1), and `split` sends gamma inputs to the outer (I) and
// inner (J) operator.
//   iota = (sum_{j in J}|gamma_j|) * (sum_{j<i}(|alpha_j|+1))
//        + sum_{j<i}(|alpha_j|+1) + sum_{j in I}|gamma_j| + koszul_sign(split).
inline Parity iota(const std::vector<int>& alpha_degs,
                   const std::vector<int>& gamma_degs, int i,
                   const SplitIJ& split) {
  assert(i >= 1 && i <= static_cast<int>(alpha_degs.size()) + 1);
  assert(static_cast<int>(gamma_degs.size()) == split.l);
  long long prefix = 0;  // sum over the alpha prefix of (deg+1)
  for (int j = 0; j < i - 1; ++j) prefix += alpha_degs[static_cast<size_t>(j)] + 1;
  long long sumJ = 0, sumI = 0;
  for (int j : split.J) sumJ += gamma_degs[static_cast<size_t>(j)];
  for (int j : split.I) sumI += gamma_degs[static_cast<size_t>(j)];
  long long acc = sumJ * prefix + prefix + sumI;
  return Parity::of(acc) + koszul_sign(split, gamma_degs);
}

// Orientation sign of the boundary gluing: delta = k2*(k1 - i) + i - n  (mod 2),
// with `i` the 1-based insertion position.  The degenerate case
// i = k1 = k2 = 0 (used by the k = -1 relations) gives parity of n.
inline Parity delta_glue(int k1, int k2, int i, int n) {
  return Parity::of(static_cast<long long>(k2) * (k1 - i) + i - n);
}

// Cyclic-permutation sign of the pairing axiom: for degrees d_1,..,d_{k+1}
// (the last entry is the element moved to the front),
//   (d_{k+1}+1) * sum_{j=1..k}(d_j+1)  (mod 2).
inline Parity cyclic_sign(const std::vector<int>& degs) {
  assert(!degs.empty());
  long long body = 0;
  for (size_t j = 0; j + 1 < degs.size(); ++j) body += degs[j] + 1;
  return Parity::of((degs.back() + 1) * body);
}

}  // namespace ainfty
