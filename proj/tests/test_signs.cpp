// Tests for the sign calculus.  Expected values for the pinned cases were
// evaluated by hand from the defining formulas; the fuzz tests compare against
// naive re-implementations kept deliberately independent of the library code
// (different accumulation structure, generic permutation signs).

#include "ainfty/signs.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <numeric>
#include <random>
#include <vector>

namespace ainfty {
namespace {

// ---------------------------------------------------------------------------
// Naive oracles (independent implementations)
// ---------------------------------------------------------------------------

// Graded sign of an arbitrary permutation of graded symbols.  `perm` describes
// the reordered list: new_list[a] = old_list[perm[a]].  The sign is the sum of
// deg*deg over inverted pairs.
int naive_graded_perm_sign(const std::vector<int>& perm, const std::vector<int>& degs) {
  int acc = 0;
  for (size_t a = 0; a < perm.size(); ++a)
    for (size_t b = a + 1; b < perm.size(); ++b)
      if (perm[a] > perm[b])
        acc ^= (degs[static_cast<size_t>(perm[a])] & 1) &
               (degs[static_cast<size_t>(perm[b])] & 1);
  return acc;
}

std::vector<int> split_to_perm(const SplitIJ& s) {
  std::vector<int> perm(s.I);
  perm.insert(perm.end(), s.J.begin(), s.J.end());
  return perm;
}

int naive_epsilon(const std::vector<int>& ad, const std::vector<int>& gd, int n) {
  int acc = 0;
  for (size_t j = 0; j < ad.size(); ++j) acc ^= (static_cast<int>(j + 1) * (ad[j] + 1)) & 1;
  for (int g : gd) acc ^= g & 1;
  acc ^= (static_cast<int>(ad.size()) * n) & 1;
  return acc ^ 1;
}

int naive_iota(const std::vector<int>& ad, const std::vector<int>& gd, int i,
               const SplitIJ& s) {
  int prefix = 0;
  for (int j = 0; j < i - 1; ++j) prefix ^= (ad[static_cast<size_t>(j)] + 1) & 1;
  int sumI = 0, sumJ = 0;
  for (int j : s.I) sumI ^= gd[static_cast<size_t>(j)] & 1;
  for (int j : s.J) sumJ ^= gd[static_cast<size_t>(j)] & 1;
  return (sumJ & prefix) ^ prefix ^ sumI ^ naive_graded_perm_sign(split_to_perm(s), gd);
}

int naive_delta(int k1, int k2, int i, int n) {
  long long v = static_cast<long long>(k2) * (k1 - i) + i - n;
  return static_cast<int>(((v % 2) + 2) % 2);
}

int naive_cyclic(const std::vector<int>& degs) {
  int body = 0;
  for (size_t j = 0; j + 1 < degs.size(); ++j) body ^= (degs[j] + 1) & 1;
  return ((degs.back() + 1) & 1) & body;
}

SplitIJ make_split(int l, std::vector<int> I) {
  SplitIJ s;
  s.l = l;
  s.I = std::move(I);
  for (int j = 0; j < l; ++j)
    if (std::find(s.I.begin(), s.I.end(), j) == s.I.end()) s.J.push_back(j);
  return s;
}

std::vector<int> random_degs(std::mt19937_64& rng, size_t len, int lo = 0, int hi = 4) {
  std::vector<int> v(len);
  for (auto& x : v) x = lo + static_cast<int>(rng() % static_cast<unsigned>(hi - lo + 1));
  return v;
}

// ---------------------------------------------------------------------------
// Parity type basics
// ---------------------------------------------------------------------------

TEST(Parity, ArithmeticAndSign) {
  EXPECT_EQ(Parity::of(0), Parity::even());
  EXPECT_EQ(Parity::of(-3), Parity::odd());
  EXPECT_EQ(Parity::of(7) + Parity::of(5), Parity::even());
  EXPECT_EQ(Parity::of(1) * Parity::of(1), Parity::odd());
  EXPECT_EQ(Parity::of(1) * Parity::of(2), Parity::even());
  EXPECT_EQ(Parity::odd().sign(), -1);
  EXPECT_EQ(Parity::even().apply(5), 5);
  EXPECT_EQ(Parity::odd().apply(5), -5);
}

// ---------------------------------------------------------------------------
// koszul_sign
// ---------------------------------------------------------------------------

TEST(KoszulSign, IdentityShuffleIsEven) {
  for (int l = 0; l <= 5; ++l) {
    std::vector<int> all(static_cast<size_t>(l));
    std::iota(all.begin(), all.end(), 0);
    SplitIJ s = make_split(l, all);  // I = [l], J = empty
    std::vector<int> degs(static_cast<size_t>(l), 3);
    EXPECT_TRUE(koszul_sign(s, degs).is_even()) << "l=" << l;
  }
}

TEST(KoszulSign, SingleCrossingOfTwoOddElements) {
  // l = 2, I = {second element}, J = {first}: one crossing, degrees 1,1.
  SplitIJ s = make_split(2, {1});
  EXPECT_TRUE(koszul_sign(s, {1, 1}).is_odd());
}

TEST(KoszulSign, EvenDegreesAlwaysEven) {
  std::mt19937_64 rng(2024);
  for (int l = 0; l <= 6; ++l) {
    for (const SplitIJ& s : enumerate_splits(l)) {
      std::vector<int> degs = random_degs(rng, static_cast<size_t>(l));
      for (auto& d : degs) d *= 2;
      EXPECT_TRUE(koszul_sign(s, degs).is_even());
    }
  }
}

TEST(KoszulSign, MatchesGradedPermutationOracle) {
  std::mt19937_64 rng(77);
  for (int l = 0; l <= 5; ++l) {
    for (const SplitIJ& s : enumerate_splits(l)) {
      for (int rep = 0; rep < 8; ++rep) {
        std::vector<int> degs = random_degs(rng, static_cast<size_t>(l));
        EXPECT_EQ(koszul_sign(s, degs).is_odd() ? 1 : 0,
                  naive_graded_perm_sign(split_to_perm(s), degs))
            << "l=" << l;
      }
    }
  }
}

// Composition law for graded permutation signs: applying q then p to a graded
// list multiplies the signs.  This pins the inversion-counting convention the
// shuffle signs rely on.
TEST(KoszulSign, GradedSignComposes) {
  std::mt19937_64 rng(101);
  for (int l = 2; l <= 5; ++l) {
    std::vector<int> base(static_cast<size_t>(l));
    std::iota(base.begin(), base.end(), 0);
    for (int rep = 0; rep < 200; ++rep) {
      std::vector<int> q = base, p = base;
      std::shuffle(q.begin(), q.end(), rng);
      std::shuffle(p.begin(), p.end(), rng);
      std::vector<int> degs = random_degs(rng, static_cast<size_t>(l));
      // list1[a] = old[q[a]]; list2[b] = list1[p[b]] = old[q[p[b]]].
      std::vector<int> r(static_cast<size_t>(l)), degs1(static_cast<size_t>(l));
      for (int b = 0; b < l; ++b) r[static_cast<size_t>(b)] = q[static_cast<size_t>(p[static_cast<size_t>(b)])];
      for (int a = 0; a < l; ++a) degs1[static_cast<size_t>(a)] = degs[static_cast<size_t>(q[static_cast<size_t>(a)])];
      EXPECT_EQ(naive_graded_perm_sign(r, degs),
                naive_graded_perm_sign(q, degs) ^ naive_graded_perm_sign(p, degs1));
    }
  }
}

// ---------------------------------------------------------------------------
// epsilon
// ---------------------------------------------------------------------------

TEST(Epsilon, EmptyInputsGiveOddParity) {
  // k = 0, l = 0: the formula reduces to the constant term 1.
  for (int n = 0; n <= 3; ++n) EXPECT_TRUE(epsilon({}, {}, n).is_odd());
}

TEST(Epsilon, SingleDegreeZeroInputEvenDimension) {
  // k = 1, |alpha_1| = 0, l = 0, n even: 1*1 + 0 + n + 1 = n mod 2 = 0.
  EXPECT_TRUE(epsilon({0}, {}, 0).is_even());
  EXPECT_TRUE(epsilon({0}, {}, 2).is_even());
  EXPECT_TRUE(epsilon({0}, {}, 4).is_even());
}

TEST(Epsilon, HandEvaluatedThreeInputCase) {
  // k = 2, degrees (1,1), one interior input of degree 2, n = 1:
  // 1*2 + 2*2 + 2 + 2 + 1 = 11, odd.
  EXPECT_TRUE(epsilon({1, 1}, {2}, 1).is_odd());
}

TEST(Epsilon, FuzzAgainstNaive) {
  std::mt19937_64 rng(31337);
  for (int rep = 0; rep < 2000; ++rep) {
    auto ad = random_degs(rng, rng() % 5);
    auto gd = random_degs(rng, rng() % 5);
    int n = static_cast<int>(rng() % 5);
    EXPECT_EQ(epsilon(ad, gd, n).is_odd() ? 1 : 0, naive_epsilon(ad, gd, n));
  }
}

TEST(EpsilonMinus1, FormulaAndSpotChecks) {
  // parity of (sum |gamma| + n + 1).
  EXPECT_TRUE(epsilon_minus1({}, 0).is_odd());
  EXPECT_TRUE(epsilon_minus1({}, 1).is_even());
  EXPECT_TRUE(epsilon_minus1({2, 1}, 2).is_even());
  EXPECT_TRUE(epsilon_minus1({2, 2}, 2).is_odd());
}

// ---------------------------------------------------------------------------
// iota
// ---------------------------------------------------------------------------

TEST(Iota, EmptyPrefixFullISumsInteriorDegrees) {
  // i = 1 and I = [l]: only the sum over I survives.
  std::mt19937_64 rng(5);
  for (int l = 0; l <= 5; ++l) {
    std::vector<int> all(static_cast<size_t>(l));
    std::iota(all.begin(), all.end(), 0);
    SplitIJ s = make_split(l, all);
    for (int rep = 0; rep < 6; ++rep) {
      auto ad = random_degs(rng, rng() % 4);
      auto gd = random_degs(rng, static_cast<size_t>(l));
      EXPECT_EQ(iota(ad, gd, 1, s), parity_sum(gd));
    }
  }
}

TEST(Iota, EvenInteriorDegreesLeaveOnlyPrefixTerm) {
  std::mt19937_64 rng(6);
  for (int l = 0; l <= 4; ++l) {
    for (const SplitIJ& s : enumerate_splits(l)) {
      auto ad = random_degs(rng, 3);
      std::vector<int> gd(static_cast<size_t>(l), 2);
      for (int i = 1; i <= static_cast<int>(ad.size()) + 1; ++i) {
        long long prefix = 0;
        for (int j = 0; j < i - 1; ++j) prefix += ad[static_cast<size_t>(j)] + 1;
        EXPECT_EQ(iota(ad, gd, i, s), Parity::of(prefix));
      }
    }
  }
}

TEST(Iota, EmptyCaseIsEven) {
  SplitIJ s = make_split(0, {});
  EXPECT_TRUE(iota({}, {}, 1, s).is_even());
}

TEST(Iota, FuzzAgainstNaive) {
  std::mt19937_64 rng(90210);
  for (int rep = 0; rep < 1000; ++rep) {
    auto ad = random_degs(rng, rng() % 4);
    int l = static_cast<int>(rng() % 4);
    auto gd = random_degs(rng, static_cast<size_t>(l));
    auto splits = enumerate_splits(l);
    const SplitIJ& s = splits[rng() % splits.size()];
    int i = 1 + static_cast<int>(rng() % (ad.size() + 1));
    EXPECT_EQ(iota(ad, gd, i, s).is_odd() ? 1 : 0, naive_iota(ad, gd, i, s));
  }
}

// ---------------------------------------------------------------------------
// delta_glue
// ---------------------------------------------------------------------------

TEST(DeltaGlue, HandEvaluatedCases) {
  // k1=1, k2=0, i=1, n=2: 0 + 1 - 2 = -1, odd.
  EXPECT_TRUE(delta_glue(1, 0, 1, 2).is_odd());
  // Degenerate case i = k1 = k2 = 0: parity of -n, i.e. of n.
  EXPECT_TRUE(delta_glue(0, 0, 0, 0).is_even());
  EXPECT_TRUE(delta_glue(0, 0, 0, 1).is_odd());
  EXPECT_TRUE(delta_glue(0, 0, 0, 2).is_even());
  EXPECT_TRUE(delta_glue(0, 0, 0, 3).is_odd());
}

TEST(DeltaGlue, DimensionFlipAlwaystogglesParity) {
  for (int k1 = 0; k1 <= 4; ++k1)
    for (int k2 = 0; k2 <= 4; ++k2)
      for (int i = 0; i <= k1; ++i)
        for (int n = 0; n <= 4; ++n)
          EXPECT_NE(delta_glue(k1, k2, i, n), delta_glue(k1, k2, i, n + 1));
}

TEST(DeltaGlue, FuzzAgainstNaive) {
  std::mt19937_64 rng(404);
  for (int rep = 0; rep < 2000; ++rep) {
    int k1 = static_cast<int>(rng() % 6), k2 = static_cast<int>(rng() % 6);
    int i = static_cast<int>(rng() % (k1 + 1)), n = static_cast<int>(rng() % 6);
    EXPECT_EQ(delta_glue(k1, k2, i, n).is_odd() ? 1 : 0, naive_delta(k1, k2, i, n));
  }
}

// ---------------------------------------------------------------------------
// cyclic_sign
// ---------------------------------------------------------------------------

TEST(CyclicSign, AllOddDegreesGiveEven) {
  EXPECT_TRUE(cyclic_sign({1, 1, 1}).is_even());
  EXPECT_TRUE(cyclic_sign({3, 1, 5, 1}).is_even());
}

TEST(CyclicSign, HandEvaluatedCases) {
  // k = 1, degrees (0,0): (0+1)*(0+1) = 1, odd.
  EXPECT_TRUE(cyclic_sign({0, 0}).is_odd());
  // k = 2, degrees (1,0,1): (1+1)*((1+1)+(0+1)) = 2*3 = 6, even.
  EXPECT_TRUE(cyclic_sign({1, 0, 1}).is_even());
}

TEST(CyclicSign, FuzzAgainstNaive) {
  std::mt19937_64 rng(8);
  for (int rep = 0; rep < 2000; ++rep) {
    auto degs = random_degs(rng, 1 + rng() % 5);
    EXPECT_EQ(cyclic_sign(degs).is_odd() ? 1 : 0, naive_cyclic(degs));
  }
}

// ---------------------------------------------------------------------------
// Enumerations
// ---------------------------------------------------------------------------

TEST(EnumeratePartitions, CountsAndValidity) {
  EXPECT_EQ(enumerate_partitions(0).size(), 1u);
  EXPECT_EQ(enumerate_partitions(2).size(), 6u);
  for (int k = 0; k <= 6; ++k) {
    auto parts = enumerate_partitions(k);
    EXPECT_EQ(parts.size(), static_cast<size_t>((k + 1) * (k + 2) / 2));
    std::map<std::pair<int, int>, int> seen;
    for (const auto& p : parts) {
      EXPECT_TRUE(p.valid());
      EXPECT_EQ(p.k, k);
      EXPECT_EQ(p.i1 + p.i2 + p.block3_len(), k);
      ++seen[{p.i1, p.i2}];
    }
    EXPECT_EQ(seen.size(), parts.size()) << "duplicates at k=" << k;
  }
}

TEST(EnumerateSplits, CountsValidityAndComplementarity) {
  EXPECT_EQ(enumerate_splits(3).size(), 8u);
  for (int l = 0; l <= 8; ++l) {
    auto splits = enumerate_splits(l);
    EXPECT_EQ(splits.size(), static_cast<size_t>(1) << l);
    std::map<std::vector<int>, int> seen;
    for (const auto& s : splits) {
      EXPECT_TRUE(s.valid());
      // Merge of I and J in increasing order is [0, l).
      std::vector<int> merged(s.I);
      merged.insert(merged.end(), s.J.begin(), s.J.end());
      std::sort(merged.begin(), merged.end());
      for (int j = 0; j < l; ++j) EXPECT_EQ(merged[static_cast<size_t>(j)], j);
      ++seen[s.I];
    }
    EXPECT_EQ(seen.size(), splits.size()) << "duplicates at l=" << l;
  }
}

}  // namespace
}  // namespace ainfty
