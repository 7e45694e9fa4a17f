// Tests for the truncated Novikov ring: constructors, cutoff behavior, the
// valuation, grading, derivations, and the ring axioms on random elements.

#include "ainfty/novikov.hpp"

#include <gtest/gtest.h>

#include <random>

namespace ainfty {
namespace {

// Rank-2 lattice, energies 1 and 3/2, Maslov 2 and 0; two formal variables of
// degrees 2 and 0.
RingContextPtr ctx2(Rat cutoff = Rat(10)) {
  return std::make_shared<RingContext>(
      std::vector<LatticeGen>{{rat(1), 2}, {rat(3, 2), 0}},
      std::vector<long>{2, 0}, cutoff);
}

RingElem random_elem(const RingContextPtr& c, std::mt19937_64& rng, int max_terms = 4) {
  RingElem e = RingElem::zero(c);
  int nterms = static_cast<int>(rng() % static_cast<unsigned>(max_terms + 1));
  for (int i = 0; i < nterms; ++i) {
    Beta b{static_cast<int>(rng() % 3), static_cast<int>(rng() % 2)};
    TExp t{static_cast<int>(rng() % 3), static_cast<int>(rng() % 2)};
    long num = static_cast<long>(rng() % 7) - 3;
    long den = 1 + static_cast<long>(rng() % 3);
    e = e + RingElem::monomial(c, b, t, rat(num, den));
  }
  return e;
}

TEST(RingContext, ValidationErrors) {
  EXPECT_THROW(RingContext({{rat(0), 2}}, {}, rat(1)), std::invalid_argument);
  EXPECT_THROW(RingContext({{rat(-1), 2}}, {}, rat(1)), std::invalid_argument);
  EXPECT_THROW(RingContext({{rat(1), 3}}, {}, rat(1)), std::invalid_argument);
  EXPECT_THROW(RingContext({{rat(1), 2}}, {1}, rat(1)), std::invalid_argument);
  EXPECT_NO_THROW(RingContext({{rat(1), 2}}, {2, 0}, rat(1)));
}

TEST(RingContext, EnergyMaslovAdditivity) {
  auto c = ctx2();
  Beta b1{1, 0}, b2{0, 1}, b3{1, 1};
  EXPECT_EQ(c->omega(b3), c->omega(b1) + c->omega(b2));
  EXPECT_EQ(c->maslov(b3), c->maslov(b1) + c->maslov(b2));
  EXPECT_EQ(c->omega(c->beta_zero()), 0);
}

TEST(RingAdd, ZeroIsIdentity) {
  auto c = ctx2();
  std::mt19937_64 rng(1);
  for (int rep = 0; rep < 20; ++rep) {
    RingElem x = random_elem(c, rng);
    EXPECT_EQ(x + RingElem::zero(c), x);
  }
}

TEST(RingAdd, LikeTermsCombine) {
  auto c = ctx2();
  Beta b{1, 0};
  RingElem two = rat(2) * RingElem::tpow(c, b);
  RingElem three = rat(3) * RingElem::tpow(c, b);
  EXPECT_EQ(two + three, rat(5) * RingElem::tpow(c, b));
}

TEST(RingAdd, CutoffDropSetsFlag) {
  // A monomial of weight 2 under cutoff 1 is dropped at construction and the
  // element remembers that it is only zero below the cutoff.
  auto c = std::make_shared<RingContext>(std::vector<LatticeGen>{{rat(2), 0}},
                                         std::vector<long>{}, rat(1));
  RingElem x = RingElem::tpow(c, Beta{1});
  EXPECT_TRUE(x.is_zero());
  EXPECT_TRUE(x.truncated());
  RingElem y = x + RingElem::zero(c);
  EXPECT_TRUE(y.is_zero());
  EXPECT_TRUE(y.truncated());
  EXPECT_FALSE(RingElem::zero(c).truncated());
}

TEST(RingMul, MonomialExponentsAdd) {
  auto c = ctx2();
  Beta b1{1, 0}, b2{0, 1}, b12{1, 1};
  EXPECT_EQ(RingElem::tpow(c, b1) * RingElem::tpow(c, b2), RingElem::tpow(c, b12));
}

TEST(RingMul, OneIsIdentity) {
  auto c = ctx2();
  std::mt19937_64 rng(2);
  for (int rep = 0; rep < 20; ++rep) {
    RingElem x = random_elem(c, rng);
    EXPECT_EQ(RingElem::one(c) * x, x);
  }
}

TEST(RingMul, BinomialSquareAndTruncation) {
  // (t_0 + T^b)^2 with omega(b) = 1: all three quadratic terms have weight 2.
  auto mk = [](Rat E) {
    return std::make_shared<RingContext>(std::vector<LatticeGen>{{rat(1), 2}},
                                         std::vector<long>{2}, E);
  };
  {
    auto c = mk(rat(2));
    RingElem s = RingElem::tvar(c, 0) + RingElem::tpow(c, Beta{1});
    RingElem sq = s * s;
    RingElem expect = RingElem::monomial(c, Beta{0}, TExp{2}, 1) +
                      rat(2) * RingElem::monomial(c, Beta{1}, TExp{1}, 1) +
                      RingElem::tpow(c, Beta{2});
    EXPECT_EQ(sq, expect);
    EXPECT_FALSE(sq.truncated());
  }
  {
    auto c = mk(rat(1));
    RingElem s = RingElem::tvar(c, 0) + RingElem::tpow(c, Beta{1});
    RingElem sq = s * s;
    EXPECT_TRUE(sq.is_zero());
    EXPECT_TRUE(sq.truncated());
  }
}

TEST(RingTDeriv, BasicCases) {
  auto c = ctx2();
  Beta b{1, 0};
  // d/dt0 (t0 * T^b) = T^b
  RingElem x = RingElem::tvar(c, 0) * RingElem::tpow(c, b);
  EXPECT_EQ(x.tderiv(0), RingElem::tpow(c, b));
  // d/dt1 (t0) = 0
  EXPECT_TRUE(RingElem::tvar(c, 0).tderiv(1).is_zero());
  // d/dt0 (t0^2 t1) = 2 t0 t1
  RingElem y = RingElem::monomial(c, c->beta_zero(), TExp{2, 1}, 1);
  EXPECT_EQ(y.tderiv(0), RingElem::monomial(c, c->beta_zero(), TExp{1, 1}, 2));
  EXPECT_THROW(y.tderiv(7), std::invalid_argument);
}

TEST(Valuation, BasicCases) {
  auto c = ctx2();
  EXPECT_FALSE(RingElem::zero(c).valuation().has_value());  // +infinity
  // t0 * T^b with omega(b) = 1 has weight 1 + 1 = 2.
  RingElem x = RingElem::tvar(c, 0) * RingElem::tpow(c, Beta{1, 0});
  ASSERT_TRUE(x.valuation().has_value());
  EXPECT_EQ(*x.valuation(), rat(2));
}

TEST(Valuation, SubmultiplicativeAndSubadditive) {
  auto c = ctx2();
  std::mt19937_64 rng(3);
  for (int rep = 0; rep < 200; ++rep) {
    RingElem x = random_elem(c, rng), y = random_elem(c, rng);
    auto vx = x.valuation(), vy = y.valuation();
    auto vxy = (x * y).valuation(), vsum = (x + y).valuation();
    if (vxy) {
      ASSERT_TRUE(vx && vy);
      EXPECT_GE(*vxy, *vx + *vy);
    }
    if (vsum) {
      Rat m = vx && vy ? std::min(*vx, *vy) : (vx ? *vx : *vy);
      EXPECT_GE(*vsum, m);
    }
  }
}

TEST(Valuation, EqualityWhenLeadingTermsSurvive) {
  auto c = ctx2();
  // Distinct leading monomials: minimum is attained exactly.
  RingElem x = RingElem::tpow(c, Beta{1, 0});  // weight 1
  RingElem y = RingElem::tvar(c, 1);           // weight 1
  EXPECT_EQ(*(x + y).valuation(), rat(1));
  // Cancellation can raise the valuation strictly.
  RingElem z = -x + RingElem::tpow(c, Beta{2, 0});  // weights 1 and 2
  EXPECT_EQ(*(x + z).valuation(), rat(2));
}

TEST(RingAxioms, RandomSamples) {
  auto c = ctx2(rat(4));  // low cutoff so truncation interacts with the axioms
  std::mt19937_64 rng(4);
  for (int rep = 0; rep < 100; ++rep) {
    RingElem x = random_elem(c, rng), y = random_elem(c, rng), z = random_elem(c, rng);
    EXPECT_EQ(x * y, y * x);
    EXPECT_EQ((x * y) * z, x * (y * z));
    EXPECT_EQ(x * (y + z), x * y + x * z);
    EXPECT_EQ((x + y) + z, x + (y + z));
  }
}

TEST(Grading, MonomialGradeAndAdditivity) {
  auto c = ctx2();
  // grade(t0 T^{b1}) = maslov(b1) + deg(t0) = 2 + 2.
  RingElem x = RingElem::tvar(c, 0) * RingElem::tpow(c, Beta{1, 0});
  EXPECT_EQ(*x.grade(), 4);
  // t1 has degree 0; adding it to x breaks homogeneity.
  EXPECT_FALSE((x + RingElem::tvar(c, 1)).is_homogeneous());
  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 100; ++rep) {
    Beta b1{static_cast<int>(rng() % 3), static_cast<int>(rng() % 2)};
    Beta b2{static_cast<int>(rng() % 3), static_cast<int>(rng() % 2)};
    TExp t1{static_cast<int>(rng() % 2), static_cast<int>(rng() % 2)};
    TExp t2{static_cast<int>(rng() % 2), static_cast<int>(rng() % 2)};
    RingElem m1 = RingElem::monomial(c, b1, t1, rat(2));
    RingElem m2 = RingElem::monomial(c, b2, t2, rat(1, 3));
    ASSERT_FALSE((m1 * m2).is_zero());
    EXPECT_EQ(*(m1 * m2).grade(), *m1.grade() + *m2.grade());
  }
}

TEST(ConstantTerm, ReductionIsRingMorphism) {
  auto c = ctx2();
  std::mt19937_64 rng(6);
  for (int rep = 0; rep < 100; ++rep) {
    RingElem x = random_elem(c, rng), y = random_elem(c, rng);
    EXPECT_EQ((x + y).constant_term(), x.constant_term() + y.constant_term());
    EXPECT_EQ((x * y).constant_term(), x.constant_term() * y.constant_term());
  }
  EXPECT_EQ(RingElem::one(c).constant_term(), rat(1));
}

TEST(Context, MismatchErrors) {
  auto ca = ctx2(rat(10));
  auto cb = ctx2(rat(5));  // different cutoff -> different context
  RingElem x = RingElem::one(ca), y = RingElem::one(cb);
  EXPECT_THROW(x + y, std::invalid_argument);
  EXPECT_THROW(x * y, std::invalid_argument);
  // Structurally equal contexts held by different pointers are compatible.
  auto ca2 = ctx2(rat(10));
  EXPECT_NO_THROW(x + RingElem::one(ca2));
}

}  // namespace
}  // namespace ainfty
