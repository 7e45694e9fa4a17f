#pragma once
// Concrete sample instances used by the test suite, the bundled data files,
// and the end-to-end checks: small boundary/ambient model pairs with
// restriction maps, period tables, and (where applicable) hand-built
// correlator tensors.

#include "ainfty/mstruct.hpp"
#include "ainfty/qops.hpp"

namespace ainfty {

struct Instance {
  CorrelatorData data;
  CElem gamma;  // bulk class, over the ambient model

  Instance() : gamma(nullptr, nullptr) {}
};

// Boundary circle inside the 2-sphere model, restriction killing the area
// class.  No positive-energy tensors: every operation reduces to the
// differential/product layer.
inline Instance instance_energy_zero_circle() {
  Instance ins;
  ModelPtr L = build_circle();
  ModelPtr X = build_sphere2();
  auto ctx = std::make_shared<RingContext>(
      std::vector<LatticeGen>{{Rat(1), 2}}, std::vector<long>{2, 0}, Rat(2));
  RelativePair rel;
  rel.X = X;
  rel.L = L;
  rel.r = {Vec{{L->unit, Rat(1)}}, Vec{}};  // 1 -> 1, area class -> 0
  rel.periods = {RatVec(2, Rat(0))};
  ins.data.rctx = ctx;
  ins.data.L = L;
  ins.data.X = X;
  ins.data.rel = rel;
  ins.data.K_max = 3;
  ins.data.L_max = 2;
  // gamma = t0 * 1 + t1 * (area class)
  ins.gamma = CElem::monomial(X, ctx, X->unit, RingElem::tvar(ctx, 0)) +
              CElem::monomial(X, ctx, 1, RingElem::tvar(ctx, 1));
  return ins;
}

// Two-torus boundary inside the four-dimensional nilmanifold model, with the
// restriction killing all positive-degree classes.  Again no positive-energy
// tensors; the ambient differential is nontrivial, which exercises the
// differential terms of the structure relations.
inline Instance instance_energy_zero_torus() {
  Instance ins;
  ModelPtr L = build_torus2();
  ModelPtr X = build_nilmanifold4();
  auto ctx = std::make_shared<RingContext>(
      std::vector<LatticeGen>{{Rat(1), 2}}, std::vector<long>{2, 0}, Rat(2));
  RelativePair rel;
  rel.X = X;
  rel.L = L;
  rel.r.assign(static_cast<size_t>(X->size()), Vec{});
  rel.r[static_cast<size_t>(X->unit)] = Vec{{L->unit, Rat(1)}};
  rel.periods = {RatVec(static_cast<size_t>(X->size()), Rat(0))};
  ins.data.rctx = ctx;
  ins.data.L = L;
  ins.data.X = X;
  ins.data.rel = rel;
  ins.data.K_max = 3;
  ins.data.L_max = 2;
  int xz = 1 | 4;  // the closed relative degree-2 direction x^z
  ins.gamma = CElem::monomial(X, ctx, X->unit, RingElem::tvar(ctx, 0)) +
              CElem::monomial(X, ctx, xz, RingElem::tvar(ctx, 1));
  return ins;
}

// Hand-built positive-energy dataset over the torus/nilmanifold pair with a
// nontrivial restriction (x -> theta_1, w -> theta_2, y, z -> 0).  The disk
// tower at arity zero is the divisor tower of the x^z direction; the sphere
// channel carries the matching correction so that the scalar relations
// balance with sphere sign +1 (and only +1).  No deformation variables.
inline Instance instance_gw_flag() {
  Instance ins;
  ModelPtr L = build_torus2();
  ModelPtr X = build_nilmanifold4();
  auto ctx = std::make_shared<RingContext>(
      std::vector<LatticeGen>{{Rat(1), 2}}, std::vector<long>{}, Rat(1));
  RelativePair rel;
  rel.X = X;
  rel.L = L;
  rel.r.assign(static_cast<size_t>(X->size()), Vec{});
  // Multiplicative extension of x -> theta_1, w -> theta_2, y, z -> 0.
  // Basis masks: bit0 = x, bit1 = y, bit2 = z, bit3 = w; torus: 1 -> index 0,
  // theta_1 -> 1, theta_2 -> 2, theta_1 theta_2 -> 3.
  rel.r[0] = Vec{{0, Rat(1)}};
  rel.r[1] = Vec{{1, Rat(1)}};        // x -> theta_1
  rel.r[8] = Vec{{2, Rat(1)}};        // w -> theta_2
  rel.r[1 | 8] = Vec{{3, Rat(1)}};    // x^w -> theta_1 theta_2
  int xz = 1 | 4, xw = 1 | 8;
  RatVec per(static_cast<size_t>(X->size()), Rat(0));
  per[static_cast<size_t>(xz)] = Rat(1);
  rel.periods = {per};
  ins.data.rctx = ctx;
  ins.data.L = L;
  ins.data.X = X;
  ins.data.rel = rel;
  ins.data.K_max = 0;
  ins.data.L_max = 3;
  ins.data.has_sphere = true;
  ins.data.gw_sign = +1;
  Beta b1{1};
  // Disk divisor tower, including the arity-zero seed at l = 0.  Raw tensors
  // are stored before the evaluation dressing; at arity zero with even
  // interior degrees the dressing contributes a factor of -1, so the raw
  // value -1_L makes the dressed operator the positive unit tower.
  ins.data.disk[DiskKey{b1, 0, 0}][Tuple{}] = Vec{{L->unit, rat(-1)}};
  for (int l = 1; l <= 3; ++l) {
    // Disk: dressed value 1_L on the all-(x^z) tuple.
    std::map<Tuple, Vec>& dt = ins.data.disk[DiskKey{b1, 0, l}];
    dt[Tuple(static_cast<size_t>(l), xz)] = Vec{{L->unit, rat(-1)}};
    // Sphere: value -x^w on tuples with exactly one x^w slot among x^z's.
    std::map<Tuple, Vec>& st = ins.data.sphere[IntKey{b1, l}];
    for (int p = 0; p < l; ++p) {
      Tuple t(static_cast<size_t>(l), xz);
      t[static_cast<size_t>(p)] = xw;
      st[t] = Vec{{xw, rat(-1)}};
    }
  }
  ins.gamma = CElem(X, ctx);  // no deformation class in this dataset
  return ins;
}

}  // namespace ainfty
