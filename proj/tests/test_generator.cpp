// Tests for the obstruction-theory synthesis layer: the slot solve order,
// homotopy-package validation, obstruction tensors against hand enumerations,
// the single-slot homotopy solve (round trips, injected harmonic residues),
// full dataset generation with independent re-verification, determinism, and
// a pseudo-isotopy run over generated (nonconstant) data.
#include <gtest/gtest.h>

#include "ainfty/generator.hpp"
#include "ainfty/instances.hpp"
#include "ainfty/isotopy.hpp"
#include "ainfty/mstruct.hpp"

namespace ainfty {
namespace {

bool has_failure(const Report& r, const std::string& name_part) {
  for (const auto& item : r.items)
    if (!item.pass && item.name.find(name_part) != std::string::npos) return true;
  return false;
}

std::string detail_of(const Report& r, const std::string& name) {
  for (const auto& item : r.items)
    if (item.name == name) return item.detail;
  return "(missing item: " + name + ")";
}

bool item_passes(const Report& r, const std::string& name) {
  for (const auto& item : r.items)
    if (item.name == name) return item.pass;
  return false;
}

// --- Solve order -------------------------------------------------------------

TEST(GeneratorOrder, OrderedByEnergyThenCombinedArity) {
  Instance ins = instance_energy_zero_torus();
  std::vector<SlotRef> order = solve_order(*ins.data.rctx, 3, 2);
  ASSERT_EQ(order.size(), 30u);

  // Per energy level: k + 2l ascending (scalar channel at 2l - 1), then k.
  std::vector<std::pair<int, int>> want = {{-1, 0}, {0, 0}, {-1, 1}, {1, 0}, {0, 1},
                                           {2, 0},  {-1, 2}, {1, 1}, {3, 0}, {0, 2},
                                           {2, 1},  {1, 2},  {3, 1}, {2, 2}, {3, 2}};
  for (size_t i = 0; i < 15; ++i) {
    EXPECT_EQ(order[i].beta, (Beta{1})) << i;
    EXPECT_EQ(order[i].k, want[i].first) << i;
    EXPECT_EQ(order[i].l, want[i].second) << i;
    EXPECT_EQ(order[i + 15].beta, (Beta{2})) << i;
    EXPECT_EQ(order[i + 15].k, want[i].first) << i;
    EXPECT_EQ(order[i + 15].l, want[i].second) << i;
  }
}

TEST(GeneratorOrder, DegenerationTargetsComeEarlier) {
  Instance ins = instance_energy_zero_torus();
  SolveOrder lt{ins.data.rctx.get()};
  Beta b{1};
  // The mixed degeneration at (k, l) references (k+1, l-1) at the same
  // energy: one step earlier in the combined metric.
  for (int k = 0; k <= 2; ++k)
    for (int l = 1; l <= 2; ++l)
      EXPECT_TRUE(lt(SlotRef{b, k + 1, l - 1}, SlotRef{b, k, l}));
  // The scalar channel at interior arity l needs the disk tensor (0, l-1).
  for (int l = 1; l <= 2; ++l) EXPECT_TRUE(lt(SlotRef{b, 0, l - 1}, SlotRef{b, -1, l}));
  // Lower energy always precedes, regardless of arity.
  EXPECT_TRUE(lt(SlotRef{b, 3, 2}, SlotRef{Beta{2}, -1, 0}));
}

// --- Homotopy package --------------------------------------------------------

TEST(HomotopyPackage, ShippedModelsPass) {
  for (const auto& [m, label] :
       std::vector<std::pair<ModelPtr, std::string>>{{build_circle(), "circle"},
                                                     {build_torus2(), "torus"},
                                                     {build_sphere2(), "sphere"},
                                                     {build_nilmanifold4(), "nilmanifold"}}) {
    Report rep = check_homotopy_package(*m, label);
    EXPECT_TRUE(rep.all_pass()) << label << "\n" << rep.to_string();
  }
}

TEST(HomotopyPackage, CorruptedHomotopyIsRefused) {
  auto bad = std::make_shared<CDGAModel>(*build_nilmanifold4());
  bad->h[3] = Vec{{4, Rat(2)}};  // doubles the contraction of the exact class
  Report rep = check_homotopy_package(*bad, "X");
  EXPECT_FALSE(rep.all_pass());
  EXPECT_TRUE(has_failure(rep, "homotopy_splits"));

  Instance ins = instance_energy_zero_torus();
  RelativePair rel = ins.data.rel;
  rel.X = bad;
  GenerateResult res = generate(ins.data.rctx, ins.data.L, bad, rel, 1, 1);
  EXPECT_FALSE(res.ok);
  EXPECT_FALSE(item_passes(res.report, "generation_complete"));
}

// --- Obstruction tensors -----------------------------------------------------

TEST(Obstruction, EmptyPriorsGiveZeroObstructions) {
  Instance ins = instance_energy_zero_torus();
  const CorrelatorData& D = ins.data;
  for (const Beta& b : {Beta{1}, Beta{2}})
    for (int k = 0; k <= 2; ++k)
      for (int l = 0; l <= 1; ++l) EXPECT_TRUE(obstruction(D, b, k, l).empty());
  for (int l = 0; l <= 2; ++l) EXPECT_TRUE(obstruction_minus1(D, Beta{1}, l).empty());
}

TEST(Obstruction, EnergyZeroSlotIsRejected) {
  Instance ins = instance_energy_zero_torus();
  EXPECT_THROW(obstruction(ins.data, Beta{0}, 1, 0), std::invalid_argument);
  EXPECT_THROW(obstruction_minus1(ins.data, Beta{0}, 1), std::invalid_argument);
}

TEST(Obstruction, MissingEarlierSlotThrows) {
  Instance ins = instance_energy_zero_torus();
  GeneratorSession sess(ins.data.rctx, ins.data.L, ins.data.X, ins.data.rel, 3, 2);
  EXPECT_THROW(sess.obstruction_at(Beta{1}, 2, 0), std::logic_error);
  sess.install_minus1(Beta{1}, 0, {});
  sess.install_disk(Beta{1}, 0, 0, {});
  sess.install_minus1(Beta{1}, 1, {});
  sess.install_disk(Beta{1}, 1, 0, {});
  EXPECT_THROW(sess.obstruction_at(Beta{1}, 2, 0), std::logic_error);
  sess.install_disk(Beta{1}, 0, 1, {});
  EXPECT_NO_THROW(sess.obstruction_at(Beta{1}, 2, 0));
}

// A unit-valued arity-zero tensor produces no obstruction at arity one: its
// two product degenerations cancel against each other, slot by slot.
TEST(Obstruction, UnitValuedSeedCancelsAtArityOne) {
  Instance ins = instance_energy_zero_torus();
  GeneratorSession sess(ins.data.rctx, ins.data.L, ins.data.X, ins.data.rel, 3, 2);
  sess.install_minus1(Beta{1}, 0, {});
  sess.install_disk(Beta{1}, 0, 0, DiskTensor{{Tuple{}, Vec{{0, Rat(5)}}}});
  sess.install_minus1(Beta{1}, 1, {});
  EXPECT_TRUE(sess.obstruction_at(Beta{1}, 1, 0).empty());
}

// Hand enumeration of the first nonzero obstruction: with the arity-one
// tensor theta1 -> 1 installed at energy one, the arity-two obstruction
// collects exactly the four product degenerations against the pinned
// energy-zero product, with unit keys cancelling.
TEST(Obstruction, HandEnumeratedArityTwoObstruction) {
  Instance ins = instance_energy_zero_torus();
  GeneratorSession sess(ins.data.rctx, ins.data.L, ins.data.X, ins.data.rel, 3, 2);
  Beta b{1};
  sess.install_minus1(b, 0, {});
  sess.install_disk(b, 0, 0, {});
  sess.install_minus1(b, 1, {});
  sess.install_disk(b, 1, 0, DiskTensor{{Tuple{1}, Vec{{0, Rat(1)}}}});
  sess.install_disk(b, 0, 1, {});

  DiskTensor O = sess.obstruction_at(b, 2, 0);
  DiskTensor want{{Tuple{1, 2}, Vec{{2, Rat(-1)}}},
                  {Tuple{2, 1}, Vec{{2, Rat(1)}}},
                  {Tuple{1, 3}, Vec{{3, Rat(-1)}}},
                  {Tuple{3, 1}, Vec{{3, Rat(1)}}}};
  EXPECT_EQ(O, want);

  // Linearity anchor: the full residual with a trial tensor at the slot is
  // obstruction plus the slot's own terms, key by key.
  DiskTensor trial{{Tuple{1, 2}, Vec{{0, Rat(2)}}}, {Tuple{3, 3}, Vec{{2, Rat(-3)}}}};
  DiskTensor top = relation_top_terms(sess.data(), b, 2, 0, trial);
  DiskTensor expect = gendetail::tensor_sum(O, top, Rat(1));

  GeneratorSession sess2(ins.data.rctx, ins.data.L, ins.data.X, ins.data.rel, 3, 2);
  sess2.install_disk(b, 1, 0, DiskTensor{{Tuple{1}, Vec{{0, Rat(1)}}}});
  sess2.install_disk(b, 2, 0, trial);
  DiskTensor full;
  for (const Tuple& at : enumerate_tuples(2, ins.data.L->size())) {
    Vec r = q_relation_residual(sess2.data(), b, 2, 0, at, Tuple{});
    if (!r.empty()) full[at] = r;
  }
  EXPECT_EQ(full, expect);
}

// --- Single-slot solve -------------------------------------------------------

TEST(SlotSolve, ZeroObstructionGivesZeroTensor) {
  Instance ins = instance_energy_zero_torus();
  SlotSolution sol = solve_slot(ins.data, Beta{1}, 1, 1, {});
  EXPECT_FALSE(sol.obstructed);
  EXPECT_TRUE(sol.lambda_raw.empty());
  EXPECT_TRUE(sol.residue.empty());
  EXPECT_EQ(sol.consistency, "both");
}

// Round trip: an obstruction manufactured from a trial tensor y is exact by
// construction, and the solve returns a tensor with the same slot terms.
TEST(SlotSolve, RoundTripThroughSlotTerms) {
  Instance ins = instance_energy_zero_torus();
  const CorrelatorData& D = ins.data;
  Beta b{1};
  DiskTensor y{{Tuple{1, 3}, Vec{{0, Rat(1)}}}};  // (theta1; xy) -> 1
  DiskTensor dy = relation_top_terms(D, b, 1, 1, y);
  ASSERT_FALSE(dy.empty());
  DiskTensor O = gendetail::tensor_sum({}, dy, Rat(-1));

  SlotSolution sol = solve_slot(D, b, 1, 1, O);
  EXPECT_FALSE(sol.obstructed) << tuple_str(sol.residue.begin()->first);
  EXPECT_TRUE(sol.consistency == "+1" || sol.consistency == "both") << sol.consistency;
  EXPECT_EQ(relation_top_terms(D, b, 1, 1, sol.lambda_raw), dy);
}

TEST(SlotSolve, InjectedHarmonicPartIsReportedAsResidue) {
  Instance ins = instance_energy_zero_torus();
  const CorrelatorData& D = ins.data;
  Beta b{1};
  // Harmonic on both sides: value theta2, inputs theta1 (boundary) and the
  // closed non-exact interior class xz.
  DiskTensor psi_dressed{{Tuple{1, 5}, Vec{{2, Rat(1)}}}};
  DiskTensor psi_raw = gendetail::dress_disk(D, 1, 1, psi_dressed);

  SlotSolution sol = solve_slot(D, b, 1, 1, psi_raw);
  EXPECT_TRUE(sol.obstructed);
  EXPECT_EQ(sol.residue, psi_dressed);
  EXPECT_EQ(sol.consistency, "both");

  // Adding a solvable part does not change the reported residue.
  DiskTensor y{{Tuple{1, 3}, Vec{{0, Rat(1)}}}};
  DiskTensor dy = relation_top_terms(D, b, 1, 1, y);
  DiskTensor mixed = gendetail::tensor_sum(psi_raw, dy, Rat(-1));
  SlotSolution sol2 = solve_slot(D, b, 1, 1, mixed);
  EXPECT_TRUE(sol2.obstructed);
  EXPECT_EQ(sol2.residue, psi_dressed);
}

TEST(SlotSolve, ScalarChannelRoundTrip) {
  Instance ins = instance_energy_zero_torus();
  const CorrelatorData& D = ins.data;
  Beta b{1};
  ScalarTensor y{{Tuple{3, 7}, Rat(3)}};  // (xy, xyz) -> 3
  ScalarTensor dy = relation_top_terms_minus1(D, b, 2, y);
  ASSERT_FALSE(dy.empty());
  ScalarTensor O;
  for (const auto& [key, v] : dy) O[key] = -v;

  ScalarSlotSolution sol = solve_slot_minus1(D, b, 2, O);
  EXPECT_FALSE(sol.obstructed);
  EXPECT_EQ(sol.consistency, "closed");
  EXPECT_EQ(relation_top_terms_minus1(D, b, 2, sol.lambda_raw), dy);
}

// An obstruction that is genuinely harmonic cannot be solved; on a closed
// boundary model the whole tensor is its own residue.
TEST(SlotSolve, HandObstructionFromIncoherentSeedIsGenuine) {
  Instance ins = instance_energy_zero_torus();
  GeneratorSession sess(ins.data.rctx, ins.data.L, ins.data.X, ins.data.rel, 3, 2);
  Beta b{1};
  sess.install_disk(b, 1, 0, DiskTensor{{Tuple{1}, Vec{{0, Rat(1)}}}});
  DiskTensor O = obstruction(sess.data(), b, 2, 0);
  ASSERT_FALSE(O.empty());
  SlotSolution sol = solve_slot(sess.data(), b, 2, 0, O);
  EXPECT_TRUE(sol.obstructed);
  EXPECT_EQ(sol.residue, gendetail::dress_disk(sess.data(), 2, 0, O));
}

// --- Full synthesis ----------------------------------------------------------

TEST(Generate, ZeroGeneratorLatticeGivesEnergyZeroDataset) {
  Instance ins = instance_energy_zero_torus();
  auto ctx0 = std::make_shared<RingContext>(std::vector<LatticeGen>{}, std::vector<long>{},
                                            Rat(1));
  GenerateResult res = generate(ctx0, ins.data.L, ins.data.X, ins.data.rel, 3, 2);
  EXPECT_TRUE(res.ok);
  EXPECT_TRUE(res.data.disk.empty());
  EXPECT_TRUE(res.data.minus1.empty());
  EXPECT_TRUE(res.report.all_pass()) << res.report.to_string();
}

TEST(Generate, NoiselessRunWithZeroPeriodsIsEmpty) {
  Instance ins = instance_energy_zero_torus();
  GenerateOptions opt;
  opt.randomize_scale = 0;
  GenerateResult res =
      generate(ins.data.rctx, ins.data.L, ins.data.X, ins.data.rel, 3, 2, opt);
  EXPECT_TRUE(res.ok) << res.report.to_string();
  EXPECT_TRUE(res.data.disk.empty());
  EXPECT_TRUE(res.data.minus1.empty());
}

TEST(Generate, TorusTargetPassesIndependentChecks) {
  Instance ins = instance_energy_zero_torus();
  RelativePair rel = ins.data.rel;
  rel.periods[0][5] = Rat(1);  // period of the x^z direction on the generator
  GenerateOptions opt;
  opt.seed = 1;
  GenerateResult res = generate(ins.data.rctx, ins.data.L, ins.data.X, rel, 3, 2, opt);
  ASSERT_TRUE(res.ok) << res.report.to_string();
  EXPECT_FALSE(res.data.disk.empty());

  // Re-run every admissibility check independently of the attached report.
  EXPECT_TRUE(check_data_wellformed(res.data).all_pass());
  EXPECT_TRUE(check_q_relations(res.data).all_pass());
  EXPECT_TRUE(check_q_minus1_relations(res.data).all_pass());
  EXPECT_TRUE(check_chain_map(res.data).all_pass());

  // The attached report must agree item by item with a fresh axiom sweep:
  // statuses are honest, whether green or red.
  Report fresh = check_axioms_on_data(res.data);
  for (const auto& item : fresh.items)
    EXPECT_EQ(item.pass, item_passes(res.report, item.name)) << item.name;
}

TEST(Generate, DeterministicPerSeed) {
  Instance ins = instance_energy_zero_torus();
  RelativePair rel = ins.data.rel;
  rel.periods[0][5] = Rat(1);
  GenerateOptions opt;
  opt.seed = 7;
  GenerateResult a = generate(ins.data.rctx, ins.data.L, ins.data.X, rel, 2, 1, opt);
  GenerateResult b = generate(ins.data.rctx, ins.data.L, ins.data.X, rel, 2, 1, opt);
  EXPECT_TRUE(a.data.disk == b.data.disk);
  EXPECT_TRUE(a.data.minus1 == b.data.minus1);

  opt.seed = 8;
  GenerateResult c = generate(ins.data.rctx, ins.data.L, ins.data.X, rel, 2, 1, opt);
  EXPECT_TRUE(a.data.disk != c.data.disk || a.data.minus1 != c.data.minus1);
}

TEST(Generate, CyclicAveragingReportsHonestly) {
  Instance ins = instance_energy_zero_torus();
  RelativePair rel = ins.data.rel;
  rel.periods[0][5] = Rat(1);
  GenerateOptions plain;
  plain.seed = 1;
  GenerateOptions averaged = plain;
  averaged.cyclic_average = true;
  GenerateResult base = generate(ins.data.rctx, ins.data.L, ins.data.X, rel, 2, 1, plain);
  GenerateResult avg = generate(ins.data.rctx, ins.data.L, ins.data.X, rel, 2, 1, averaged);
  ASSERT_TRUE(avg.ok) << avg.report.to_string();

  std::string det = detail_of(avg.report, "cyclic_averaging");
  if (det == "kept") {
    EXPECT_TRUE(item_passes(check_axioms_on_data(avg.data), "cyclic_tensors"));
  } else {
    EXPECT_EQ(det.rfind("rolled back", 0), 0u) << det;
    EXPECT_TRUE(avg.data.disk == base.data.disk);
  }
  // Rollback or not, the relations stay exact.
  EXPECT_TRUE(check_q_relations(avg.data).all_pass());
}

// --- Generated data feeding the family layer ---------------------------------

TEST(GeneratedFamily, PseudoIsotopyOverGeneratedDataset) {
  Instance ins = instance_energy_zero_torus();
  GenerateOptions opt;
  opt.seed = 1;
  GenerateResult gen =
      generate(ins.data.rctx, ins.data.L, ins.data.X, ins.data.rel, 3, 2, opt);
  ASSERT_TRUE(gen.ok) << gen.report.to_string();
  const CorrelatorData& D = gen.data;
  auto ctx = D.rctx;

  CElem eta = CElem::monomial(D.X, ctx, 4, RingElem::tvar(ctx, 1));
  CElem gamma_prime = ins.gamma - eta.d();
  IntervalCElem gt = build_gamma_tilde(D, ins.gamma, gamma_prime, eta);
  IsotopyStructure I = build_isotopy(D, gt);
  AInftyStructure A0 = build_m(D, ins.gamma);
  AInftyStructure A1 = build_m(D, gamma_prime);

  Report rep = check_pseudo_isotopy(I, A0, A1);
  EXPECT_TRUE(rep.all_pass()) << rep.to_string();
  Report repu = check_uniform_relations(I, D);
  EXPECT_TRUE(repu.all_pass()) << repu.to_string();
  Report repf = check_endpoint_functor(D, I, gt, rat(1, 2));
  EXPECT_TRUE(repf.all_pass()) << repf.to_string();
}

}  // namespace
}  // namespace ainfty
