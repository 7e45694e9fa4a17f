// Regenerates the sample bundles shipped in bundles/.  Each file is a
// complete, self-describing instance; see docs/bundle_schema.md.
//
//   make_bundles [output-dir]          (default: bundles)

#include <iostream>
#include <string>

#include "ainfty/bundle.hpp"
#include "ainfty/instances.hpp"

namespace {

using namespace ainfty;

Bundle from_instance(const Instance& ins) {
  Bundle b;
  b.ctx = ins.data.rctx;
  b.L = ins.data.L;
  b.X = ins.data.X;
  b.rel = ins.data.rel;
  b.K_max = ins.data.K_max;
  b.L_max = ins.data.L_max;
  b.gw_sign = ins.data.gw_sign;
  b.has_sphere = ins.data.has_sphere;
  b.disk = ins.data.disk;
  b.minus1 = ins.data.minus1;
  b.sphere = ins.data.sphere;
  return b;
}

void emit(const Bundle& b, const std::string& dir, const std::string& name) {
  const std::string path = dir + "/" + name;
  write_bundle(b, path);
  // Re-parse what we wrote: the shipped samples must load cleanly.
  Bundle back = parse_bundle(path);
  if (emit_bundle_json(back) != emit_bundle_json(b))
    throw std::runtime_error(name + ": round trip is not the identity");
  std::cout << path << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  const std::string dir = argc > 1 ? argv[1] : "bundles";

  // Boundary circle inside a two-sphere, trivial lattice, no correlators:
  // the smallest complete instance.  `build-m` yields the differential and
  // the wedge product; every check passes with zero residuals.
  {
    Instance ins = instance_energy_zero_circle();
    Bundle b = from_instance(ins);
    b.gamma = ins.gamma;
    b.provenance = Json{{"tool", "make_bundles"},
                        {"instance", "circle_sphere"},
                        {"notes", "energy-zero sample: empty correlators, zero periods"}};
    emit(b, dir, "circle_sphere.json");
  }

  // Two-torus boundary inside a four-dimensional ambient model, one lattice
  // generator of energy 1 and Maslov index 2, unit periods on the xz class.
  // Carries bulk classes gamma, eta and gamma_prime = gamma - d(eta) for the
  // family commands; also the standard `generate` target.
  {
    Instance ins = instance_energy_zero_torus();
    Bundle b = from_instance(ins);
    RelativePair rel = *b.rel;
    rel.periods[0][5] = Rat(1);  // ∫_beta xz = 1
    b.rel = rel;
    b.gamma = ins.gamma;
    CElem eta = CElem::monomial(b.X, b.ctx, 4, RingElem::tvar(b.ctx, 1));
    b.eta = eta;
    b.gamma_prime = ins.gamma - eta.d();
    b.provenance = Json{{"tool", "make_bundles"},
                        {"instance", "torus_nilmanifold"},
                        {"notes", "generate target with bulk classes; correlators start empty"}};
    emit(b, dir, "torus_nilmanifold.json");
  }

  // Divisor tower in the scalar channel plus a sphere channel, with the
  // orientation flag recorded.  Flipping the flag breaks the k = -1
  // relation by design.
  {
    Instance ins = instance_gw_flag();
    Bundle b = from_instance(ins);
    b.provenance = Json{{"tool", "make_bundles"},
                        {"instance", "gw_flag"},
                        {"notes", "scalar divisor tower with sphere channel and sign flag"}};
    emit(b, dir, "gw_flag.json");
  }

  return 0;
}
