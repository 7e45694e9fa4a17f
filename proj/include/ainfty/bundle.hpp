// Self-contained instance files ("bundles"): a JSON document carrying the
// ring data, the models, the restriction and periods, every correlator
// tensor, optional bulk classes for the family layer, truncation bounds and
// sign flags, plus a free-form provenance block.  One file fully determines
// every residual a checker can report; there is no implicit state.
//
// All rationals are serialized as exact "p/q" strings; floats are rejected.
// Parsing validates referential integrity (every index resolves), rational
// syntax, and the per-tensor degree laws.  Deeper axioms (Leibniz, Stokes,
// the structure relations themselves) are the job of the check commands,
// not of the loader.
#pragma once

#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ainfty/qops.hpp"

namespace ainfty {

using Json = nlohmann::ordered_json;

inline constexpr const char* kBundleFormat = "ainfty-bundle-v1";

class BundleError : public std::runtime_error {
 public:
  explicit BundleError(std::vector<std::string> errs)
      : std::runtime_error(join(errs)), errs_(std::move(errs)) {}
  const std::vector<std::string>& errors() const { return errs_; }

 private:
  static std::string join(const std::vector<std::string>& errs) {
    std::string s = "bundle validation failed:";
    for (const auto& e : errs) s += "\n  - " + e;
    return s;
  }
  std::vector<std::string> errs_;
};

struct Bundle {
  RingContextPtr ctx;
  ModelPtr L;
  ModelPtr X;                       // absent for boundary-only bundles
  std::optional<RelativePair> rel;  // requires X
  int K_max = 0;
  int L_max = 0;
  int gw_sign = +1;
  bool has_sphere = false;
  std::map<DiskKey, std::map<Tuple, Vec>> disk;
  std::map<IntKey, std::map<Tuple, Rat>> minus1;
  std::map<IntKey, std::map<Tuple, Vec>> sphere;
  std::optional<CElem> gamma, gamma_prime, eta;
  int t_degree_cap = 16;
  Json provenance;  // null when absent

  bool has_data() const { return X != nullptr && rel.has_value(); }

  // Assemble the checker-facing view.  Requires the ambient sections.
  CorrelatorData data() const {
    if (!has_data())
      throw std::logic_error("bundle: correlator data requires model_X and relative sections");
    CorrelatorData D;
    D.rctx = ctx;
    D.L = L;
    D.X = X;
    D.rel = *rel;
    D.K_max = K_max;
    D.L_max = L_max;
    D.gw_sign = gw_sign;
    D.has_sphere = has_sphere;
    D.disk = disk;
    D.minus1 = minus1;
    D.sphere = sphere;
    return D;
  }
};

namespace bundledetail {

inline std::string rat_str(const Rat& r) { return r.get_str(); }

// ---------------------------------------------------------------------------
// Emission
// ---------------------------------------------------------------------------

inline Json vec_json(const Vec& v) {
  Json out = Json::array();
  for (const auto& [i, c] : v) out.push_back(Json::array({i, rat_str(c)}));
  return out;
}

inline Json model_json(const CDGAModel& m) {
  Json j;
  j["dimension"] = m.n;
  j["unit"] = m.unit;
  j["names"] = m.names;
  j["degrees"] = m.degs;
  Json d = Json::array();
  for (const Vec& row : m.d) d.push_back(vec_json(row));
  j["d"] = d;
  Json mult = Json::array();
  for (const auto& row : m.mult) {
    Json r = Json::array();
    for (const Vec& cell : row) r.push_back(vec_json(cell));
    mult.push_back(r);
  }
  j["mult"] = mult;
  Json integral = Json::array();
  for (const Rat& r : m.integral) integral.push_back(rat_str(r));
  j["integral"] = integral;
  if (m.has_h) {
    Json h = Json::array(), proj = Json::array();
    for (const Vec& row : m.h) h.push_back(vec_json(row));
    for (const Vec& row : m.proj) proj.push_back(vec_json(row));
    j["h"] = h;
    j["proj"] = proj;
  }
  return j;
}

inline Json ring_json(const RingElem& r) {
  Json out = Json::array();
  for (const auto& [key, c] : r.terms()) {
    Json term;
    term["beta"] = key.beta;
    term["t"] = key.t;
    term["coeff"] = rat_str(c);
    out.push_back(term);
  }
  return out;
}

inline Json celem_json(const CElem& e) {
  Json out = Json::array();
  for (const auto& [i, r] : e.components()) {
    Json comp;
    comp["basis"] = i;
    comp["coefficient"] = ring_json(r);
    out.push_back(comp);
  }
  return out;
}

inline std::pair<Tuple, Tuple> split_key(const Tuple& key, int k) {
  Tuple a(key.begin(), key.begin() + k);
  Tuple g(key.begin() + k, key.end());
  return {a, g};
}

}  // namespace bundledetail

inline Json emit_bundle_json(const Bundle& b) {
  using bundledetail::celem_json;
  using bundledetail::model_json;
  using bundledetail::rat_str;
  using bundledetail::split_key;
  using bundledetail::vec_json;

  Json j;
  j["format"] = kBundleFormat;

  Json gens = Json::array();
  for (const LatticeGen& g : b.ctx->generators()) {
    Json gj;
    gj["energy"] = rat_str(g.omega);
    gj["maslov"] = g.maslov;
    gens.push_back(gj);
  }
  j["lattice"] = Json{{"generators", gens}};

  std::vector<long> tdegs;
  for (int a = 0; a < b.ctx->num_vars(); ++a) tdegs.push_back(b.ctx->tdeg(a));
  j["variables"] = Json{{"degrees", tdegs}};

  j["truncation"] = Json{{"energy_cutoff", rat_str(b.ctx->cutoff())},
                         {"k_max", b.K_max},
                         {"l_max", b.L_max}};

  j["model_L"] = model_json(*b.L);
  if (b.X) j["model_X"] = model_json(*b.X);
  if (b.rel) {
    Json rows = Json::array();
    for (const Vec& row : b.rel->r) rows.push_back(vec_json(row));
    j["relative"] = Json{{"restriction", rows}};
    Json periods = Json::array();
    for (const RatVec& per : b.rel->periods) {
      Json row = Json::array();
      for (const Rat& p : per) row.push_back(rat_str(p));
      periods.push_back(row);
    }
    j["periods"] = periods;
  }

  j["sign_flags"] = Json{{"q_minus1_gw", b.gw_sign}};

  Json disk = Json::array();
  for (const auto& [key, t] : b.disk) {
    Json entries = Json::array();
    for (const auto& [tup, val] : t) {
      auto [at, gt] = split_key(tup, key.k);
      entries.push_back(Json{{"boundary", at}, {"interior", gt}, {"value", vec_json(val)}});
    }
    disk.push_back(Json{{"beta", key.beta}, {"k", key.k}, {"l", key.l}, {"entries", entries}});
  }
  Json minus1 = Json::array();
  for (const auto& [key, t] : b.minus1) {
    Json entries = Json::array();
    for (const auto& [tup, val] : t)
      entries.push_back(Json{{"interior", tup}, {"value", rat_str(val)}});
    minus1.push_back(Json{{"beta", key.beta}, {"l", key.l}, {"entries", entries}});
  }
  Json sphere_tensors = Json::array();
  for (const auto& [key, t] : b.sphere) {
    Json entries = Json::array();
    for (const auto& [tup, val] : t)
      entries.push_back(Json{{"interior", tup}, {"value", vec_json(val)}});
    sphere_tensors.push_back(Json{{"beta", key.beta}, {"l", key.l}, {"entries", entries}});
  }
  j["correlators"] = Json{{"disk", disk},
                          {"minus1", minus1},
                          {"sphere", Json{{"present", b.has_sphere}, {"tensors", sphere_tensors}}}};

  if (b.gamma) j["gamma"] = celem_json(*b.gamma);
  if (b.gamma_prime) j["gamma_prime"] = celem_json(*b.gamma_prime);
  if (b.eta) j["eta"] = celem_json(*b.eta);
  j["isotopy"] = Json{{"t_degree_cap", b.t_degree_cap}};
  if (!b.provenance.is_null()) j["provenance"] = b.provenance;
  return j;
}

inline void write_bundle(const Bundle& b, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << emit_bundle_json(b).dump(1) << "\n";
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

namespace bundledetail {

struct Parser {
  std::vector<std::string> errs;

  void fail(const std::string& where, const std::string& what) { errs.push_back(where + ": " + what); }

  bool require(bool cond, const std::string& where, const std::string& what) {
    if (!cond) fail(where, what);
    return cond;
  }

  const Json* get(const Json& j, const std::string& key, const std::string& where,
                  bool required) {
    if (!j.is_object()) {
      fail(where, "expected an object");
      return nullptr;
    }
    auto it = j.find(key);
    if (it == j.end()) {
      if (required) fail(where, "missing required key '" + key + "'");
      return nullptr;
    }
    return &*it;
  }

  long get_int(const Json& j, const std::string& where, long lo, long hi) {
    if (!j.is_number_integer()) {
      fail(where, "expected an integer");
      return lo;
    }
    long v = j.get<long>();
    if (v < lo || v > hi) {
      fail(where, "integer " + std::to_string(v) + " out of range [" + std::to_string(lo) +
                      ", " + std::to_string(hi) + "]");
      return lo;
    }
    return v;
  }

  Rat get_rat(const Json& j, const std::string& where) {
    if (!j.is_string()) {
      fail(where, "rationals must be exact \"p/q\" strings (floats are not accepted)");
      return Rat(0);
    }
    const std::string s = j.get<std::string>();
    try {
      Rat r(s);
      if (r.get_den() == 0) {
        fail(where, "zero denominator in '" + s + "'");
        return Rat(0);
      }
      r.canonicalize();
      return r;
    } catch (const std::exception&) {
      fail(where, "cannot parse rational '" + s + "'");
      return Rat(0);
    }
  }

  std::vector<int> get_ints(const Json& j, const std::string& where, long lo, long hi) {
    std::vector<int> out;
    if (!j.is_array()) {
      fail(where, "expected an array of integers");
      return out;
    }
    for (size_t i = 0; i < j.size(); ++i)
      out.push_back(static_cast<int>(get_int(j[i], where + "[" + std::to_string(i) + "]", lo, hi)));
    return out;
  }

  Vec get_vec(const Json& j, const std::string& where, int basis_size) {
    Vec out;
    if (!j.is_array()) {
      fail(where, "expected a sparse vector [[index, \"p/q\"], ...]");
      return out;
    }
    for (size_t i = 0; i < j.size(); ++i) {
      const Json& pair = j[i];
      std::string pw = where + "[" + std::to_string(i) + "]";
      if (!pair.is_array() || pair.size() != 2) {
        fail(pw, "expected [index, \"p/q\"]");
        continue;
      }
      int idx = static_cast<int>(get_int(pair[0], pw + ".index", 0, basis_size - 1));
      Rat c = get_rat(pair[1], pw + ".coeff");
      if (c != 0) {
        Rat& slot = out[idx];
        slot += c;
        if (slot == 0) out.erase(idx);
      }
    }
    return out;
  }

  std::shared_ptr<CDGAModel> get_model(const Json& j, const std::string& where) {
    auto m = std::make_shared<CDGAModel>();
    const Json* names = get(j, "names", where, true);
    const Json* degs = get(j, "degrees", where, true);
    if (!names || !degs) return m;
    if (!require(names->is_array(), where + ".names", "expected an array")) return m;
    for (size_t i = 0; i < names->size(); ++i) {
      const Json& nm = (*names)[i];
      if (!nm.is_string()) {
        fail(where + ".names[" + std::to_string(i) + "]", "expected a string");
        return m;
      }
      m->names.push_back(nm.get<std::string>());
    }
    for (size_t i = 0; i < m->names.size(); ++i)
      for (size_t k2 = i + 1; k2 < m->names.size(); ++k2)
        if (m->names[i] == m->names[k2]) {
          fail(where + ".names", "duplicate basis name '" + m->names[i] + "'");
          return m;
        }
    int sz = static_cast<int>(m->names.size());
    if (sz == 0) {
      fail(where + ".names", "a model needs at least one basis element");
      return m;
    }
    std::vector<int> dv = get_ints(*degs, where + ".degrees", 0, 1 << 20);
    if (static_cast<int>(dv.size()) != sz) {
      fail(where + ".degrees", "length differs from names");
      return m;
    }
    m->degs = dv;
    if (const Json* dim = get(j, "dimension", where, true))
      m->n = static_cast<int>(get_int(*dim, where + ".dimension", 0, 1 << 20));
    if (const Json* unit = get(j, "unit", where, true))
      m->unit = static_cast<int>(get_int(*unit, where + ".unit", 0, sz - 1));

    auto get_rows = [&](const char* key, std::vector<Vec>& dst, bool required) {
      const Json* rows = get(j, key, where, required);
      if (!rows) return false;
      std::string rw = where + "." + key;
      if (!require(rows->is_array() && static_cast<int>(rows->size()) == sz, rw,
                   "expected one sparse row per basis element"))
        return false;
      for (int i = 0; i < sz; ++i)
        dst.push_back(get_vec((*rows)[static_cast<size_t>(i)], rw + "[" + std::to_string(i) + "]", sz));
      return true;
    };
    get_rows("d", m->d, true);
    const Json* mult = get(j, "mult", where, true);
    if (mult) {
      std::string mw = where + ".mult";
      if (require(mult->is_array() && static_cast<int>(mult->size()) == sz, mw,
                  "expected a full product table")) {
        for (int i = 0; i < sz; ++i) {
          const Json& row = (*mult)[static_cast<size_t>(i)];
          std::string riw = mw + "[" + std::to_string(i) + "]";
          std::vector<Vec> r;
          if (require(row.is_array() && static_cast<int>(row.size()) == sz, riw,
                      "expected one sparse row per basis element")) {
            for (int c = 0; c < sz; ++c)
              r.push_back(get_vec(row[static_cast<size_t>(c)], riw + "[" + std::to_string(c) + "]", sz));
          } else {
            r.assign(static_cast<size_t>(sz), Vec{});
          }
          m->mult.push_back(std::move(r));
        }
      }
    }
    const Json* integral = get(j, "integral", where, true);
    if (integral) {
      std::string iw = where + ".integral";
      if (require(integral->is_array() && static_cast<int>(integral->size()) == sz, iw,
                  "expected one rational per basis element"))
        for (int i = 0; i < sz; ++i)
          m->integral.push_back(get_rat((*integral)[static_cast<size_t>(i)], iw + "[" + std::to_string(i) + "]"));
    }
    const Json* h = get(j, "h", where, false);
    const Json* proj = get(j, "proj", where, false);
    if ((h == nullptr) != (proj == nullptr))
      fail(where, "'h' and 'proj' must be given together");
    if (h && proj) {
      m->has_h = true;
      get_rows("h", m->h, true);
      get_rows("proj", m->proj, true);
    }
    return m;
  }

  RingElem get_ring(const Json& j, const RingContextPtr& ctx, const std::string& where) {
    RingElem out = RingElem::zero(ctx);
    if (!j.is_array()) {
      fail(where, "expected a list of {beta, t, coeff} records");
      return out;
    }
    for (size_t i = 0; i < j.size(); ++i) {
      const Json& term = j[i];
      std::string tw = where + "[" + std::to_string(i) + "]";
      const Json* beta = get(term, "beta", tw, true);
      const Json* t = get(term, "t", tw, true);
      const Json* coeff = get(term, "coeff", tw, true);
      if (!beta || !t || !coeff) continue;
      Beta b;
      for (int v : get_ints(*beta, tw + ".beta", 0, 1 << 20)) b.push_back(v);
      TExp te = get_ints(*t, tw + ".t", 0, 1 << 20);
      Rat c = get_rat(*coeff, tw + ".coeff");
      if (static_cast<int>(b.size()) != ctx->rank()) {
        fail(tw + ".beta", "length differs from the lattice rank");
        continue;
      }
      if (static_cast<int>(te.size()) != ctx->num_vars()) {
        fail(tw + ".t", "length differs from the variable count");
        continue;
      }
      try {
        out = out + RingElem::monomial(ctx, b, te, c);
      } catch (const std::exception& e) {
        fail(tw, e.what());
      }
    }
    return out;
  }

  CElem get_celem(const Json& j, const ModelPtr& model, const RingContextPtr& ctx,
                  const std::string& where) {
    CElem out(model, ctx);
    if (!j.is_array()) {
      fail(where, "expected a list of {basis, coefficient} records");
      return out;
    }
    for (size_t i = 0; i < j.size(); ++i) {
      const Json& comp = j[i];
      std::string cw = where + "[" + std::to_string(i) + "]";
      const Json* basis = get(comp, "basis", cw, true);
      const Json* coeff = get(comp, "coefficient", cw, true);
      if (!basis || !coeff) continue;
      int idx = static_cast<int>(get_int(*basis, cw + ".basis", 0, model->size() - 1));
      RingElem r = get_ring(*coeff, ctx, cw + ".coefficient");
      out.set(idx, out.coefficient(idx) + r);
    }
    return out;
  }

  Beta get_beta(const Json& j, const RingContextPtr& ctx, const std::string& where) {
    Beta b;
    for (int v : get_ints(j, where, 0, 1 << 20)) b.push_back(v);
    try {
      ctx->check_beta(b);
    } catch (const std::exception& e) {
      fail(where, e.what());
    }
    return b;
  }
};

}  // namespace bundledetail

inline Bundle parse_bundle_json(const Json& root) {
  bundledetail::Parser p;
  Bundle b;

  if (const Json* fmt = p.get(root, "format", "$", true)) {
    if (!fmt->is_string() || fmt->get<std::string>() != kBundleFormat)
      p.fail("$.format", std::string("expected \"") + kBundleFormat + "\"");
  }
  if (!p.errs.empty()) throw BundleError(std::move(p.errs));

  // Ring context.
  std::vector<LatticeGen> gens;
  if (const Json* lattice = p.get(root, "lattice", "$", true)) {
    if (const Json* garr = p.get(*lattice, "generators", "$.lattice", true)) {
      if (p.require(garr->is_array(), "$.lattice.generators", "expected an array")) {
        for (size_t i = 0; i < garr->size(); ++i) {
          std::string gw = "$.lattice.generators[" + std::to_string(i) + "]";
          const Json* energy = p.get((*garr)[i], "energy", gw, true);
          const Json* maslov = p.get((*garr)[i], "maslov", gw, true);
          LatticeGen g;
          if (energy) g.omega = p.get_rat(*energy, gw + ".energy");
          if (maslov) g.maslov = p.get_int(*maslov, gw + ".maslov", -(1L << 40), 1L << 40);
          gens.push_back(g);
        }
      }
    }
  }
  std::vector<long> tdegs;
  if (const Json* variables = p.get(root, "variables", "$", true))
    if (const Json* degrees = p.get(*variables, "degrees", "$.variables", true))
      for (int v : p.get_ints(*degrees, "$.variables.degrees", -(1L << 40), 1L << 40))
        tdegs.push_back(v);
  Rat cutoff(0);
  if (const Json* trunc = p.get(root, "truncation", "$", true)) {
    if (const Json* e = p.get(*trunc, "energy_cutoff", "$.truncation", true))
      cutoff = p.get_rat(*e, "$.truncation.energy_cutoff");
    if (const Json* km = p.get(*trunc, "k_max", "$.truncation", true))
      b.K_max = static_cast<int>(p.get_int(*km, "$.truncation.k_max", 0, 1 << 20));
    if (const Json* lm = p.get(*trunc, "l_max", "$.truncation", true))
      b.L_max = static_cast<int>(p.get_int(*lm, "$.truncation.l_max", 0, 1 << 20));
  }
  if (!p.errs.empty()) throw BundleError(std::move(p.errs));
  try {
    b.ctx = std::make_shared<RingContext>(gens, tdegs, cutoff);
  } catch (const std::exception& e) {
    p.fail("$.lattice", e.what());
    throw BundleError(std::move(p.errs));
  }

  // Models.
  if (const Json* ml = p.get(root, "model_L", "$", true)) b.L = p.get_model(*ml, "$.model_L");
  if (const Json* mx = p.get(root, "model_X", "$", false)) b.X = p.get_model(*mx, "$.model_X");
  if (!p.errs.empty()) throw BundleError(std::move(p.errs));

  // Relative pair and periods.
  if (const Json* relj = p.get(root, "relative", "$", false)) {
    if (!b.X) {
      p.fail("$.relative", "requires model_X");
    } else {
      RelativePair rel;
      rel.X = b.X;
      rel.L = b.L;
      if (const Json* rows = p.get(*relj, "restriction", "$.relative", true)) {
        std::string rw = "$.relative.restriction";
        if (p.require(rows->is_array() && static_cast<int>(rows->size()) == b.X->size(), rw,
                      "expected one sparse row per ambient basis element"))
          for (int i = 0; i < b.X->size(); ++i)
            rel.r.push_back(
                p.get_vec((*rows)[static_cast<size_t>(i)], rw + "[" + std::to_string(i) + "]", b.L->size()));
      }
      if (const Json* periods = p.get(root, "periods", "$", false)) {
        std::string pw = "$.periods";
        if (p.require(periods->is_array() &&
                          static_cast<int>(periods->size()) == b.ctx->rank(),
                      pw, "expected one row per lattice generator")) {
          for (int g = 0; g < b.ctx->rank(); ++g) {
            const Json& row = (*periods)[static_cast<size_t>(g)];
            std::string grw = pw + "[" + std::to_string(g) + "]";
            RatVec rv;
            if (p.require(row.is_array() && static_cast<int>(row.size()) == b.X->size(), grw,
                          "expected one rational per ambient basis element")) {
              for (int i = 0; i < b.X->size(); ++i)
                rv.push_back(p.get_rat(row[static_cast<size_t>(i)], grw + "[" + std::to_string(i) + "]"));
            } else {
              rv.assign(static_cast<size_t>(b.X->size()), Rat(0));
            }
            rel.periods.push_back(std::move(rv));
          }
        }
      } else {
        rel.periods.assign(static_cast<size_t>(b.ctx->rank()),
                           RatVec(static_cast<size_t>(b.X->size()), Rat(0)));
      }
      b.rel = std::move(rel);
    }
  } else if (p.get(root, "periods", "$", false)) {
    p.fail("$.periods", "requires the relative section");
  }

  // Sign flags.
  if (const Json* flags = p.get(root, "sign_flags", "$", true)) {
    if (const Json* gw = p.get(*flags, "q_minus1_gw", "$.sign_flags", true)) {
      long v = p.get_int(*gw, "$.sign_flags.q_minus1_gw", -1, 1);
      if (v != 1 && v != -1)
        p.fail("$.sign_flags.q_minus1_gw", "expected +1 or -1");
      else
        b.gw_sign = static_cast<int>(v);
    }
  }
  if (!p.errs.empty()) throw BundleError(std::move(p.errs));

  // Correlator channels.
  const Json* correlators = p.get(root, "correlators", "$", true);
  bool tensors_seen = false;
  if (correlators) {
    if (const Json* disk = p.get(*correlators, "disk", "$.correlators", true)) {
      std::string dw = "$.correlators.disk";
      if (p.require(disk->is_array(), dw, "expected an array")) {
        for (size_t ti = 0; ti < disk->size(); ++ti) {
          const Json& tj = (*disk)[ti];
          std::string tw = dw + "[" + std::to_string(ti) + "]";
          const Json* beta = p.get(tj, "beta", tw, true);
          const Json* kj = p.get(tj, "k", tw, true);
          const Json* lj = p.get(tj, "l", tw, true);
          const Json* entries = p.get(tj, "entries", tw, true);
          if (!beta || !kj || !lj || !entries) continue;
          DiskKey key;
          key.beta = p.get_beta(*beta, b.ctx, tw + ".beta");
          key.k = static_cast<int>(p.get_int(*kj, tw + ".k", 0, 1 << 20));
          key.l = static_cast<int>(p.get_int(*lj, tw + ".l", 0, 1 << 20));
          if (!p.require(entries->is_array(), tw + ".entries", "expected an array")) continue;
          std::map<Tuple, Vec> tensor;
          for (size_t ei = 0; ei < entries->size(); ++ei) {
            const Json& ej = (*entries)[ei];
            std::string ew = tw + ".entries[" + std::to_string(ei) + "]";
            const Json* bd = p.get(ej, "boundary", ew, true);
            const Json* in = p.get(ej, "interior", ew, true);
            const Json* val = p.get(ej, "value", ew, true);
            if (!bd || !in || !val) continue;
            if (!b.X) {
              p.fail(ew, "correlator tensors require model_X");
              continue;
            }
            Tuple at = p.get_ints(*bd, ew + ".boundary", 0, b.L->size() - 1);
            Tuple gt = p.get_ints(*in, ew + ".interior", 0, b.X->size() - 1);
            Vec v = p.get_vec(*val, ew + ".value", b.L->size());
            if (static_cast<int>(at.size()) != key.k)
              p.fail(ew + ".boundary", "length differs from k");
            else if (static_cast<int>(gt.size()) != key.l)
              p.fail(ew + ".interior", "length differs from l");
            else if (!v.empty()) {
              Tuple full = at;
              full.insert(full.end(), gt.begin(), gt.end());
              tensor[full] = std::move(v);
            }
          }
          if (!tensor.empty()) {
            tensors_seen = true;
            b.disk[key] = std::move(tensor);
          }
        }
      }
    }
    if (const Json* minus1 = p.get(*correlators, "minus1", "$.correlators", true)) {
      std::string mw = "$.correlators.minus1";
      if (p.require(minus1->is_array(), mw, "expected an array")) {
        for (size_t ti = 0; ti < minus1->size(); ++ti) {
          const Json& tj = (*minus1)[ti];
          std::string tw = mw + "[" + std::to_string(ti) + "]";
          const Json* beta = p.get(tj, "beta", tw, true);
          const Json* lj = p.get(tj, "l", tw, true);
          const Json* entries = p.get(tj, "entries", tw, true);
          if (!beta || !lj || !entries) continue;
          IntKey key;
          key.beta = p.get_beta(*beta, b.ctx, tw + ".beta");
          key.l = static_cast<int>(p.get_int(*lj, tw + ".l", 0, 1 << 20));
          if (!p.require(entries->is_array(), tw + ".entries", "expected an array")) continue;
          std::map<Tuple, Rat> tensor;
          for (size_t ei = 0; ei < entries->size(); ++ei) {
            const Json& ej = (*entries)[ei];
            std::string ew = tw + ".entries[" + std::to_string(ei) + "]";
            const Json* in = p.get(ej, "interior", ew, true);
            const Json* val = p.get(ej, "value", ew, true);
            if (!in || !val) continue;
            if (!b.X) {
              p.fail(ew, "correlator tensors require model_X");
              continue;
            }
            Tuple gt = p.get_ints(*in, ew + ".interior", 0, b.X->size() - 1);
            Rat v = p.get_rat(*val, ew + ".value");
            if (static_cast<int>(gt.size()) != key.l)
              p.fail(ew + ".interior", "length differs from l");
            else if (v != 0)
              tensor[gt] = v;
          }
          if (!tensor.empty()) {
            tensors_seen = true;
            b.minus1[key] = std::move(tensor);
          }
        }
      }
    }
    if (const Json* sphere = p.get(*correlators, "sphere", "$.correlators", true)) {
      std::string sw = "$.correlators.sphere";
      if (const Json* present = p.get(*sphere, "present", sw, true)) {
        if (p.require(present->is_boolean(), sw + ".present", "expected a boolean"))
          b.has_sphere = present->get<bool>();
      }
      if (const Json* tensors = p.get(*sphere, "tensors", sw, true)) {
        if (p.require(tensors->is_array(), sw + ".tensors", "expected an array")) {
          for (size_t ti = 0; ti < tensors->size(); ++ti) {
            const Json& tj = (*tensors)[ti];
            std::string tw = sw + ".tensors[" + std::to_string(ti) + "]";
            const Json* beta = p.get(tj, "beta", tw, true);
            const Json* lj = p.get(tj, "l", tw, true);
            const Json* entries = p.get(tj, "entries", tw, true);
            if (!beta || !lj || !entries) continue;
            IntKey key;
            key.beta = p.get_beta(*beta, b.ctx, tw + ".beta");
            key.l = static_cast<int>(p.get_int(*lj, tw + ".l", 0, 1 << 20));
            if (!b.has_sphere) {
              p.fail(tw, "sphere tensors given while sphere.present is false");
              continue;
            }
            if (!p.require(entries->is_array(), tw + ".entries", "expected an array")) continue;
            std::map<Tuple, Vec> tensor;
            for (size_t ei = 0; ei < entries->size(); ++ei) {
              const Json& ej = (*entries)[ei];
              std::string ew = tw + ".entries[" + std::to_string(ei) + "]";
              const Json* in = p.get(ej, "interior", ew, true);
              const Json* val = p.get(ej, "value", ew, true);
              if (!in || !val) continue;
              if (!b.X) {
                p.fail(ew, "correlator tensors require model_X");
                continue;
              }
              Tuple gt = p.get_ints(*in, ew + ".interior", 0, b.X->size() - 1);
              Vec v = p.get_vec(*val, ew + ".value", b.X->size());
              if (static_cast<int>(gt.size()) != key.l)
                p.fail(ew + ".interior", "length differs from l");
              else if (!v.empty())
                tensor[gt] = std::move(v);
            }
            if (!tensor.empty()) {
              tensors_seen = true;
              b.sphere[key] = std::move(tensor);
            }
          }
        }
      }
    }
  }
  if (b.has_sphere && !b.has_data())
    p.fail("$.correlators.sphere", "a sphere channel requires model_X and relative sections");
  if (tensors_seen && !b.has_data())
    p.fail("$.correlators", "tensors require model_X and relative sections");

  // Bulk classes.
  if (b.X) {
    if (const Json* g = p.get(root, "gamma", "$", false))
      b.gamma = p.get_celem(*g, b.X, b.ctx, "$.gamma");
    if (const Json* g = p.get(root, "gamma_prime", "$", false))
      b.gamma_prime = p.get_celem(*g, b.X, b.ctx, "$.gamma_prime");
    if (const Json* g = p.get(root, "eta", "$", false))
      b.eta = p.get_celem(*g, b.X, b.ctx, "$.eta");
  } else {
    for (const char* key : {"gamma", "gamma_prime", "eta"})
      if (p.get(root, key, "$", false)) p.fail(std::string("$.") + key, "requires model_X");
  }

  if (const Json* iso = p.get(root, "isotopy", "$", false))
    if (const Json* cap = p.get(*iso, "t_degree_cap", "$.isotopy", true))
      b.t_degree_cap = static_cast<int>(p.get_int(*cap, "$.isotopy.t_degree_cap", 0, 1 << 20));

  if (const Json* prov = p.get(root, "provenance", "$", false)) b.provenance = *prov;

  if (!p.errs.empty()) throw BundleError(std::move(p.errs));

  // Structural laws that every bundle must satisfy at load: channel bounds,
  // tuple shapes, the degree laws, interior symmetry, and the sign flag.
  if (b.has_data()) {
    Report wf = check_data_wellformed(b.data());
    for (const auto& item : wf.items)
      if (!item.pass)
        p.fail("$.correlators", item.name + (item.detail.empty() ? "" : " (" + item.detail + ")"));
  }
  if (!p.errs.empty()) throw BundleError(std::move(p.errs));
  return b;
}

inline Bundle parse_bundle(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw BundleError({"cannot open: " + path});
  Json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw BundleError({std::string("JSON syntax: ") + e.what()});
  }
  return parse_bundle_json(j);
}

}  // namespace ainfty
