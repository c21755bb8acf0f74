#include "probcirc/axioms.hpp"

#include <json.hpp>

#include <optional>
#include <random>

#include "probcirc/circuit_text.hpp"
#include "probcirc/gates.hpp"
#include "probcirc/random_circuit.hpp"

namespace probcirc {

using nlohmann::json;

namespace {

const std::vector<AxiomInfo>& catalog() {
  static const std::vector<AxiomInfo> table = [] {
    std::vector<AxiomInfo> v;
    auto add = [&](AxiomId id, const char* name,
                   std::vector<std::string> params,
                   std::vector<std::string> optional_params, bool prop,
                   bool holes, bool derived, const char* stmt) {
      v.push_back(AxiomInfo{id, name, std::move(params),
                            std::move(optional_params), prop, holes, derived,
                            stmt});
    };
    add(AxiomId::SeqAssoc, "SeqAssoc", {}, {}, false, true, false,
        "seq(seq(f, g), h) = seq(f, seq(g, h))");
    add(AxiomId::ParAssoc, "ParAssoc", {}, {}, false, true, false,
        "par(par(f, g), h) = par(f, par(g, h))");
    add(AxiomId::Interchange, "Interchange", {}, {}, false, true, false,
        "seq(par(f, h), par(g, k)) = par(seq(f, g), seq(h, k))");
    add(AxiomId::SeqUnit, "SeqUnit", {}, {}, false, true, false,
        "seq(id..., f) = f = seq(f, id...)");
    add(AxiomId::ParUnit, "ParUnit", {}, {}, false, true, false,
        "par(id0, f) = f = par(f, id0)");
    add(AxiomId::SymNat, "SymNat", {}, {}, false, true, false,
        "seq(par(id, c), swap) = seq(swap, par(c, id)) for c : 1 -> 1");
    add(AxiomId::SymInv, "SymInv", {}, {}, false, false, false,
        "seq(swap, swap) = par(id, id)");
    add(AxiomId::CopyAssoc, "CopyAssoc", {}, {}, false, false, false,
        "seq(copy, par(copy, id)) = seq(copy, par(id, copy))");
    add(AxiomId::CopyUnitL, "CopyUnitL", {}, {}, false, false, false,
        "seq(copy, par(del, id)) = id");
    add(AxiomId::CopyUnitR, "CopyUnitR", {}, {}, false, false, false,
        "seq(copy, par(id, del)) = id");
    add(AxiomId::CopyComm, "CopyComm", {}, {}, false, false, false,
        "seq(copy, swap) = copy");
    add(AxiomId::AndAssoc, "AndAssoc", {}, {}, false, false, false,
        "seq(par(and, id), and) = seq(par(id, and), and)");
    add(AxiomId::AndUnitL, "AndUnitL", {}, {}, false, false, false,
        "seq(par(flip(1), id), and) = id");
    add(AxiomId::AndUnitR, "AndUnitR", {}, {}, false, false, false,
        "seq(par(id, flip(1)), and) = id");
    add(AxiomId::AndComm, "AndComm", {}, {}, false, false, false,
        "seq(swap, and) = and");
    add(AxiomId::NotInvol, "NotInvol", {}, {}, false, false, false,
        "seq(not, not) = id");
    add(AxiomId::AndIdem, "AndIdem", {}, {}, false, false, false,
        "seq(copy, and) = id");
    add(AxiomId::AndComplement, "AndComplement", {}, {}, false, false, false,
        "seq(copy, seq(par(id, not), and)) = seq(del, flip(0))");
    add(AxiomId::AndOrDistrib, "AndOrDistrib", {}, {}, false, false, false,
        "seq(par(id, or), and) = seq(par(copy, par(id, id)), "
        "seq(par(id, par(swap, id)), seq(par(and, and), or)))");
    add(AxiomId::CopyFalse, "CopyFalse", {}, {}, false, false, false,
        "seq(flip(0), copy) = par(flip(0), flip(0))");
    add(AxiomId::CopyTrue, "CopyTrue", {}, {}, false, false, false,
        "seq(flip(1), copy) = par(flip(1), flip(1))");
    add(AxiomId::CopyAnd, "CopyAnd", {}, {}, false, false, false,
        "seq(and, copy) = seq(par(copy, copy), "
        "seq(par(id, par(swap, id)), par(and, and)))");
    add(AxiomId::CopyNot, "CopyNot", {}, {}, false, false, false,
        "seq(not, copy) = seq(copy, par(not, not))");
    add(AxiomId::DelAnd, "DelAnd", {}, {}, false, false, false,
        "seq(and, del) = par(del, del)");
    add(AxiomId::DelNot, "DelNot", {}, {}, false, false, false,
        "seq(not, del) = del");
    add(AxiomId::DelFlip, "DelFlip", {"p"}, {}, false, false, false,
        "seq(flip(p), del) = id0");
    add(AxiomId::FlipNot, "FlipNot", {"p"}, {}, false, false, false,
        "seq(flip(p), not) = flip(1-p)");
    add(AxiomId::MixturePosterior, "MixturePosterior", {"r", "p", "q"}, {"pt", "qt"}, false, false, false,
        "a hidden flip(r) feeding two guarded draws equals announcing the "
        "mixture flip(r*p+(1-r)*q) first and drawing the posteriors");
    add(AxiomId::SelectRegroup, "SelectRegroup", {"p", "q"}, {}, false, false, false,
        "nested selection flip(p) over flip(q) regroups as flip(p*q) over "
        "the residual flip(p*(1-q)/(1-p*q)); needs p*q != 1");
    add(AxiomId::BranchSplit, "BranchSplit", {"p", "q"}, {}, false, false, false,
        "a draw consulted in both branches of an outer selection may be "
        "split into one independent draw per branch");
    add(AxiomId::CondAssoc, "CondAssoc", {}, {}, false, false, false,
        "seq(par(cond, id), cond) = seq(par(id, cond), cond)");
    add(AxiomId::CondUnitL, "CondUnitL", {}, {}, true, false, false,
        "seq(par(flip(1/2), id), cond) = id, up to scaling");
    add(AxiomId::CondUnitR, "CondUnitR", {}, {}, true, false, false,
        "seq(par(id, flip(1/2)), cond) = id, up to scaling");
    add(AxiomId::CondComm, "CondComm", {}, {}, false, false, false,
        "seq(swap, cond) = cond");
    add(AxiomId::CondCopyL, "CondCopyL", {}, {}, false, false, false,
        "seq(par(copy, id), par(id, cond)) = seq(cond, copy)");
    add(AxiomId::CondCopyR, "CondCopyR", {}, {}, false, false, false,
        "seq(cond, copy) = seq(par(id, copy), par(cond, id))");
    add(AxiomId::CopyCondCancel, "CopyCondCancel", {}, {}, false, false, false,
        "seq(copy, cond) = id");
    add(AxiomId::PosteriorCollapse, "PosteriorCollapse", {"p0", "p1", "p2"}, {}, true, false, false,
        "conditioning flip(p0) against a draw it selects collapses to "
        "flip(p0*p1 / (p0*p1 + (1-p0)*(1-p2))), up to scaling; needs a "
        "nonzero denominator");
    add(AxiomId::FailAbsorb, "FailAbsorb", {}, {}, false, false, false,
        "par(fail, id) = par(fail, seq(del, flip(0))) where fail = "
        "seq(par(flip(0), flip(1)), cond)");
    add(AxiomId::MuxMixture, "MuxMixture", {"r", "p", "q"}, {}, false, false,
        true,
        "seq(par(flip(r), par(flip(p), flip(q))), mux) = "
        "flip(r*p + (1-r)*q)");
    add(AxiomId::AgreeFlips, "AgreeFlips", {"p", "q"}, {}, true, false, true,
        "seq(par(flip(p), flip(q)), cond) = "
        "flip(p*q / (p*q + (1-p)*(1-q))), up to scaling; needs a nonzero "
        "denominator");
    add(AxiomId::DeleteCausal, "DeleteCausal", {}, {}, false, true, true,
        "seq(c, del...) = del... for any conditioning-free c");
    return v;
  }();
  return table;
}

Rat need(const std::map<std::string, Rat>& ps, const std::string& name) {
  auto it = ps.find(name);
  if (it == ps.end()) throw MissingParam("missing parameter '" + name + "'");
  if (!is_probability(it->second))
    throw SideConditionViolated("parameter '" + name +
                                "' must lie in [0, 1]");
  return it->second;
}

bool is_discard_bundle(const Circuit& c) {
  auto is_del = [](const Circuit& f) {
    return f.kind() == NodeKind::Gen && f.gate() == GateTag::Discard;
  };
  if (is_del(c)) return true;
  if (c.kind() != NodeKind::Par) return false;
  for (const Circuit& f : par_factors(c))
    if (!is_del(f)) return false;
  return true;
}

}  // namespace

const std::vector<AxiomId>& all_axioms() {
  static const std::vector<AxiomId> ids = [] {
    std::vector<AxiomId> v;
    for (const AxiomInfo& info : catalog()) v.push_back(info.id);
    return v;
  }();
  return ids;
}

const AxiomInfo& axiom_info(AxiomId id) {
  return catalog().at(static_cast<std::size_t>(id));
}

std::string axiom_name(AxiomId id) { return axiom_info(id).name; }

AxiomId axiom_from_name(const std::string& name) {
  for (const AxiomInfo& info : catalog())
    if (info.name == name) return info.id;
  throw Error("unknown rule name '" + name + "'");
}

AxiomInstance instantiate(AxiomId rule,
                          const std::map<std::string, Rat>& ps) {
  using C = Circuit;
  const Circuit w = C::id();
  const Circuit sw = C::swap();
  const Circuit cp = C::copy_gate();
  const Circuit del = C::discard();
  const Circuit an = C::and_gate();
  const Circuit nt = C::not_gate();
  const Circuit cd = C::cond();
  const Circuit w2 = C::par(w, w);
  switch (rule) {
    case AxiomId::SymInv:
      return {C::seq(sw, sw), w2};
    case AxiomId::CopyAssoc:
      return {C::seq(cp, C::par(cp, w)), C::seq(cp, C::par(w, cp))};
    case AxiomId::CopyUnitL:
      return {C::seq(cp, C::par(del, w)), w};
    case AxiomId::CopyUnitR:
      return {C::seq(cp, C::par(w, del)), w};
    case AxiomId::CopyComm:
      return {C::seq(cp, sw), cp};
    case AxiomId::AndAssoc:
      return {C::seq(C::par(an, w), an), C::seq(C::par(w, an), an)};
    case AxiomId::AndUnitL:
      return {C::seq(C::par(C::flip(1), w), an), w};
    case AxiomId::AndUnitR:
      return {C::seq(C::par(w, C::flip(1)), an), w};
    case AxiomId::AndComm:
      return {C::seq(sw, an), an};
    case AxiomId::NotInvol:
      return {C::seq(nt, nt), w};
    case AxiomId::AndIdem:
      return {C::seq(cp, an), w};
    case AxiomId::AndComplement:
      return {C::seq(cp, C::seq(C::par(w, nt), an)),
              C::seq(del, C::flip(0))};
    case AxiomId::AndOrDistrib:
      return {C::seq(C::par(w, or2()), an),
              C::seq(C::par(cp, w2),
                     C::seq(C::par(w, C::par(sw, w)),
                            C::seq(C::par(an, an), or2())))};
    case AxiomId::CopyFalse:
      return {C::seq(C::flip(0), cp), C::par(C::flip(0), C::flip(0))};
    case AxiomId::CopyTrue:
      return {C::seq(C::flip(1), cp), C::par(C::flip(1), C::flip(1))};
    case AxiomId::CopyAnd:
      return {C::seq(an, cp),
              C::seq(C::par(cp, cp),
                     C::seq(C::par(w, C::par(sw, w)), C::par(an, an)))};
    case AxiomId::CopyNot:
      return {C::seq(nt, cp), C::seq(cp, C::par(nt, nt))};
    case AxiomId::DelAnd:
      return {C::seq(an, del), C::par(del, del)};
    case AxiomId::DelNot:
      return {C::seq(nt, del), del};
    case AxiomId::DelFlip:
      return {C::seq(C::flip(need(ps, "p")), del), C::id0()};
    case AxiomId::FlipNot: {
      Rat p = need(ps, "p");
      return {C::seq(C::flip(p), nt), C::flip(1 - p)};
    }
    case AxiomId::MixturePosterior: {
      Rat r = need(ps, "r"), p = need(ps, "p"), q = need(ps, "q");
      Rat rt = r * p + (1 - r) * q;
      Rat pt(0), qt(0);
      if (rt != 0) {
        pt = r * p / rt;
        if (ps.count("pt") && ps.at("pt") != pt)
          throw SideConditionViolated(
              "pt is determined as r*p/(r*p+(1-r)*q) here");
      } else if (ps.count("pt")) {
        pt = need(ps, "pt");
      }
      if (rt != 1) {
        qt = r * (1 - p) / (1 - rt);
        if (ps.count("qt") && ps.at("qt") != qt)
          throw SideConditionViolated(
              "qt is determined as r*(1-p)/(1-r*p-(1-r)*q) here");
      } else if (ps.count("qt")) {
        qt = need(ps, "qt");
      }
      Circuit ga =
          C::seq(C::par(w, C::par(C::flip(p), w)), mux());  // 2 -> 1
      Circuit gb = C::seq(C::par(w, C::par(C::flip(q), w)), mux());
      Circuit big = C::seq(C::par(w, C::par(ga, gb)), mux());  // 5 -> 1
      Circuit lhs = seq_chain({
          C::par(C::flip(r), identity_bundle(3)),
          C::par(cp, identity_bundle(3)),
          C::par(w, C::par(w, C::par(cp, w2))),
          permutation({1, 2, 4, 3, 5, 0}),
          C::par(big, w),
      });
      Circuit nn =
          C::seq(C::par(w, C::par(C::flip(pt), C::flip(qt))), mux());
      Circuit y1 = C::seq(C::par(w, C::par(w, mux())), mux());  // 5 -> 1
      Circuit y2 = C::seq(C::par(w, C::par(nn, w)), mux());     // 3 -> 1
      Circuit rhs = seq_chain({
          C::par(C::flip(rt), C::par(C::flip(r), identity_bundle(3))),
          C::par(cp, C::par(cp, C::par(cp, w2))),
          permutation({4, 0, 2, 6, 7, 5, 1, 3}),
          C::par(y1, y2),
      });
      return {lhs, rhs};
    }
    case AxiomId::SelectRegroup: {
      Rat p = need(ps, "p"), q = need(ps, "q");
      if (p * q == 1)
        throw SideConditionViolated("needs p*q != 1");
      Rat qt = p * (1 - q) / (1 - p * q);
      Circuit m1 = C::seq(C::par(C::flip(q), w2), mux());
      Circuit lhs = C::seq(C::par(C::flip(p), C::par(m1, w)), mux());
      Circuit m2 = C::seq(C::par(C::flip(qt), w2), mux());
      Circuit rhs = C::seq(C::par(C::flip(p * q), C::par(w, m2)), mux());
      return {lhs, rhs};
    }
    case AxiomId::BranchSplit: {
      Rat p = need(ps, "p"), q = need(ps, "q");
      Circuit inner =
          C::seq(C::par(w, C::par(mux(), mux())), mux());  // 7 -> 1
      std::vector<int> perm = {0, 1, 2, 4, 5, 3, 6, 7};
      Circuit lhs = seq_chain({
          C::par(C::flip(q), C::par(C::flip(p), identity_bundle(4))),
          C::par(cp, C::par(cp, identity_bundle(4))),
          permutation(perm),
          C::par(w, inner),
      });
      Circuit rhs = seq_chain({
          C::par(C::flip(q),
                 C::par(C::flip(p), C::par(C::flip(p), identity_bundle(4)))),
          C::par(cp, identity_bundle(6)),
          permutation(perm),
          C::par(w, inner),
      });
      return {lhs, rhs};
    }
    case AxiomId::CondAssoc:
      return {C::seq(C::par(cd, w), cd), C::seq(C::par(w, cd), cd)};
    case AxiomId::CondUnitL:
      return {C::seq(C::par(C::flip(rat(1, 2)), w), cd), w};
    case AxiomId::CondUnitR:
      return {C::seq(C::par(w, C::flip(rat(1, 2))), cd), w};
    case AxiomId::CondComm:
      return {C::seq(sw, cd), cd};
    case AxiomId::CondCopyL:
      return {C::seq(C::par(cp, w), C::par(w, cd)), C::seq(cd, cp)};
    case AxiomId::CondCopyR:
      return {C::seq(cd, cp), C::seq(C::par(w, cp), C::par(cd, w))};
    case AxiomId::CopyCondCancel:
      return {C::seq(cp, cd), w};
    case AxiomId::PosteriorCollapse: {
      Rat p0 = need(ps, "p0"), p1 = need(ps, "p1"), p2 = need(ps, "p2");
      Rat den = p0 * p1 + (1 - p0) * (1 - p2);
      if (den == 0)
        throw SideConditionViolated(
            "needs p0*p1 + (1-p0)*(1-p2) != 0");
      Circuit draw =
          C::seq(C::par(w, C::par(C::flip(p1), C::flip(p2))), mux());
      Circuit joint =
          C::seq(C::flip(p0), C::seq(cp, C::par(w, draw)));
      return {C::seq(joint, cd), C::flip(p0 * p1 / den)};
    }
    case AxiomId::FailAbsorb:
      return {C::par(flip_bot(), w),
              C::par(flip_bot(), C::seq(del, C::flip(0)))};
    case AxiomId::MuxMixture: {
      Rat r = need(ps, "r"), p = need(ps, "p"), q = need(ps, "q");
      Circuit lhs =
          C::seq(C::par(C::flip(r), C::par(C::flip(p), C::flip(q))), mux());
      return {lhs, C::flip(r * p + (1 - r) * q)};
    }
    case AxiomId::AgreeFlips: {
      Rat p = need(ps, "p"), q = need(ps, "q");
      Rat den = p * q + (1 - p) * (1 - q);
      if (den == 0)
        throw SideConditionViolated("needs p*q + (1-p)*(1-q) != 0");
      return {C::seq(C::par(C::flip(p), C::flip(q)), cd),
              C::flip(p * q / den)};
    }
    default:
      throw Error("rule " + axiom_name(rule) +
                  " quantifies over subcircuits and cannot be instantiated "
                  "from parameters alone");
  }
}

// ------------------------------------------------------------ soundness --

namespace {

Circuit random_endo1(std::mt19937_64& rng, bool allow_cond) {
  CircuitGenOptions o;
  o.max_width = 3;
  o.max_gens = 6;
  o.allow_cond = allow_cond;
  o.in_wires = 1;
  for (int i = 0; i < 200; ++i) {
    Circuit c = random_circuit(rng, o);
    if (circ_type(c).out == 1) return c;
  }
  return Circuit::not_gate();
}

std::map<std::string, Rat> draw_params(const AxiomInfo& info,
                                       std::mt19937_64& rng) {
  std::map<std::string, Rat> ps;
  for (const auto& name : info.params) ps[name] = random_prob(rng, 64);
  return ps;
}

std::string params_text(const std::map<std::string, Rat>& ps) {
  std::string s;
  for (const auto& [k, v] : ps) {
    s += s.empty() ? " with " : ", ";
    s += k + " = " + rat_str(v);
  }
  return s;
}

/// Builds both sides of one trial for a rule with circuit holes.
std::optional<AxiomInstance> hole_trial(AxiomId rule, std::mt19937_64& rng) {
  using C = Circuit;
  CircuitGenOptions o;
  o.max_width = 3;
  o.max_gens = 6;
  o.allow_cond = rule != AxiomId::DeleteCausal;
  o.den_bound = 16;
  switch (rule) {
    case AxiomId::SeqAssoc: {
      Circuit f = random_circuit(rng, o);
      CircuitGenOptions o2 = o;
      o2.in_wires = circ_type(f).out;
      Circuit g = random_circuit(rng, o2);
      CircuitGenOptions o3 = o;
      o3.in_wires = circ_type(g).out;
      Circuit h = random_circuit(rng, o3);
      return AxiomInstance{C::seq(C::seq(f, g), h),
                           C::seq(f, C::seq(g, h))};
    }
    case AxiomId::ParAssoc: {
      CircuitGenOptions os = o;
      os.max_width = 2;
      os.max_gens = 4;
      Circuit f = random_circuit(rng, os);
      Circuit g = random_circuit(rng, os);
      Circuit h = random_circuit(rng, os);
      return AxiomInstance{C::par(C::par(f, g), h),
                           C::par(f, C::par(g, h))};
    }
    case AxiomId::Interchange: {
      CircuitGenOptions os = o;
      os.max_width = 2;
      os.max_gens = 4;
      Circuit f = random_circuit(rng, os);
      Circuit h = random_circuit(rng, os);
      CircuitGenOptions og = os;
      og.in_wires = circ_type(f).out;
      Circuit g = random_circuit(rng, og);
      CircuitGenOptions ok = os;
      ok.in_wires = circ_type(h).out;
      Circuit k = random_circuit(rng, ok);
      return AxiomInstance{C::seq(C::par(f, h), C::par(g, k)),
                           C::par(C::seq(f, g), C::seq(h, k))};
    }
    case AxiomId::SeqUnit: {
      Circuit f = random_circuit(rng, o);
      CircType t = circ_type(f);
      return AxiomInstance{
          C::seq(identity_bundle(t.in), C::seq(f, identity_bundle(t.out))),
          f};
    }
    case AxiomId::ParUnit: {
      Circuit f = random_circuit(rng, o);
      return AxiomInstance{C::par(C::id0(), C::par(f, C::id0())), f};
    }
    case AxiomId::SymNat: {
      Circuit c = random_endo1(rng, true);
      return AxiomInstance{
          C::seq(C::par(C::id(), c), C::swap()),
          C::seq(C::swap(), C::par(c, C::id()))};
    }
    case AxiomId::DeleteCausal: {
      Circuit c = random_circuit(rng, o);
      CircType t = circ_type(c);
      return AxiomInstance{C::seq(c, discard_bundle(t.out)),
                           discard_bundle(t.in)};
    }
    default:
      return std::nullopt;
  }
}

}  // namespace

SoundnessReport check_soundness(AxiomId rule, int trials,
                                std::uint64_t seed) {
  const AxiomInfo& info = axiom_info(rule);
  SoundnessReport rep;
  rep.id = rule;
  rep.name = info.name;
  rep.trials = trials;
  rep.propositional = info.propositional;
  std::mt19937_64 rng(seed);
  for (int t = 0; t < trials; ++t) {
    AxiomInstance inst;
    std::map<std::string, Rat> ps;
    if (info.has_holes) {
      auto built = hole_trial(rule, rng);
      if (!built) throw Error("no trial builder for " + info.name);
      inst = *built;
    } else {
      bool built = false;
      for (int attempt = 0; attempt < 100 && !built; ++attempt) {
        ps = draw_params(info, rng);
        if (rule == AxiomId::MixturePosterior) {
          Rat rt = ps.at("r") * ps.at("p") + (1 - ps.at("r")) * ps.at("q");
          if (rt == 0) ps["pt"] = random_prob(rng, 64);
          if (rt == 1) ps["qt"] = random_prob(rng, 64);
        }
        try {
          inst = instantiate(rule, ps);
          built = true;
        } catch (const SideConditionViolated&) {
        }
      }
      if (!built) {
        if (rep.counterexample.empty())
          rep.counterexample =
              "could not draw parameters satisfying the side condition";
        continue;
      }
    }
    SubStochMatrix lhs = eval(inst.lhs);
    SubStochMatrix rhs = eval(inst.rhs);
    bool ok = info.propositional ? prop_equal(lhs, rhs) : lhs == rhs;
    if (ok) {
      ++rep.passes;
    } else if (rep.counterexample.empty()) {
      rep.counterexample = "lhs " + serialize(inst.lhs) + "  vs  rhs " +
                           serialize(inst.rhs) + params_text(ps);
    }
  }
  return rep;
}

std::vector<SoundnessReport> check_all_axioms(int trials,
                                              std::uint64_t seed) {
  std::vector<SoundnessReport> out;
  for (AxiomId id : all_axioms())
    out.push_back(check_soundness(
        id, trials, seed + static_cast<std::uint64_t>(id) * 0x9e3779b9u));
  return out;
}

// ------------------------------------------------------------ rewriting --

namespace {

std::vector<Circuit> slice(const std::vector<Circuit>& v, std::size_t a,
                           std::size_t b) {
  return std::vector<Circuit>(v.begin() + a, v.begin() + b);
}

Circuit interchange_lr(const Circuit& node) {
  std::vector<Circuit> sf = seq_factors(node);
  if (sf.size() < 2)
    throw PatternMismatch(
        "merging two layers needs two sequential factors here");
  std::vector<Circuit> p1 = par_factors(sf[0]);
  std::vector<Circuit> p2 = par_factors(sf[1]);
  for (std::size_t k = 1; k < p1.size(); ++k) {
    int wx = 0;
    for (std::size_t i = 0; i < k; ++i) wx += circ_type(p1[i]).out;
    int acc = 0;
    std::size_t j = 0;
    while (j < p2.size() && acc < wx) acc += circ_type(p2[j++]).in;
    if (acc != wx) continue;
    Circuit top = Circuit::seq(par_chain(slice(p1, 0, k)),
                               par_chain(slice(p2, 0, j)));
    Circuit bottom = Circuit::seq(par_chain(slice(p1, k, p1.size())),
                                  par_chain(slice(p2, j, p2.size())));
    std::vector<Circuit> out{Circuit::par(top, bottom)};
    for (std::size_t i = 2; i < sf.size(); ++i) out.push_back(sf[i]);
    return seq_chain(out);
  }
  throw PatternMismatch(
      "the two parallel layers admit no aligned split");
}

Circuit interchange_rl(const Circuit& node) {
  if (node.kind() != NodeKind::Par)
    throw PatternMismatch("splitting a layer needs a parallel composite");
  std::vector<Circuit> pf = par_factors(node);
  if (pf.size() < 2)
    throw PatternMismatch("splitting a layer needs two parallel blocks");
  Circuit b1 = pf[0];
  Circuit b2 = par_chain(slice(pf, 1, pf.size()));
  auto split = [](const Circuit& b) {
    std::vector<Circuit> sf = seq_factors(b);
    if (sf.size() >= 2)
      return std::pair<Circuit, Circuit>{
          sf[0], seq_chain(slice(sf, 1, sf.size()))};
    return std::pair<Circuit, Circuit>{
        b, identity_bundle(circ_type(b).out)};
  };
  auto [a, c] = split(b1);
  auto [b, d] = split(b2);
  return Circuit::seq(Circuit::par(a, b), Circuit::par(c, d));
}

Circuit symnat_apply(const Circuit& node, bool left_to_right) {
  std::vector<Circuit> sf = seq_factors(node);
  if (sf.size() < 2)
    throw PatternMismatch("sliding past a crossing needs two factors");
  std::vector<Circuit> rest = slice(sf, 2, sf.size());
  if (left_to_right) {
    std::vector<Circuit> pf = par_factors(sf[0]);
    if (pf.size() != 2 || !(pf[0] == Circuit::id()))
      throw PatternMismatch("first factor must be id beside a block");
    CircType t = circ_type(pf[1]);
    if (t.in != 1 || t.out != 1)
      throw PatternMismatch("the sliding block must be 1 -> 1");
    if (!(sf[1] == Circuit::swap()))
      throw PatternMismatch("second factor must be the crossing");
    std::vector<Circuit> out{Circuit::swap(),
                             Circuit::par(pf[1], Circuit::id())};
    out.insert(out.end(), rest.begin(), rest.end());
    return seq_chain(out);
  }
  if (!(sf[0] == Circuit::swap()))
    throw PatternMismatch("first factor must be the crossing");
  std::vector<Circuit> pf = par_factors(sf[1]);
  if (pf.size() != 2 || !(pf[1] == Circuit::id()))
    throw PatternMismatch("second factor must be a block beside id");
  CircType t = circ_type(pf[0]);
  if (t.in != 1 || t.out != 1)
    throw PatternMismatch("the sliding block must be 1 -> 1");
  std::vector<Circuit> out{Circuit::par(Circuit::id(), pf[0]),
                           Circuit::swap()};
  out.insert(out.end(), rest.begin(), rest.end());
  return seq_chain(out);
}

Circuit delete_causal_apply(const Circuit& node) {
  std::vector<Circuit> sf = seq_factors(node);
  std::size_t d = sf.size();
  for (std::size_t i = 0; i < sf.size(); ++i)
    if (is_discard_bundle(sf[i])) {
      d = i;
      break;
    }
  if (d == sf.size() || d == 0)
    throw PatternMismatch(
        "needs a block followed by a layer of discards");
  Circuit prefix = seq_chain(slice(sf, 0, d));
  if (!is_causal(prefix))
    throw PatternMismatch("the deleted block must be conditioning-free");
  int m = circ_type(prefix).in;
  std::vector<Circuit> out;
  if (m > 0) out.push_back(discard_bundle(m));
  for (std::size_t i = d + 1; i < sf.size(); ++i) out.push_back(sf[i]);
  if (out.empty()) out.push_back(Circuit::id0());
  return seq_chain(out);
}

/// Matches the instantiated source side as a prefix of the node's chain of
/// the same kind and splices in the target.
Circuit rewrite_prefix(const Circuit& node, const Circuit& source,
                       const Circuit& target) {
  if (source.kind() == NodeKind::Par) {
    std::vector<Circuit> pf = node.kind() == NodeKind::Par
                                  ? par_factors(node)
                                  : std::vector<Circuit>{node};
    std::vector<Circuit> qf = par_factors(source);
    if (qf.size() > pf.size())
      throw PatternMismatch("the term has fewer parallel blocks than the "
                            "rule's source side");
    for (std::size_t i = 0; i < qf.size(); ++i)
      if (!(pf[i] == qf[i]))
        throw PatternMismatch("parallel block " + std::to_string(i) +
                              " does not match the rule's source side");
    if (qf.size() == pf.size()) return target;
    return Circuit::par(target, par_chain(slice(pf, qf.size(), pf.size())));
  }
  std::vector<Circuit> sf = node.kind() == NodeKind::Seq
                                ? seq_factors(node)
                                : std::vector<Circuit>{node};
  std::vector<Circuit> qf = source.kind() == NodeKind::Seq
                                ? seq_factors(source)
                                : std::vector<Circuit>{source};
  if (qf.size() > sf.size())
    throw PatternMismatch(
        "the term has fewer sequential factors than the rule's source side");
  for (std::size_t i = 0; i < qf.size(); ++i)
    if (!(sf[i] == qf[i]))
      throw PatternMismatch("sequential factor " + std::to_string(i) +
                            " does not match the rule's source side");
  if (qf.size() == sf.size()) return target;
  return Circuit::seq(target, seq_chain(slice(sf, qf.size(), sf.size())));
}

}  // namespace

Circuit apply_step(const Circuit& term, const RewriteStep& step) {
  Circuit t = flatten(term);
  Path path = step.path;
  int boundary = 0;
  if (!path.empty() && (path.back() == 2 || path.back() == 3)) {
    boundary = path.back();
    path.pop_back();
  }
  for (int s : path)
    if (s != 0 && s != 1)
      throw BadPath(
          "path selectors are 0/1 with an optional final 2 or 3");
  Circuit node = subterm(t, path);

  switch (step.rule) {
    case AxiomId::SeqAssoc:
    case AxiomId::ParAssoc:
    case AxiomId::SeqUnit:
    case AxiomId::ParUnit:
      // identities of the flattened representation; the path was validated
      return t;
    case AxiomId::Interchange: {
      if (boundary)
        throw PatternMismatch("this rule does not apply at a unit boundary");
      Circuit result =
          step.left_to_right ? interchange_lr(node) : interchange_rl(node);
      return flatten(replace_subterm(t, path, result));
    }
    case AxiomId::SymNat: {
      if (boundary)
        throw PatternMismatch("this rule does not apply at a unit boundary");
      return flatten(
          replace_subterm(t, path, symnat_apply(node, step.left_to_right)));
    }
    case AxiomId::DeleteCausal: {
      if (!step.left_to_right)
        throw PatternMismatch(
            "deleting a block applies left to right only; the reverse "
            "would have to invent the block");
      if (boundary)
        throw PatternMismatch("this rule does not apply at a unit boundary");
      return flatten(replace_subterm(t, path, delete_causal_apply(node)));
    }
    default: {
      AxiomInstance inst = instantiate(step.rule, step.params);
      Circuit source =
          flatten(step.left_to_right ? inst.lhs : inst.rhs);
      Circuit target = step.left_to_right ? inst.rhs : inst.lhs;
      if (boundary) {
        if (!is_identity_bundle(source))
          throw PatternMismatch(
              "only a rule whose source side is an identity can apply at a "
              "unit boundary");
        CircType nt = circ_type(node);
        int w = circ_type(source).in;
        if (boundary == 2) {
          if (w != nt.in)
            throw PatternMismatch("identity width does not match the "
                                  "node's input boundary");
          return flatten(
              replace_subterm(t, path, Circuit::seq(target, node)));
        }
        if (w != nt.out)
          throw PatternMismatch("identity width does not match the "
                                "node's output boundary");
        return flatten(
            replace_subterm(t, path, Circuit::seq(node, target)));
      }
      return flatten(
          replace_subterm(t, path, rewrite_prefix(node, source, target)));
    }
  }
}

DerivationTrace check_derivation(const Derivation& d,
                                 const EvalOptions& opts) {
  DerivationTrace tr;
  Circuit cur, endc;
  try {
    cur = flatten(parse_circuit(d.start_text));
  } catch (const Error& e) {
    tr.failed_step = 0;
    tr.error = std::string("start term: ") + e.what();
    return tr;
  }
  try {
    endc = flatten(parse_circuit(d.end_text));
  } catch (const Error& e) {
    tr.failed_step = d.steps.size();
    tr.error = std::string("end term: ") + e.what();
    return tr;
  }
  tr.terms.push_back(serialize(cur));
  ProjClass cls;
  try {
    cls = canonical_class(eval(cur, opts));
  } catch (const Error& e) {
    tr.failed_step = 0;
    tr.error = std::string("start term: ") + e.what();
    return tr;
  }
  for (std::size_t i = 0; i < d.steps.size(); ++i) {
    try {
      cur = apply_step(cur, d.steps[i]);
      tr.terms.push_back(serialize(cur));
      ProjClass now = canonical_class(eval(cur, opts));
      if (!(now == cls)) {
        tr.failed_step = i;
        tr.error = "step " + std::to_string(i) +
                   " changed the term's equivalence class";
        return tr;
      }
    } catch (const Error& e) {
      tr.failed_step = i;
      tr.error = e.what();
      return tr;
    }
  }
  if (!(cur == endc)) {
    tr.failed_step = d.steps.size();
    tr.error = "final term differs from the declared end term";
    return tr;
  }
  tr.ok = true;
  return tr;
}

// ----------------------------------------------------------------- JSON --

namespace {

json rat_to_json(const Rat& r) {
  if (r.get_num().fits_slong_p() && r.get_den().fits_slong_p())
    return json::array({r.get_num().get_si(), r.get_den().get_si()});
  return json::array({r.get_num().get_str(), r.get_den().get_str()});
}

Rat rat_from_value(const json& v) {
  if (v.is_array() && v.size() == 2) {
    auto part = [](const json& x) {
      if (x.is_string()) return mpz_class(x.get<std::string>(), 10);
      return mpz_class(static_cast<long>(x.get<long long>()));
    };
    mpz_class den = part(v[1]);
    if (den == 0) throw Error("zero denominator in derivation file");
    Rat r(part(v[0]), den);
    r.canonicalize();
    return r;
  }
  if (v.is_number_integer())
    return Rat(static_cast<long>(v.get<long long>()));
  if (v.is_string()) return parse_rat(v.get<std::string>());
  throw Error("bad rational value in derivation file");
}

}  // namespace

std::string derivation_json(const Derivation& d) {
  json steps = json::array();
  for (const RewriteStep& s : d.steps) {
    json ps = json::object();
    for (const auto& [k, v] : s.params) ps[k] = rat_to_json(v);
    steps.push_back(json{{"axiom", axiom_name(s.rule)},
                         {"dir", s.left_to_right ? "LR" : "RL"},
                         {"path", s.path},
                         {"params", ps}});
  }
  return json{{"start", d.start_text}, {"end", d.end_text}, {"steps", steps}}
      .dump(2);
}

Derivation derivation_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(std::string("derivation file is not valid JSON: ") +
                e.what());
  }
  try {
    Derivation d;
    d.start_text = j.at("start").get<std::string>();
    d.end_text = j.at("end").get<std::string>();
    for (const json& js : j.value("steps", json::array())) {
      RewriteStep s;
      s.rule = axiom_from_name(js.at("axiom").get<std::string>());
      std::string dir = js.value("dir", "LR");
      if (dir == "LR")
        s.left_to_right = true;
      else if (dir == "RL")
        s.left_to_right = false;
      else
        throw Error("step direction must be LR or RL");
      for (const json& p : js.value("path", json::array()))
        s.path.push_back(p.get<int>());
      if (js.contains("params"))
        for (auto it = js.at("params").begin(); it != js.at("params").end();
             ++it)
          s.params[it.key()] = rat_from_value(it.value());
      d.steps.push_back(std::move(s));
    }
    return d;
  } catch (const json::exception& e) {
    throw Error(std::string("malformed derivation file: ") + e.what());
  }
}

}  // namespace probcirc
