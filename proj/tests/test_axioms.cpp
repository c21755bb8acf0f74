#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>
#include <string>

#include "probcirc/axioms.hpp"
#include "probcirc/circuit.hpp"
#include "probcirc/circuit_text.hpp"
#include "probcirc/gates.hpp"
#include "probcirc/matrix.hpp"

using namespace probcirc;

namespace {

const char* const TRICK_DERIVATION = R"json(
{
  "start": "seq(par(seq(flip(1/3), copy), seq(flip(1/3), not)), seq(par(id, cond), par(id, del)))",
  "end": "flip(1/2)",
  "steps": [
    { "axiom": "FlipNot", "dir": "LR", "path": [0, 1], "params": { "p": [1, 3] } },
    { "axiom": "Interchange", "dir": "RL", "path": [0] },
    { "axiom": "CondCopyL", "dir": "LR", "path": [1] },
    { "axiom": "CopyUnitR", "dir": "LR", "path": [1, 1] },
    { "axiom": "AgreeFlips", "dir": "LR", "path": [], "params": { "p": [1, 3], "q": [2, 3] } }
  ]
}
)json";

}  // namespace

TEST_CASE("the catalog is complete and self-consistent") {
  const std::vector<AxiomId>& ids = all_axioms();
  CHECK(ids.size() == 42);

  std::set<std::string> names;
  int primitive = 0;
  for (AxiomId id : ids) {
    const AxiomInfo& info = axiom_info(id);
    CHECK(info.id == id);
    CHECK(names.insert(info.name).second);  // unique names
    CHECK(!info.statement.empty());
    CHECK(axiom_from_name(info.name) == id);
    if (!info.derived) ++primitive;
  }
  CHECK(primitive == 39);
  CHECK_THROWS_AS(axiom_from_name("nonsense"), Error);

  for (AxiomId id : {AxiomId::CondUnitL, AxiomId::CondUnitR, AxiomId::PosteriorCollapse,
                     AxiomId::AgreeFlips})
    CHECK(axiom_info(id).propositional);
  for (AxiomId id : {AxiomId::SeqAssoc, AxiomId::ParAssoc, AxiomId::Interchange,
                     AxiomId::SeqUnit, AxiomId::ParUnit, AxiomId::SymNat,
                     AxiomId::DeleteCausal})
    CHECK(axiom_info(id).has_holes);
  for (AxiomId id : {AxiomId::MuxMixture, AxiomId::AgreeFlips,
                     AxiomId::DeleteCausal})
    CHECK(axiom_info(id).derived);
  CHECK(!axiom_info(AxiomId::CopyAssoc).propositional);
  CHECK(!axiom_info(AxiomId::MixturePosterior).has_holes);
}

TEST_CASE("instantiation builds the catalogued shapes") {
  AxiomInstance e1 = instantiate(AxiomId::FlipNot, {{"p", rat(1, 3)}});
  CHECK(flatten(e1.lhs) ==
        flatten(Circuit::seq(Circuit::flip(rat(1, 3)), Circuit::not_gate())));
  CHECK(flatten(e1.rhs) == Circuit::flip(rat(2, 3)));

  AxiomInstance a1 = instantiate(AxiomId::CopyAssoc, {});
  CHECK(eval(a1.lhs) == eval(a1.rhs));
  CHECK(circ_type(a1.lhs) == CircType{1, 3});

  AxiomInstance mult =
      instantiate(AxiomId::AgreeFlips, {{"p", rat(1, 3)}, {"q", rat(1, 4)}});
  CHECK(flatten(mult.rhs) == Circuit::flip(rat(1, 7)));
  CHECK(prop_equal(eval(mult.lhs), eval(mult.rhs)));

  AxiomInstance f7 = instantiate(
      AxiomId::PosteriorCollapse,
      {{"p0", rat(1, 2)}, {"p1", rat(1, 4)}, {"p2", rat(3, 4)}});
  CHECK(flatten(f7.rhs) == Circuit::flip(rat(1, 2)));
  CHECK(prop_equal(eval(f7.lhs), eval(f7.rhs)));

  AxiomInstance e5 = instantiate(
      AxiomId::MuxMixture,
      {{"r", rat(1, 2)}, {"p", rat(1, 4)}, {"q", rat(3, 4)}});
  CHECK(flatten(e5.rhs) == Circuit::flip(rat(1, 2)));
  CHECK(eval(e5.lhs) == eval(e5.rhs));
}

TEST_CASE("instantiation validates parameters and side conditions") {
  CHECK_THROWS_AS(instantiate(AxiomId::FlipNot, {}), MissingParam);
  CHECK_THROWS_AS(instantiate(AxiomId::FlipNot, {{"p", rat(3, 2)}}),
                  SideConditionViolated);
  CHECK_THROWS_AS(instantiate(AxiomId::SelectRegroup, {{"p", rat(1)}, {"q", rat(1)}}),
                  SideConditionViolated);
  CHECK_THROWS_AS(
      instantiate(AxiomId::PosteriorCollapse,
                  {{"p0", rat(1)}, {"p1", rat(0)}, {"p2", rat(1)}}),
      SideConditionViolated);
  CHECK_THROWS_AS(instantiate(AxiomId::SeqAssoc, {}), Error);
  CHECK_THROWS_AS(instantiate(AxiomId::DeleteCausal, {}), Error);
}

TEST_CASE("degenerate posteriors stay free parameters") {
  // with r = 0 and q = 0 the branch guarded by the hidden coin is never
  // taken, so its announced posterior is unconstrained
  AxiomInstance free_pt = instantiate(
      AxiomId::MixturePosterior, {{"r", rat(0)}, {"p", rat(2, 5)}, {"q", rat(0)}});
  CHECK(eval(free_pt.lhs) == eval(free_pt.rhs));

  AxiomInstance chosen_pt = instantiate(
      AxiomId::MixturePosterior, {{"r", rat(0)}, {"p", rat(2, 5)}, {"q", rat(0)},
                    {"pt", rat(9, 10)}});
  CHECK(eval(chosen_pt.lhs) == eval(chosen_pt.rhs));

  // when the mixture weight is strictly inside (0,1) the posterior is
  // determined and a contradicting value is rejected
  CHECK_THROWS_AS(
      instantiate(AxiomId::MixturePosterior, {{"r", rat(1, 2)}, {"p", rat(1, 2)},
                                {"q", rat(1, 2)}, {"pt", rat(1, 5)}}),
      SideConditionViolated);
}

TEST_CASE("every catalogued rule passes its randomized soundness check") {
  for (const SoundnessReport& r : check_all_axioms(3, 20260825)) {
    CHECK(r.passes == r.trials);
    if (r.passes != r.trials)
      MESSAGE(r.name << ": " << r.counterexample);
  }
}

TEST_CASE("propositional rules hold up to scaling but not on the nose") {
  AxiomInstance f2 = instantiate(AxiomId::CondUnitL, {});
  CHECK(prop_equal(eval(f2.lhs), eval(f2.rhs)));
  CHECK(eval(f2.lhs) != eval(f2.rhs));  // the lhs carries mass 1/2
  SoundnessReport rep = check_soundness(AxiomId::CondUnitL, 5, 99);
  CHECK(rep.propositional);
  CHECK(rep.passes == 5);
}

TEST_CASE("rewrite steps replace an instantiated prefix") {
  Circuit nn = Circuit::seq(Circuit::not_gate(), Circuit::not_gate());
  CHECK(apply_step(nn, {AxiomId::NotInvol, true, {}, {}}) == Circuit::id());

  // the chain suffix survives
  Circuit nnn = Circuit::seq(nn, Circuit::not_gate());
  CHECK(apply_step(nnn, {AxiomId::NotInvol, true, {}, {}}) == Circuit::not_gate());

  // a path addresses one parallel factor
  Circuit inside =
      Circuit::par(Circuit::seq(Circuit::flip(rat(1, 3)), Circuit::not_gate()),
                   Circuit::copy_gate());
  Circuit rewritten =
      apply_step(inside, {AxiomId::FlipNot, true, {0}, {{"p", rat(1, 3)}}});
  CHECK(rewritten ==
        flatten(Circuit::par(Circuit::flip(rat(2, 3)), Circuit::copy_gate())));

  // right-to-left swaps source and target
  Circuit back = apply_step(Circuit::flip(rat(2, 3)),
                            {AxiomId::FlipNot, false, {}, {{"p", rat(1, 3)}}});
  CHECK(back == flatten(Circuit::seq(Circuit::flip(rat(1, 3)),
                                     Circuit::not_gate())));
}

TEST_CASE("boundary selectors insert structure at a wire") {
  // output boundary: duplicate-then-drop appears after the term
  Circuit grown = apply_step(Circuit::flip(rat(1, 2)),
                             {AxiomId::CopyUnitR, false, {3}, {}});
  CHECK(grown == flatten(Circuit::seq(
                     Circuit::flip(rat(1, 2)),
                     Circuit::seq(Circuit::copy_gate(),
                                  Circuit::par(Circuit::id(),
                                               Circuit::discard())))));

  // input boundary: a double negation appears before the term
  Circuit fed = apply_step(Circuit::not_gate(), {AxiomId::NotInvol, false, {2}, {}});
  CHECK(fed == flatten(Circuit::seq(
                   Circuit::not_gate(),
                   Circuit::seq(Circuit::not_gate(), Circuit::not_gate()))));
}

TEST_CASE("structural laws validate the path and leave the term flat") {
  Circuit three = Circuit::seq(
      Circuit::seq(Circuit::not_gate(), Circuit::not_gate()),
      Circuit::not_gate());
  Circuit flat = apply_step(three, {AxiomId::SeqAssoc, true, {}, {}});
  CHECK(flat == flatten(three));
  CHECK(apply_step(three, {AxiomId::SeqUnit, true, {}, {}}) == flatten(three));
  CHECK_THROWS_AS(apply_step(three, {AxiomId::SeqAssoc, true, {0, 0}, {}}),
                  BadPath);
}

TEST_CASE("interchange slides parallel blocks past each other") {
  Circuit lhs = Circuit::seq(Circuit::par(Circuit::copy_gate(), Circuit::not_gate()),
                             Circuit::par(Circuit::swap(), Circuit::not_gate()));
  Circuit rhs = Circuit::par(
      Circuit::seq(Circuit::copy_gate(), Circuit::swap()),
      Circuit::seq(Circuit::not_gate(), Circuit::not_gate()));
  Circuit forward = apply_step(lhs, {AxiomId::Interchange, true, {}, {}});
  CHECK(forward == flatten(rhs));
  CHECK(eval(forward) == eval(lhs));
  Circuit backward = apply_step(forward, {AxiomId::Interchange, false, {}, {}});
  CHECK(backward == flatten(lhs));
}

TEST_CASE("discarding a causal circuit collapses to discards") {
  Circuit term = Circuit::seq(
      Circuit::seq(Circuit::copy_gate(),
                   Circuit::par(Circuit::not_gate(), Circuit::id())),
      Circuit::par(Circuit::discard(), Circuit::discard()));
  Circuit out = apply_step(term, {AxiomId::DeleteCausal, true, {}, {}});
  CHECK(out == Circuit::discard());

  // refuses when the discarded prefix can condition
  Circuit guarded = Circuit::seq(
      Circuit::seq(Circuit::par(Circuit::id(), Circuit::flip(rat(1, 2))),
                   Circuit::cond()),
      Circuit::discard());
  CHECK_THROWS_AS(
      apply_step(guarded, {AxiomId::DeleteCausal, true, {}, {}}),
      PatternMismatch);
}

TEST_CASE("rewrite step errors") {
  CHECK_THROWS_AS(
      apply_step(Circuit::flip(rat(1, 2)), {AxiomId::NotInvol, true, {}, {}}),
      PatternMismatch);
  CHECK_THROWS_AS(
      apply_step(Circuit::flip(rat(1, 2)), {AxiomId::NotInvol, true, {0}, {}}),
      BadPath);
  CHECK_THROWS_AS(
      apply_step(Circuit::seq(Circuit::flip(rat(1, 3)), Circuit::not_gate()),
                 {AxiomId::FlipNot, true, {}, {}}),
      MissingParam);
  CHECK_THROWS_AS(
      apply_step(Circuit::seq(Circuit::flip(rat(1, 3)), Circuit::not_gate()),
                 {AxiomId::FlipNot, true, {}, {{"p", rat(2)}}}),
      SideConditionViolated);
  // boundary insertion demands an identity source side
  CHECK_THROWS_AS(
      apply_step(Circuit::flip(rat(1, 2)), {AxiomId::NotInvol, true, {3}, {}}),
      PatternMismatch);
}

TEST_CASE("the biased-coin derivation replays end to end") {
  Derivation d = derivation_from_json(TRICK_DERIVATION);
  REQUIRE(d.steps.size() == 5);
  DerivationTrace tr = check_derivation(d);
  CHECK(tr.ok);
  REQUIRE(tr.terms.size() == 6);
  CHECK(tr.terms.back() == "flip(1/2)");
  CHECK(parse_circuit(tr.terms.front()) == flatten(parse_circuit(d.start_text)));
}

TEST_CASE("mutated derivations are rejected at the right step") {
  Derivation wrong_path = derivation_from_json(TRICK_DERIVATION);
  wrong_path.steps[0].path = {1};
  DerivationTrace t1 = check_derivation(wrong_path);
  CHECK(!t1.ok);
  CHECK(t1.failed_step == 0);

  Derivation wrong_param = derivation_from_json(TRICK_DERIVATION);
  wrong_param.steps[4].params["q"] = rat(1, 2);
  DerivationTrace t2 = check_derivation(wrong_param);
  CHECK(!t2.ok);
  CHECK(t2.failed_step == 4);

  Derivation wrong_end = derivation_from_json(TRICK_DERIVATION);
  wrong_end.end_text = "flip(1/3)";
  DerivationTrace t3 = check_derivation(wrong_end);
  CHECK(!t3.ok);
  CHECK(t3.failed_step == wrong_end.steps.size());
  CHECK(t3.error.find("end term") != std::string::npos);

  Derivation no_steps;
  no_steps.start_text = "flip(1/3)";
  no_steps.end_text = "flip(1/2)";
  DerivationTrace t4 = check_derivation(no_steps);
  CHECK(!t4.ok);
  CHECK(t4.failed_step == 0);

  Derivation bad_start;
  bad_start.start_text = "bogus";
  bad_start.end_text = "id";
  DerivationTrace t5 = check_derivation(bad_start);
  CHECK(!t5.ok);
  CHECK(t5.error.find("start term") != std::string::npos);
}

TEST_CASE("derivations round trip through json") {
  Derivation d = derivation_from_json(TRICK_DERIVATION);
  Derivation back = derivation_from_json(derivation_json(d));
  CHECK(back.start_text == d.start_text);
  CHECK(back.end_text == d.end_text);
  REQUIRE(back.steps.size() == d.steps.size());
  for (std::size_t i = 0; i < d.steps.size(); ++i) {
    CHECK(back.steps[i].rule == d.steps[i].rule);
    CHECK(back.steps[i].left_to_right == d.steps[i].left_to_right);
    CHECK(back.steps[i].path == d.steps[i].path);
    CHECK(back.steps[i].params == d.steps[i].params);
  }

  // parameter values come in three spellings
  Derivation spellings = derivation_from_json(R"json({
    "start": "seq(flip(1/3), not)", "end": "flip(2/3)",
    "steps": [{"axiom": "FlipNot", "dir": "LR", "path": [], "params": {"p": "1/3"}}]
  })json");
  CHECK(spellings.steps[0].params.at("p") == rat(1, 3));
  CHECK(check_derivation(spellings).ok);

  CHECK_THROWS_AS(derivation_from_json("not json at all"), Error);
  CHECK_THROWS_AS(derivation_from_json(R"({"start": "id"})"), Error);
}
