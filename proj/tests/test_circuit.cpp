#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "probcirc/circuit.hpp"
#include "probcirc/gates.hpp"
#include "probcirc/matrix.hpp"
#include "probcirc/random_circuit.hpp"

using namespace probcirc;

TEST_CASE("generator wire types") {
  CHECK(circ_type(Circuit::copy_gate()) == CircType{1, 2});
  CHECK(circ_type(Circuit::discard()) == CircType{1, 0});
  CHECK(circ_type(Circuit::and_gate()) == CircType{2, 1});
  CHECK(circ_type(Circuit::not_gate()) == CircType{1, 1});
  CHECK(circ_type(Circuit::flip(rat(1, 3))) == CircType{0, 1});
  CHECK(circ_type(Circuit::cond()) == CircType{2, 1});
  CHECK(circ_type(Circuit::id()) == CircType{1, 1});
  CHECK(circ_type(Circuit::id0()) == CircType{0, 0});
  CHECK(circ_type(Circuit::swap()) == CircType{2, 2});
}

TEST_CASE("composition typing") {
  Circuit c = Circuit::seq(Circuit::copy_gate(), Circuit::and_gate());
  CHECK(circ_type(c) == CircType{1, 1});
  Circuit p = Circuit::par(Circuit::copy_gate(), Circuit::flip(rat(1, 2)));
  CHECK(circ_type(p) == CircType{1, 3});
  CHECK_THROWS_AS(Circuit::seq(Circuit::copy_gate(), Circuit::not_gate()),
                  TypeMismatch);
}

TEST_CASE("flip parameter must be a probability") {
  CHECK_THROWS_AS(Circuit::flip(rat(3, 2)), Error);
  CHECK_THROWS_AS(Circuit::flip(rat(-1, 2)), Error);
  CHECK(Circuit::flip(rat(0)).flip_param() == 0);
  CHECK(Circuit::flip(rat(1)).flip_param() == 1);
}

TEST_CASE("structural equality is deep") {
  Circuit a = Circuit::seq(Circuit::flip(rat(1, 3)), Circuit::not_gate());
  Circuit b = Circuit::seq(Circuit::flip(rat(1, 3)), Circuit::not_gate());
  CHECK(a == b);
  Circuit c = Circuit::seq(Circuit::flip(rat(1, 4)), Circuit::not_gate());
  CHECK(a != c);
  CHECK(a.node_key() != nullptr);
  Circuit shared = a;
  CHECK(shared.node_key() == a.node_key());
}

TEST_CASE("fragment predicates") {
  Circuit prob = Circuit::seq(
      Circuit::par(Circuit::flip(rat(1, 3)), Circuit::flip(rat(1, 3))),
      Circuit::cond());
  Circuit caus = Circuit::seq(Circuit::flip(rat(1, 3)), Circuit::not_gate());
  Circuit boolean = Circuit::seq(Circuit::flip(rat(1)), Circuit::not_gate());
  CHECK(!is_causal(prob));
  CHECK(is_causal(caus));
  CHECK(!is_boolean(caus));
  CHECK(is_boolean(boolean));
  CHECK(is_identity_bundle(
      Circuit::par(Circuit::id(), Circuit::par(Circuit::id0(), Circuit::id()))));
  CHECK(!is_identity_bundle(Circuit::swap()));
  CHECK(generator_count(prob) == 3);
  CHECK(generator_count(Circuit::id()) == 0);
}

TEST_CASE("flatten right-nests chains and absorbs units") {
  Circuit f = Circuit::flip(rat(1, 2));
  Circuit left_nested =
      Circuit::seq(Circuit::seq(f, Circuit::not_gate()), Circuit::not_gate());
  Circuit flat = flatten(left_nested);
  REQUIRE(flat.kind() == NodeKind::Seq);
  CHECK(flat.first().kind() != NodeKind::Seq);
  CHECK(flat.second().kind() == NodeKind::Seq);  // three factors, right nested
  CHECK(flatten(flat) == flat);

  Circuit with_units = Circuit::seq(Circuit::par(Circuit::id0(), f),
                                    Circuit::par(Circuit::id(), Circuit::id0()));
  CHECK(flatten(with_units) == f);
  CHECK(flatten(identity_bundle(3)) == flatten(identity_bundle(3)));
}

TEST_CASE("flatten preserves type and semantics on random terms") {
  std::mt19937_64 rng(7);
  CircuitGenOptions opts;
  opts.allow_cond = true;
  for (int i = 0; i < 60; ++i) {
    Circuit c = random_circuit(rng, opts);
    Circuit flat = flatten(c);
    CHECK(circ_type(flat) == circ_type(c));
    CHECK(flatten(flat) == flat);
    CHECK(eval(flat) == eval(c));
  }
}

TEST_CASE("subterm and replace_subterm address the tree") {
  Circuit f = Circuit::flip(rat(1, 3));
  Circuit term =
      Circuit::seq(f, Circuit::seq(Circuit::not_gate(), Circuit::not_gate()));
  CHECK(subterm(term, {}) == term);
  CHECK(subterm(term, {0}) == f);
  CHECK(subterm(term, {1, 0}) == Circuit::not_gate());
  CHECK_THROWS_AS(subterm(term, {0, 0}), BadPath);
  CHECK_THROWS_AS(subterm(term, {5}), BadPath);

  Circuit replaced = replace_subterm(term, {0}, Circuit::flip(rat(2, 3)));
  CHECK(subterm(replaced, {0}) == Circuit::flip(rat(2, 3)));
  CHECK(subterm(replaced, {1}) == subterm(term, {1}));
  CHECK_THROWS_AS(replace_subterm(term, {0}, Circuit::copy_gate()),
                  TypeMismatch);
}

TEST_CASE("factor lists round trip through chains") {
  std::vector<Circuit> fs = {Circuit::flip(rat(1, 2)), Circuit::not_gate(),
                             Circuit::not_gate()};
  Circuit chain = seq_chain(fs);
  std::vector<Circuit> back = seq_factors(flatten(chain));
  REQUIRE(back.size() == 3);
  CHECK(back[0] == fs[0]);
  CHECK(back[1] == fs[1]);

  std::vector<Circuit> ps = {Circuit::id(), Circuit::swap()};
  Circuit pchain = par_chain(ps);
  CHECK(circ_type(pchain) == CircType{3, 3});
  CHECK(par_factors(pchain).size() == 2);
  CHECK(par_chain({}) == Circuit::id0());
  CHECK(seq_factors(Circuit::not_gate()).size() == 1);
  CHECK(par_factors(Circuit::not_gate()).size() == 1);
}
