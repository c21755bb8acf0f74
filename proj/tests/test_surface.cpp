#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <functional>
#include <json.hpp>
#include <string>

#include "probcirc/circuit.hpp"
#include "probcirc/matrix.hpp"
#include "probcirc/normalform.hpp"
#include "probcirc/surface.hpp"
#include "world_interp.hpp"

using namespace probcirc;
using namespace probcirc::surface;
using nlohmann::json;

namespace {

const char* const URN = R"(
let firstball = flip 1/2 in
let redball = true in
let draw = if flip 1/2 then redball else firstball in
let _ = observe draw in
firstball
)";

const char* const COIN_TRICK = R"(
let first = flip 1/3 in
let second = flip 1/3 in
let compare = first xor second in
let _ = observe compare in
first
)";

const char* const THREE_COIN = R"(
let x = flip 1/10 in
let y = if x then flip 1/5 else flip 3/10 in
let z = if y then flip 2/5 else flip 1/2 in
z
)";

const char* const OPEN_XOR = R"(
let y = flip 1/2 in
let compare = x xor y in
let _ = observe (not compare) in
y
)";

const char* const CONTEXT_F = R"(
fun f(x : B) : B {
  let y = x or flip 1/2 in
  let z = observe y in
  y
}
let x = flip 1/10 in
let obs = f(x) in
x
)";

const char* const CONTEXT_G = R"(
fun g(x : B) : B { true }
let x = flip 1/10 in
let obs = g(x) in
x
)";

ProjClass point_class(const Rat& p1) {
  Mat m(2, 1);
  m << 1 - p1, p1;
  return canonical_class(SubStochMatrix{0, 1, m});
}

}  // namespace

TEST_CASE("parsing of core forms") {
  Program p = parse_program("flip 1/2");
  CHECK(p.main->kind == Expr::Kind::Flip);
  CHECK(p.main->param == rat(1, 2));
  CHECK(parse_program("flip(0.25)").main->param == rat(1, 4));

  Program letp = parse_program("let a = true in a");
  REQUIRE(letp.main->kind == Expr::Kind::Let);
  CHECK(letp.main->name == "a");
  CHECK(letp.main->e0->kind == Expr::Kind::Lit);
  CHECK(letp.main->e1->kind == Expr::Kind::Var);

  Program pairp = parse_program("fst (true, flip 1/2)");
  REQUIRE(pairp.main->kind == Expr::Kind::Fst);
  CHECK(pairp.main->e0->kind == Expr::Kind::Pair);

  Program funp = parse_program("fun h(a : B * B) : B { fst a } h((true, false))");
  REQUIRE(funp.funs.size() == 1);
  CHECK(funp.funs[0].param_type.width() == 2);
  CHECK(funp.main->kind == Expr::Kind::Call);
}

TEST_CASE("connectives desugar to conditionals") {
  Program orp = parse_program("true or false");
  REQUIRE(orp.main->kind == Expr::Kind::If);
  CHECK(orp.main->e1->kind == Expr::Kind::Lit);  // then-branch true
  CHECK(orp.main->e1->lit);

  Program andp = parse_program("true and false");
  REQUIRE(andp.main->kind == Expr::Kind::If);
  CHECK(andp.main->e2->kind == Expr::Kind::Lit);  // else-branch false
  CHECK(!andp.main->e2->lit);

  Program notp = parse_program("not true");
  REQUIRE(notp.main->kind == Expr::Kind::If);
  CHECK(!notp.main->e1->lit);
  CHECK(notp.main->e2->lit);

  // xor shares its right operand through a fresh binding, so effects are not
  // duplicated
  Program xorp = parse_program("true xor false");
  REQUIRE(xorp.main->kind == Expr::Kind::Let);
  CHECK(xorp.main->name.front() == '%');

  // a compound observation is bound to a fresh variable first
  Program obsp = parse_program("observe (not true)");
  REQUIRE(obsp.main->kind == Expr::Kind::Let);
  CHECK(obsp.main->e1->kind == Expr::Kind::Observe);
  CHECK(obsp.main->e1->e0->kind == Expr::Kind::Var);

  // a variable observation needs no extra binding
  Program obsv = parse_program("let a = true in observe a");
  CHECK(obsv.main->e1->kind == Expr::Kind::Observe);
}

TEST_CASE("program syntax errors") {
  CHECK_THROWS_AS(parse_program("let x = in x"), SyntaxError);
  CHECK_THROWS_AS(parse_program("if true then false"), SyntaxError);
  CHECK_THROWS_AS(parse_program("flip 3/2"), SyntaxError);
  CHECK_THROWS_AS(parse_program("fun f(x : B) { x }"), SyntaxError);
  CHECK_THROWS_AS(parse_program(""), SyntaxError);
  try {
    parse_program("let a = true in\nlet b = ( in b");
    FAIL("expected SyntaxError");
  } catch (const SyntaxError& e) {
    CHECK(e.line == 2);
  }
}

TEST_CASE("typechecking resolves the implicit Boolean context") {
  TypedProgram open_t = typecheck_program(parse_program(OPEN_XOR));
  REQUIRE(open_t.context.size() == 1);
  CHECK(open_t.context[0].first == "x");
  CHECK(open_t.context[0].second.is_bool());
  CHECK(open_t.main_type.is_bool());

  TypedProgram closed = typecheck_program(parse_program(URN));
  CHECK(closed.context.empty());

  TypedProgram pair_t = typecheck_program(parse_program("(true, flip 1/2)"));
  CHECK(pair_t.main_type.width() == 2);

  // free variables are ordered by first occurrence
  TypedProgram two = typecheck_program(parse_program("let c = b and a in a"));
  REQUIRE(two.context.size() == 2);
  CHECK(two.context[0].first == "b");
  CHECK(two.context[1].first == "a");
}

TEST_CASE("type errors") {
  CHECK_THROWS_AS(typecheck_program(parse_program(
                      "if true then (true, true) else false")),
                  TypeMismatch);
  CHECK_THROWS_AS(typecheck_program(parse_program("if (true, true) then true else false")),
                  TypeMismatch);
  CHECK_THROWS_AS(typecheck_program(parse_program("fst true")), TypeMismatch);
  CHECK_THROWS_AS(typecheck_program(parse_program("observe (true, true)")),
                  TypeMismatch);
  CHECK_THROWS_AS(typecheck_program(parse_program(
                      "fun f(x : B) : B * B { x } f(true)")),
                  TypeMismatch);
  CHECK_THROWS_AS(typecheck_program(parse_program(
                      "fun f(x : B) : B { x } fun f(x : B) : B { x } f(true)")),
                  TypeMismatch);
  CHECK_THROWS_AS(typecheck_program(parse_program(
                      "fun f(x : B) : B { f(x) } f(true)")),
                  UnboundVariable);
  CHECK_THROWS_AS(typecheck_program(parse_program(
                      "fun f(x : B) : B { g(x) } fun g(x : B) : B { x } f(true)")),
                  UnboundVariable);
  // function bodies close over their parameter only
  CHECK_THROWS_AS(typecheck_program(parse_program(
                      "fun f(x : B) : B { y } let y = true in f(y)")),
                  UnboundVariable);
  CHECK_THROWS_AS(typecheck_program(parse_program(
                      "fun f(x : B) : B { x } f((true, true))")),
                  TypeMismatch);
}

TEST_CASE("shadowing rebinds the nearest variable") {
  Program p = parse_program("let a = true in let a = flip 1/3 in a");
  CHECK(infer(p) == point_class(rat(1, 3)));
}

TEST_CASE("translation gives the declared wire type") {
  Program urn = parse_program(URN);
  CHECK(circ_type(translate(urn)) == CircType{0, 1});
  Program open = parse_program(OPEN_XOR);
  CHECK(circ_type(translate(open)) == CircType{1, 1});
  Program pair = parse_program("(true, (flip 1/2, false))");
  CHECK(circ_type(translate(pair)) == CircType{0, 3});
}

TEST_CASE("posterior of the urn puzzle") {
  CHECK(infer(parse_program(URN)) == point_class(rat(2, 3)));
}

TEST_CASE("rejection trick turns a biased coin fair") {
  CHECK(infer(parse_program(COIN_TRICK)) == point_class(rat(1, 2)));
}

TEST_CASE("chained conditional coins") {
  CHECK(infer(parse_program(THREE_COIN)) == point_class(rat(471, 1000)));
}

TEST_CASE("an unsatisfiable observation yields the empty class") {
  ProjClass cls = infer(parse_program("let x = false in let _ = observe x in x"));
  CHECK(cls.bottom);
}

TEST_CASE("open program equivalent to the identity") {
  Program p = parse_program(OPEN_XOR);
  SubStochMatrix M = eval(translate(p));
  // every world carries weight 1/2, so the matrix is half the identity
  CHECK(M.m(0, 0) == rat(1, 2));
  CHECK(M.m(1, 0) == 0);
  CHECK(M.m(1, 1) == rat(1, 2));
  CHECK(prop_equal(M, eval(Circuit::id())));
}

TEST_CASE("contexts distinguish an observing function from constant true") {
  CHECK(infer(parse_program(CONTEXT_F)) == point_class(rat(2, 11)));
  CHECK(infer(parse_program(CONTEXT_G)) == point_class(rat(1, 10)));
  CHECK(!equiv(translate(parse_program(CONTEXT_F)),
               translate(parse_program(CONTEXT_G))));

  // the observing function itself, applied to a free variable: input 1 passes
  // always, input 0 passes with probability 1/2
  Program open_f = parse_program(
      "fun f(x : B) : B { let y = x or flip 1/2 in let z = observe y in y } "
      "f(x)");
  SubStochMatrix F = eval(translate(open_f));
  CHECK(F.m(0, 0) == 0);
  CHECK(F.m(1, 0) == rat(1, 2));
  CHECK(F.m(0, 1) == 0);
  CHECK(F.m(1, 1) == 1);
}

TEST_CASE("translation agrees with the weighted-world interpreter") {
  for (const char* text : {URN, COIN_TRICK, THREE_COIN, OPEN_XOR, CONTEXT_F,
                           CONTEXT_G,
                           "let x = flip 1/3 in (x, if x then flip 1/4 else x)",
                           "let p = (flip 1/2, flip 1/3) in observe (fst p)",
                           "a and (b or not a)"}) {
    Program p = parse_program(text);
    CHECK(testsupport::interp_matrix(p) == eval(translate(p)));
  }
}

TEST_CASE("inlining removes calls and preserves meaning") {
  Program p = parse_program(CONTEXT_F);
  Program inlined = inline_calls(p);
  std::function<bool(const ExprPtr&)> no_calls = [&](const ExprPtr& e) -> bool {
    if (!e) return true;
    if (e->kind == Expr::Kind::Call) return false;
    return no_calls(e->e0) && no_calls(e->e1) && no_calls(e->e2);
  };
  CHECK(no_calls(inlined.main));
  CHECK(infer(inlined) == infer(p));
}

TEST_CASE("machine-readable inference output") {
  json urn = json::parse(infer_json(parse_program(URN)));
  CHECK(urn["class"] == "canonical");
  CHECK(urn["dist"]["1"] == json::array({2, 3}));
  CHECK(urn["dist"]["0"] == json::array({1, 3}));

  json bot = json::parse(
      infer_json(parse_program("let x = false in let _ = observe x in x")));
  CHECK(bot["class"] == "bottom");

  json open = json::parse(infer_json(parse_program(OPEN_XOR)));
  CHECK(open["class"] == "canonical");
  CHECK(open["in"] == 1);
}

TEST_CASE("xor does not duplicate the weight of its operands") {
  // with a naive duplicating expansion the observation inside the shared
  // operand would be counted twice and the posterior would shift
  Program p = parse_program(
      "let a = flip 1/3 in "
      "let b = (let c = flip 1/2 in let _ = observe (c or a) in c) in "
      "(a xor b)");
  SubStochMatrix M = testsupport::interp_matrix(p);
  CHECK(eval(translate(p)) == M);
}
