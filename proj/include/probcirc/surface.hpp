#pragma once

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "probcirc/circuit.hpp"
#include "probcirc/matrix.hpp"

namespace probcirc::surface {

struct UnboundVariable : Error {
  using Error::Error;
};

/// Program types: Booleans and products, kept structurally so that pair
/// projections know where to split; a type's wire width is the number of
/// Boolean leaves.
struct SurfaceType {
  std::shared_ptr<const SurfaceType> left, right;  // both null for B

  bool is_bool() const { return !left; }
  int width() const {
    return is_bool() ? 1 : left->width() + right->width();
  }
  friend bool operator==(const SurfaceType& a, const SurfaceType& b) {
    if (a.is_bool() != b.is_bool()) return false;
    if (a.is_bool()) return true;
    return *a.left == *b.left && *a.right == *b.right;
  }
};

SurfaceType bool_type();
SurfaceType product_type(const SurfaceType& a, const SurfaceType& b);
std::string type_str(const SurfaceType& t);

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

/// Core expressions. The Boolean connectives and compound observations are
/// sugar and are desugared by the parser (to If/constants and to a let
/// binding with a variable observation respectively), so Observe always
/// holds a variable here.
struct Expr {
  enum class Kind { Var, Flip, Lit, Let, If, Pair, Fst, Snd, Observe, Call };
  Kind kind;
  std::string name;  // Var / Let / Call
  Rat param;         // Flip
  bool lit = false;  // Lit
  ExprPtr e0, e1, e2;
  int line = 0, col = 0;
};

ExprPtr make_expr(Expr e);

struct FunDef {
  std::string name;
  std::string param;
  SurfaceType param_type;
  std::optional<SurfaceType> declared_ret;
  ExprPtr body;
};

/// A program is a list of non-recursive function definitions (each may call
/// only earlier ones) followed by a main expression. Free variables of main
/// form its context, ordered by first occurrence and implicitly Boolean.
struct Program {
  std::vector<FunDef> funs;
  ExprPtr main;
};

/// Grammar sketch ('#' comments, whitespace insensitive):
///   program := fundef* expr
///   fundef  := "fun" name "(" name ":" type ")" [":" type] "{" expr "}"
///   type    := "B" | "(" type ")" | type "*" type
///   expr    := "let" name "=" expr "in" expr
///            | "if" expr "then" expr "else" expr | disj
///   disj    := xordisj ("or" xordisj)*
///   xordisj := conj ("xor" conj)*
///   conj    := unary ("and" unary)*
///   unary   := ("not"|"observe"|"fst"|"snd") unary | atom
///   atom    := "true" | "false" | "flip" rational | "flip(" rational ")"
///            | name | name "(" expr ")" | "(" expr ")" | "(" expr "," expr ")"
Program parse_program(const std::string& text);

struct TypedProgram {
  std::vector<std::pair<std::string, SurfaceType>> context;
  SurfaceType main_type;
};

/// Checks every definition and main; resolves the implicit context.
/// Throws TypeMismatch / UnboundVariable with positions in the message.
TypedProgram typecheck_program(const Program& p);

/// Replaces every call by a let binding of the argument over the callee's
/// body; the result has no Call nodes in main.
Program inline_calls(const Program& p);

/// Compiles the (inlined) main expression to a circuit |context| -> |type|.
Circuit translate(const Program& p);

/// canonical_class(eval(translate(p))).
ProjClass infer(const Program& p, const EvalOptions& opts = {});

/// For closed programs: {"class":"canonical","dist":{"<bits>":[num,den]}}
/// or {"class":"bottom",...}; open programs use the matrix entry layout.
std::string infer_json(const Program& p, const EvalOptions& opts = {});

}  // namespace probcirc::surface
