#include "probcirc/surface.hpp"

#include <json.hpp>

#include <cctype>
#include <map>
#include <set>

#include "probcirc/gates.hpp"

namespace probcirc::surface {

using nlohmann::json;

SurfaceType bool_type() { return SurfaceType{}; }

SurfaceType product_type(const SurfaceType& a, const SurfaceType& b) {
  return SurfaceType{std::make_shared<SurfaceType>(a), std::make_shared<SurfaceType>(b)};
}

std::string type_str(const SurfaceType& t) {
  if (t.is_bool()) return "B";
  return "(" + type_str(*t.left) + " * " + type_str(*t.right) + ")";
}

ExprPtr make_expr(Expr e) { return std::make_shared<Expr>(std::move(e)); }

namespace {

std::string at(const Expr& e) {
  return " (line " + std::to_string(e.line) + ", column " +
         std::to_string(e.col) + ")";
}

// ---------------------------------------------------------------- lexer --

struct Token {
  enum class Tag { Ident, Keyword, Number, Punct, End };
  Tag tag;
  std::string text;
  int line, col;
};

const std::set<std::string> kKeywords = {
    "fun", "let", "in", "if", "then", "else", "flip", "observe",
    "true", "false", "fst", "snd", "not", "and", "or", "xor"};

class Lexer {
 public:
  explicit Lexer(const std::string& text) : text_(text) { next(); }

  const Token& peek() const { return tok_; }

  Token take() {
    Token t = tok_;
    next();
    return t;
  }

 private:
  const std::string& text_;
  std::size_t pos_ = 0;
  int line_ = 1, col_ = 1;
  Token tok_;

  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void next() {
    while (pos_ < text_.size()) {
      char ch = text_[pos_];
      if (ch == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(ch))) {
        advance();
      } else {
        break;
      }
    }
    tok_.line = line_;
    tok_.col = col_;
    if (pos_ >= text_.size()) {
      tok_ = {Token::Tag::End, "", line_, col_};
      return;
    }
    char ch = text_[pos_];
    if (std::isalpha(static_cast<unsigned char>(ch)) || ch == '_') {
      std::string w;
      while (pos_ < text_.size() &&
             (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
              text_[pos_] == '_' || text_[pos_] == '\''))
        w.push_back(text_[pos_]), advance();
      tok_.tag = kKeywords.count(w) ? Token::Tag::Keyword : Token::Tag::Ident;
      tok_.text = w;
      return;
    }
    if (std::isdigit(static_cast<unsigned char>(ch))) {
      std::string w;
      while (pos_ < text_.size() &&
             (std::isdigit(static_cast<unsigned char>(text_[pos_])) ||
              text_[pos_] == '/' || text_[pos_] == '.'))
        w.push_back(text_[pos_]), advance();
      tok_ = {Token::Tag::Number, w, tok_.line, tok_.col};
      return;
    }
    static const std::string punct = "(){},:*=";
    if (punct.find(ch) != std::string::npos) {
      tok_ = {Token::Tag::Punct, std::string(1, ch), tok_.line, tok_.col};
      advance();
      return;
    }
    throw SyntaxError(std::string("unexpected character '") + ch + "'",
                      line_, col_);
  }
};

// --------------------------------------------------------------- parser --

class ProgParser {
 public:
  explicit ProgParser(const std::string& text) : lex_(text) {}

  Program parse() {
    Program p;
    while (lex_.peek().tag == Token::Tag::Keyword &&
           lex_.peek().text == "fun")
      p.funs.push_back(fundef());
    p.main = expr();
    if (lex_.peek().tag != Token::Tag::End)
      fail("trailing input after the main expression");
    return p;
  }

 private:
  Lexer lex_;
  int fresh_ = 0;

  [[noreturn]] void fail(const std::string& msg) {
    const Token& t = lex_.peek();
    throw SyntaxError(msg, t.line, t.col);
  }

  bool at_punct(const std::string& p) {
    return lex_.peek().tag == Token::Tag::Punct && lex_.peek().text == p;
  }

  bool at_keyword(const std::string& k) {
    return lex_.peek().tag == Token::Tag::Keyword && lex_.peek().text == k;
  }

  void expect_punct(const std::string& p) {
    if (!at_punct(p)) fail("expected '" + p + "'");
    lex_.take();
  }

  void expect_keyword(const std::string& k) {
    if (!at_keyword(k)) fail("expected '" + k + "'");
    lex_.take();
  }

  std::string ident() {
    if (lex_.peek().tag != Token::Tag::Ident) fail("expected a name");
    return lex_.take().text;
  }

  Rat number() {
    if (lex_.peek().tag != Token::Tag::Number) fail("expected a probability");
    Token t = lex_.take();
    try {
      return parse_rat(t.text);
    } catch (const Error& e) {
      throw SyntaxError(e.what(), t.line, t.col);
    }
  }

  SurfaceType type_atom() {
    if (at_punct("(")) {
      lex_.take();
      SurfaceType t = type();
      expect_punct(")");
      return t;
    }
    if (lex_.peek().tag == Token::Tag::Ident && lex_.peek().text == "B") {
      lex_.take();
      return bool_type();
    }
    fail("expected a type");
  }

  SurfaceType type() {
    SurfaceType t = type_atom();
    if (at_punct("*")) {
      lex_.take();
      return product_type(t, type());
    }
    return t;
  }

  FunDef fundef() {
    expect_keyword("fun");
    FunDef f;
    f.name = ident();
    expect_punct("(");
    f.param = ident();
    expect_punct(":");
    f.param_type = type();
    expect_punct(")");
    if (at_punct(":")) {
      lex_.take();
      f.declared_ret = type();
    }
    expect_punct("{");
    f.body = expr();
    expect_punct("}");
    return f;
  }

  Expr stamp(Expr e, const Token& t) {
    e.line = t.line;
    e.col = t.col;
    return e;
  }

  ExprPtr lit(bool v, const Token& t) {
    Expr e;
    e.kind = Expr::Kind::Lit;
    e.lit = v;
    return make_expr(stamp(std::move(e), t));
  }

  ExprPtr mk_if(ExprPtr g, ExprPtr th, ExprPtr el, const Token& t) {
    Expr e;
    e.kind = Expr::Kind::If;
    e.e0 = std::move(g);
    e.e1 = std::move(th);
    e.e2 = std::move(el);
    return make_expr(stamp(std::move(e), t));
  }

  ExprPtr expr() {
    Token t = lex_.peek();
    if (at_keyword("let")) {
      lex_.take();
      Expr e;
      e.kind = Expr::Kind::Let;
      e.name = ident();
      expect_punct("=");
      e.e0 = expr();
      expect_keyword("in");
      e.e1 = expr();
      return make_expr(stamp(std::move(e), t));
    }
    if (at_keyword("if")) {
      lex_.take();
      ExprPtr g = expr();
      expect_keyword("then");
      ExprPtr th = expr();
      expect_keyword("else");
      ExprPtr el = expr();
      return mk_if(std::move(g), std::move(th), std::move(el), t);
    }
    return disj();
  }

  ExprPtr disj() {
    ExprPtr e = xordisj();
    while (at_keyword("or")) {
      Token t = lex_.take();
      // a or b  ==  if a then true else b
      e = mk_if(e, lit(true, t), xordisj(), t);
    }
    return e;
  }

  ExprPtr xordisj() {
    ExprPtr e = conj();
    while (at_keyword("xor")) {
      Token t = lex_.take();
      ExprPtr rhs = conj();
      // a xor b  ==  let w = b in if a then not w else w   (fresh w, so the
      // right operand is evaluated once even though it feeds both branches)
      std::string w = "%x" + std::to_string(fresh_++);
      Expr var;
      var.kind = Expr::Kind::Var;
      var.name = w;
      ExprPtr v = make_expr(stamp(std::move(var), t));
      Expr let;
      let.kind = Expr::Kind::Let;
      let.name = w;
      let.e0 = rhs;
      let.e1 = mk_if(e, mk_if(v, lit(false, t), lit(true, t), t), v, t);
      e = make_expr(stamp(std::move(let), t));
    }
    return e;
  }

  ExprPtr conj() {
    ExprPtr e = unary();
    while (at_keyword("and")) {
      Token t = lex_.take();
      // a and b  ==  if a then b else false
      e = mk_if(e, unary(), lit(false, t), t);
    }
    return e;
  }

  ExprPtr unary() {
    Token t = lex_.peek();
    if (at_keyword("not")) {
      lex_.take();
      return mk_if(unary(), lit(false, t), lit(true, t), t);
    }
    if (at_keyword("observe")) {
      lex_.take();
      ExprPtr inner = unary();
      if (inner->kind == Expr::Kind::Var) {
        Expr e;
        e.kind = Expr::Kind::Observe;
        e.e0 = inner;
        return make_expr(stamp(std::move(e), t));
      }
      // observe e  ==  let w = e in observe w  (fresh w)
      std::string w = "%o" + std::to_string(fresh_++);
      Expr var;
      var.kind = Expr::Kind::Var;
      var.name = w;
      Expr obs;
      obs.kind = Expr::Kind::Observe;
      obs.e0 = make_expr(stamp(std::move(var), t));
      Expr let;
      let.kind = Expr::Kind::Let;
      let.name = w;
      let.e0 = inner;
      let.e1 = make_expr(stamp(std::move(obs), t));
      return make_expr(stamp(std::move(let), t));
    }
    if (at_keyword("fst") || at_keyword("snd")) {
      bool is_fst = lex_.take().text == "fst";
      Expr e;
      e.kind = is_fst ? Expr::Kind::Fst : Expr::Kind::Snd;
      e.e0 = unary();
      return make_expr(stamp(std::move(e), t));
    }
    return atom();
  }

  ExprPtr atom() {
    Token t = lex_.peek();
    if (at_keyword("true")) {
      lex_.take();
      return lit(true, t);
    }
    if (at_keyword("false")) {
      lex_.take();
      return lit(false, t);
    }
    if (at_keyword("flip")) {
      lex_.take();
      Expr e;
      e.kind = Expr::Kind::Flip;
      if (at_punct("(")) {
        lex_.take();
        e.param = number();
        expect_punct(")");
      } else {
        e.param = number();
      }
      if (!is_probability(e.param))
        throw SyntaxError("flip parameter outside [0,1]", t.line, t.col);
      return make_expr(stamp(std::move(e), t));
    }
    if (lex_.peek().tag == Token::Tag::Ident) {
      std::string name = lex_.take().text;
      if (at_punct("(")) {
        lex_.take();
        Expr e;
        e.kind = Expr::Kind::Call;
        e.name = name;
        e.e0 = expr();
        expect_punct(")");
        return make_expr(stamp(std::move(e), t));
      }
      Expr e;
      e.kind = Expr::Kind::Var;
      e.name = name;
      return make_expr(stamp(std::move(e), t));
    }
    if (at_punct("(")) {
      lex_.take();
      ExprPtr e = expr();
      if (at_punct(",")) {
        lex_.take();
        Expr pair;
        pair.kind = Expr::Kind::Pair;
        pair.e0 = e;
        pair.e1 = expr();
        expect_punct(")");
        return make_expr(stamp(std::move(pair), t));
      }
      expect_punct(")");
      return e;
    }
    fail("expected an expression");
  }
};

// ---------------------------------------------------------- typechecker --

using Env = std::vector<std::pair<std::string, SurfaceType>>;

struct Checker {
  const Program& prog;
  std::map<std::string, std::pair<std::size_t, SurfaceType>> fun_ret;

  const SurfaceType* lookup(const Env& env, const std::string& name) const {
    for (auto it = env.rbegin(); it != env.rend(); ++it)
      if (it->first == name) return &it->second;
    return nullptr;
  }

  SurfaceType check(Env& env, const ExprPtr& ep) {
    const Expr& e = *ep;
    switch (e.kind) {
      case Expr::Kind::Var: {
        const SurfaceType* t = lookup(env, e.name);
        if (!t)
          throw UnboundVariable("unbound variable '" + e.name + "'" + at(e));
        return *t;
      }
      case Expr::Kind::Flip:
      case Expr::Kind::Lit:
        return bool_type();
      case Expr::Kind::Let: {
        SurfaceType t0 = check(env, e.e0);
        env.emplace_back(e.name, t0);
        SurfaceType t1 = check(env, e.e1);
        env.pop_back();
        return t1;
      }
      case Expr::Kind::If: {
        SurfaceType tg = check(env, e.e0);
        if (!tg.is_bool())
          throw TypeMismatch("guard of if must be Boolean" + at(e));
        SurfaceType tt = check(env, e.e1);
        SurfaceType te = check(env, e.e2);
        if (!(tt == te))
          throw TypeMismatch("branches of if have types " + type_str(tt) +
                             " and " + type_str(te) + at(e));
        return tt;
      }
      case Expr::Kind::Pair:
        return product_type(check(env, e.e0), check(env, e.e1));
      case Expr::Kind::Fst: {
        SurfaceType t = check(env, e.e0);
        if (t.is_bool())
          throw TypeMismatch("fst applied to a non-pair" + at(e));
        return *t.left;
      }
      case Expr::Kind::Snd: {
        SurfaceType t = check(env, e.e0);
        if (t.is_bool())
          throw TypeMismatch("snd applied to a non-pair" + at(e));
        return *t.right;
      }
      case Expr::Kind::Observe: {
        SurfaceType t = check(env, e.e0);
        if (!t.is_bool())
          throw TypeMismatch("observation is restricted to width 1" + at(e));
        return t;
      }
      case Expr::Kind::Call: {
        auto it = fun_ret.find(e.name);
        if (it == fun_ret.end())
          throw UnboundVariable("call to undefined function '" + e.name +
                                "'" + at(e));
        SurfaceType ta = check(env, e.e0);
        const FunDef& f = prog.funs[it->second.first];
        if (!(ta == f.param_type))
          throw TypeMismatch("argument of '" + e.name + "' has type " +
                             type_str(ta) + ", expected " +
                             type_str(f.param_type) + at(e));
        return it->second.second;
      }
    }
    throw Error("unreachable expression kind");
  }
};

/// Free variables of main, in order of first occurrence.
void free_vars(const ExprPtr& ep, std::vector<std::string>& bound,
               std::vector<std::string>& out) {
  const Expr& e = *ep;
  switch (e.kind) {
    case Expr::Kind::Var: {
      for (const auto& b : bound)
        if (b == e.name) return;
      for (const auto& f : out)
        if (f == e.name) return;
      out.push_back(e.name);
      return;
    }
    case Expr::Kind::Flip:
    case Expr::Kind::Lit:
      return;
    case Expr::Kind::Let:
      free_vars(e.e0, bound, out);
      bound.push_back(e.name);
      free_vars(e.e1, bound, out);
      bound.pop_back();
      return;
    case Expr::Kind::If:
      free_vars(e.e0, bound, out);
      free_vars(e.e1, bound, out);
      free_vars(e.e2, bound, out);
      return;
    case Expr::Kind::Pair:
      free_vars(e.e0, bound, out);
      free_vars(e.e1, bound, out);
      return;
    case Expr::Kind::Fst:
    case Expr::Kind::Snd:
    case Expr::Kind::Observe:
    case Expr::Kind::Call:
      free_vars(e.e0, bound, out);
      return;
  }
}

Checker make_checker(const Program& p) {
  Checker ck{p, {}};
  for (std::size_t i = 0; i < p.funs.size(); ++i) {
    const FunDef& f = p.funs[i];
    if (ck.fun_ret.count(f.name))
      throw TypeMismatch("function '" + f.name + "' defined twice");
    Env env{{f.param, f.param_type}};
    SurfaceType ret = ck.check(env, f.body);
    if (f.declared_ret && !(*f.declared_ret == ret))
      throw TypeMismatch("function '" + f.name + "' returns " +
                         type_str(ret) + ", declared " +
                         type_str(*f.declared_ret));
    ck.fun_ret[f.name] = {i, ret};
  }
  return ck;
}

Env implicit_context(const Program& p) {
  std::vector<std::string> bound, frees;
  free_vars(p.main, bound, frees);
  Env ctx;
  for (const auto& name : frees) ctx.emplace_back(name, bool_type());
  return ctx;
}

}  // namespace

Program parse_program(const std::string& text) {
  return ProgParser(text).parse();
}

TypedProgram typecheck_program(const Program& p) {
  Checker ck = make_checker(p);
  Env env = implicit_context(p);
  TypedProgram tp;
  tp.context = env;
  tp.main_type = ck.check(env, p.main);
  return tp;
}

namespace {

ExprPtr inline_expr(const Program& p,
                    const std::map<std::string, std::size_t>& funs,
                    const ExprPtr& ep) {
  const Expr& e = *ep;
  Expr out = e;
  switch (e.kind) {
    case Expr::Kind::Var:
    case Expr::Kind::Flip:
    case Expr::Kind::Lit:
      return ep;
    case Expr::Kind::Call: {
      auto it = funs.find(e.name);
      if (it == funs.end())
        throw UnboundVariable("call to undefined function '" + e.name + "'" +
                              at(e));
      const FunDef& f = p.funs[it->second];
      Expr let;
      let.kind = Expr::Kind::Let;
      let.name = f.param;
      let.e0 = inline_expr(p, funs, e.e0);
      let.e1 = inline_expr(p, funs, f.body);
      let.line = e.line;
      let.col = e.col;
      return make_expr(std::move(let));
    }
    default:
      if (e.e0) out.e0 = inline_expr(p, funs, e.e0);
      if (e.e1) out.e1 = inline_expr(p, funs, e.e1);
      if (e.e2) out.e2 = inline_expr(p, funs, e.e2);
      return make_expr(std::move(out));
  }
}

}  // namespace

Program inline_calls(const Program& p) {
  std::map<std::string, std::size_t> funs;
  for (std::size_t i = 0; i < p.funs.size(); ++i) {
    // a definition may call only earlier ones; check before registering
    std::map<std::string, std::size_t> earlier = funs;
    inline_expr(p, earlier, p.funs[i].body);
    funs[p.funs[i].name] = i;
  }
  Program out;
  out.funs = p.funs;
  out.main = inline_expr(p, funs, p.main);
  return out;
}

namespace {

int env_width(const Env& env) {
  int w = 0;
  for (const auto& [_, t] : env) w += t.width();
  return w;
}

/// Keep one binding's wires, discard the rest of the context.
Circuit select_binding(const Env& env, std::size_t index) {
  int before = 0, after = 0;
  for (std::size_t i = 0; i < index; ++i) before += env[i].second.width();
  for (std::size_t i = index + 1; i < env.size(); ++i)
    after += env[i].second.width();
  int w = env[index].second.width();
  return Circuit::par(
      discard_bundle(before),
      Circuit::par(identity_bundle(w), discard_bundle(after)));
}

/// Width-w multiplexer: (g, t..., e...) -> output, copying the guard.
Circuit mux_bundle(int w) {
  if (w == 0) return discard_bundle(1);
  if (w == 1) return mux();
  std::vector<int> src(3 * w);
  for (int i = 0; i < w; ++i) {
    src[3 * i] = i;
    src[3 * i + 1] = w + i;
    src[3 * i + 2] = 2 * w + i;
  }
  std::vector<Circuit> muxes(w, mux());
  return seq_chain({
      Circuit::par(copy_1_to_n(w), identity_bundle(2 * w)),
      permutation(src),
      par_chain(muxes),
  });
}

struct Translator {
  std::size_t binding_index(const Env& env, const std::string& name,
                            const Expr& e) const {
    for (std::size_t i = env.size(); i-- > 0;)
      if (env[i].first == name) return i;
    throw UnboundVariable("unbound variable '" + e.name + "'" + at(e));
  }

  /// Compiles e in context env to a circuit (width env) -> (width of type).
  Circuit compile(Env& env, const ExprPtr& ep, SurfaceType* type_out = nullptr) {
    const Expr& e = *ep;
    int gw = env_width(env);
    switch (e.kind) {
      case Expr::Kind::Var: {
        std::size_t i = binding_index(env, e.name, e);
        if (type_out) *type_out = env[i].second;
        return select_binding(env, i);
      }
      case Expr::Kind::Flip: {
        if (type_out) *type_out = bool_type();
        return Circuit::seq(discard_bundle(gw), Circuit::flip(e.param));
      }
      case Expr::Kind::Lit: {
        if (type_out) *type_out = bool_type();
        return Circuit::seq(discard_bundle(gw),
                            Circuit::flip(Rat(e.lit ? 1 : 0)));
      }
      case Expr::Kind::Let: {
        SurfaceType t0;
        Circuit c0 = compile(env, e.e0, &t0);
        env.emplace_back(e.name, t0);
        Circuit c1 = compile(env, e.e1, type_out);
        env.pop_back();
        return seq_chain({
            block_copy(gw),
            Circuit::par(identity_bundle(gw), c0),
            c1,
        });
      }
      case Expr::Kind::If: {
        Circuit cg = compile(env, e.e0);
        SurfaceType t;
        Circuit ct = compile(env, e.e1, &t);
        Circuit ce = compile(env, e.e2);
        if (type_out) *type_out = t;
        int w = t.width();
        return seq_chain({
            block_copy(gw),
            Circuit::par(block_copy(gw), identity_bundle(gw)),
            Circuit::par(cg, Circuit::par(ct, ce)),
            mux_bundle(w),
        });
      }
      case Expr::Kind::Pair: {
        SurfaceType ta, tb;
        Circuit ca = compile(env, e.e0, &ta);
        Circuit cb = compile(env, e.e1, &tb);
        if (type_out) *type_out = product_type(ta, tb);
        return Circuit::seq(block_copy(gw), Circuit::par(ca, cb));
      }
      case Expr::Kind::Fst:
      case Expr::Kind::Snd: {
        SurfaceType t;
        Circuit ci = compile(env, e.e0, &t);
        if (t.is_bool())
          throw TypeMismatch("projection applied to a non-pair" + at(e));
        int wl = t.left->width(), wr = t.right->width();
        if (type_out) *type_out = e.kind == Expr::Kind::Fst ? *t.left : *t.right;
        Circuit keep =
            e.kind == Expr::Kind::Fst
                ? Circuit::par(identity_bundle(wl), discard_bundle(wr))
                : Circuit::par(discard_bundle(wl), identity_bundle(wr));
        return Circuit::seq(ci, keep);
      }
      case Expr::Kind::Observe: {
        const Expr& v = *e.e0;
        std::size_t i = binding_index(env, v.name, v);
        if (!env[i].second.is_bool())
          throw TypeMismatch("observation is restricted to width 1" + at(e));
        if (type_out) *type_out = bool_type();
        return seq_chain({
            select_binding(env, i),
            Circuit::par(Circuit::flip(Rat(1)), Circuit::id()),
            Circuit::cond(),
        });
      }
      case Expr::Kind::Call:
        throw Error("call survived inlining" + at(e));
    }
    throw Error("unreachable expression kind");
  }
};

}  // namespace

Circuit translate(const Program& p) {
  typecheck_program(p);  // surface errors before compilation
  Program q = inline_calls(p);
  Env env = implicit_context(q);
  Translator tr;
  return tr.compile(env, q.main);
}

ProjClass infer(const Program& p, const EvalOptions& opts) {
  return canonical_class(eval(translate(p), opts));
}

std::string infer_json(const Program& p, const EvalOptions& opts) {
  ProjClass pc = infer(p, opts);
  if (pc.bottom)
    return json{{"class", "bottom"}, {"in", pc.in}, {"out", pc.out}}.dump();
  if (pc.in == 0) {
    json dist = json::object();
    for (Eigen::Index y = 0; y < pc.canon.rows(); ++y) {
      std::string key;
      for (int b = pc.out - 1; b >= 0; --b)
        key.push_back((y >> b) & 1 ? '1' : '0');
      const Rat& r = pc.canon(y, 0);
      if (r.get_num().fits_slong_p() && r.get_den().fits_slong_p())
        dist[key] = json::array({r.get_num().get_si(), r.get_den().get_si()});
      else
        dist[key] = json::array({r.get_num().get_str(), r.get_den().get_str()});
    }
    return json{{"class", "canonical"}, {"dist", dist}}.dump();
  }
  return class_json(pc);
}

}  // namespace probcirc::surface
