#include "world_interp.hpp"

#include <vector>

namespace probcirc::testsupport {

namespace {

namespace sf = probcirc::surface;

struct Value {
  long long word = 0;
};

struct WeightedValues {
  std::map<long long, Rat> dist;
  sf::SurfaceType type;
};

struct Binding {
  std::string name;
  long long value;
  sf::SurfaceType type;
};

struct Interp {
  const sf::Program& prog;

  const Binding& lookup(const std::vector<Binding>& env,
                        const std::string& name) {
    for (auto it = env.rbegin(); it != env.rend(); ++it)
      if (it->name == name) return *it;
    throw sf::UnboundVariable("unbound variable '" + name + "'");
  }

  const sf::FunDef& fun(const std::string& name) {
    for (const sf::FunDef& f : prog.funs)
      if (f.name == name) return f;
    throw sf::UnboundVariable("call to undefined function '" + name + "'");
  }

  WeightedValues run(const sf::ExprPtr& ep, std::vector<Binding>& env) {
    const sf::Expr& e = *ep;
    switch (e.kind) {
      case sf::Expr::Kind::Var: {
        const Binding& b = lookup(env, e.name);
        return {{{b.value, Rat(1)}}, b.type};
      }
      case sf::Expr::Kind::Flip: {
        WeightedValues out{{}, sf::bool_type()};
        if (e.param != 0) out.dist[1] = e.param;
        if (e.param != 1) out.dist[0] = 1 - e.param;
        return out;
      }
      case sf::Expr::Kind::Lit:
        return {{{e.lit ? 1LL : 0LL, Rat(1)}}, sf::bool_type()};
      case sf::Expr::Kind::Let: {
        WeightedValues bound = run(e.e0, env);
        WeightedValues out;
        bool typed = false;
        for (const auto& [v0, w0] : bound.dist) {
          env.push_back({e.name, v0, bound.type});
          WeightedValues body = run(e.e1, env);
          env.pop_back();
          out.type = body.type;
          typed = true;
          for (const auto& [v1, w1] : body.dist) out.dist[v1] += w0 * w1;
        }
        if (!typed) {
          // the bound expression is impossible; the body never runs, but we
          // still need the result type, which an empty environment pass
          // cannot easily supply — run the body on an arbitrary value.
          env.push_back({e.name, 0, bound.type});
          WeightedValues body = run(e.e1, env);
          env.pop_back();
          out.type = body.type;
        }
        return out;
      }
      case sf::Expr::Kind::If: {
        WeightedValues g = run(e.e0, env);
        WeightedValues t = run(e.e1, env);
        WeightedValues l = run(e.e2, env);
        WeightedValues out{{}, t.type};
        for (const auto& [gv, gw] : g.dist)
          for (const auto& [tv, tw] : t.dist)
            for (const auto& [lv, lw] : l.dist)
              out.dist[gv ? tv : lv] += gw * tw * lw;
        return out;
      }
      case sf::Expr::Kind::Pair: {
        WeightedValues a = run(e.e0, env);
        WeightedValues b = run(e.e1, env);
        WeightedValues out{{}, sf::product_type(a.type, b.type)};
        int wb = b.type.width();
        for (const auto& [va, wa] : a.dist)
          for (const auto& [vb, wwb] : b.dist)
            out.dist[(va << wb) | vb] += wa * wwb;
        return out;
      }
      case sf::Expr::Kind::Fst:
      case sf::Expr::Kind::Snd: {
        WeightedValues p = run(e.e0, env);
        if (p.type.is_bool())
          throw TypeMismatch("projection applied to a non-pair");
        int wr = p.type.right->width();
        WeightedValues out{{}, e.kind == sf::Expr::Kind::Fst
                                   ? *p.type.left
                                   : *p.type.right};
        for (const auto& [v, w] : p.dist) {
          long long key = e.kind == sf::Expr::Kind::Fst
                              ? (v >> wr)
                              : (v & ((1LL << wr) - 1));
          out.dist[key] += w;
        }
        return out;
      }
      case sf::Expr::Kind::Observe: {
        WeightedValues v = run(e.e0, env);
        WeightedValues out{{}, sf::bool_type()};
        auto it = v.dist.find(1);
        if (it != v.dist.end()) out.dist[1] = it->second;
        return out;
      }
      case sf::Expr::Kind::Call: {
        const sf::FunDef& f = fun(e.name);
        WeightedValues arg = run(e.e0, env);
        WeightedValues out;
        bool typed = false;
        for (const auto& [v, w] : arg.dist) {
          std::vector<Binding> callee{{f.param, v, f.param_type}};
          WeightedValues body = run(f.body, callee);
          out.type = body.type;
          typed = true;
          for (const auto& [bv, bw] : body.dist) out.dist[bv] += w * bw;
        }
        if (!typed) {
          std::vector<Binding> callee{{f.param, 0, f.param_type}};
          out.type = run(f.body, callee).type;
        }
        return out;
      }
    }
    throw Error("unreachable expression kind");
  }
};

}  // namespace

SubStochMatrix interp_matrix(const sf::Program& p) {
  sf::TypedProgram tp = sf::typecheck_program(p);
  int m = 0;
  for (const auto& [_, t] : tp.context) m += t.width();
  int n = tp.main_type.width();
  SubStochMatrix M;
  M.in = m;
  M.out = n;
  M.m = Mat::Zero(1LL << n, 1LL << m);
  Interp interp{p};
  for (long long x = 0; x < (1LL << m); ++x) {
    std::vector<Binding> env;
    int shift = m;
    for (const auto& [name, t] : tp.context) {
      shift -= t.width();
      long long v = (x >> shift) & ((1LL << t.width()) - 1);
      env.push_back({name, v, t});
    }
    WeightedValues col = interp.run(p.main, env);
    for (const auto& [y, w] : col.dist) M.m(y, x) = w;
  }
  return M;
}

}  // namespace probcirc::testsupport
