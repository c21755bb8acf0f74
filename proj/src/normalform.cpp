#include "probcirc/normalform.hpp"

#include <json.hpp>

#include "probcirc/gates.hpp"

namespace probcirc {

using nlohmann::json;

std::vector<long long> truth_table(const Circuit& b, const EvalOptions& opts) {
  if (!is_boolean(b))
    throw NotBoolean("truth table requires a Boolean circuit");
  SubStochMatrix M = eval(b, opts);
  std::vector<long long> table(M.m.cols());
  for (Eigen::Index col = 0; col < M.m.cols(); ++col) {
    bool found = false;
    for (Eigen::Index row = 0; row < M.m.rows(); ++row) {
      if (M.m(row, col) == 1) {
        table[col] = row;
        found = true;
      }
    }
    if (!found) throw NotBoolean("circuit is not deterministic");
  }
  return table;
}

Circuit bool_circuit_from_table(int m, const std::vector<bool>& table) {
  if (m < 0 || static_cast<long long>(table.size()) != (1LL << m))
    throw Error("table size does not match input width");
  long long K = 1LL << m;
  // slot j (1-based) of the selector carries input word K - j
  std::vector<Rat> params(K);
  for (long long j = 1; j <= K; ++j) params[j - 1] = Rat(table[K - j] ? 1 : 0);
  return Circuit::seq(all_n(m), one_hot_cascade(params));
}

ShannonExpansion shannon_expand(const Circuit& b, int wire,
                                const EvalOptions& opts) {
  CircType t = b.type();
  if (t.out != 1)
    throw Error("cofactor expansion expects a single-output circuit");
  if (wire < 1 || wire > t.in) throw Error("wire index out of range");
  std::vector<long long> table = truth_table(b, opts);
  int m = t.in;
  int below = m - wire;  // wires below the split one
  std::vector<bool> t0(1LL << (m - 1)), t1(1LL << (m - 1));
  for (long long x = 0; x < (1LL << (m - 1)); ++x) {
    long long hi = x >> below, lo = x & ((1LL << below) - 1);
    long long with0 = (hi << (below + 1)) | lo;
    long long with1 = with0 | (1LL << below);
    t0[x] = table[with0] != 0;
    t1[x] = table[with1] != 0;
  }
  ShannonExpansion ex;
  ex.negative = bool_circuit_from_table(m - 1, t0);
  ex.positive = bool_circuit_from_table(m - 1, t1);
  // route the split wire to the front, duplicate the rest, multiplex
  std::vector<int> src(m);
  src[0] = wire - 1;
  for (int i = 0, at = 1; i < m; ++i)
    if (i != wire - 1) src[at++] = i;
  ex.recomposition = seq_chain({
      permutation(src),
      Circuit::par(Circuit::id(), block_copy(m - 1)),
      Circuit::par(Circuit::id(), Circuit::par(ex.positive, ex.negative)),
      mux(),
  });
  return ex;
}

Disintegration disintegrate(const SubStochMatrix& M) {
  if (M.in != 0) throw NotAJoint("disintegration expects a joint state");
  if (M.out < 1) throw NotAJoint("disintegration needs at least one wire");
  int k = M.out - 1;
  Disintegration d;
  d.marginal = marginalize(M, 1);
  d.conditional = SubStochMatrix{1, k, Mat::Zero(1LL << k, 2)};
  for (int b = 0; b < 2; ++b) {
    const Rat& mass = d.marginal.m(b, 0);
    if (mass == 0) {
      d.conditional.m(0, b) = 1;  // point mass on the all-zero word
    } else {
      for (long long y = 0; y < (1LL << k); ++y)
        d.conditional.m(y, b) =
            M.m((static_cast<long long>(b) << k) | y, 0) / mass;
    }
  }
  return d;
}

CptChain cpt_chain(const SubStochMatrix& M) {
  if (!is_stochastic(M))
    throw NotStochastic("conditional tables require a stochastic matrix");
  CptChain chain;
  chain.m = M.in;
  chain.n = M.out;
  int n = M.out;
  for (int k = 1; k <= n; ++k) {
    std::vector<Rat> table(1LL << (M.in + k - 1));
    for (long long x = 0; x < (1LL << M.in); ++x) {
      for (long long w = 0; w < (1LL << (k - 1)); ++w) {
        // prefix probabilities under column x
        Rat reach = 0, reach1 = 0;
        for (long long rest = 0; rest < (1LL << (n - k + 1)); ++rest)
          reach += M.m((w << (n - k + 1)) | rest, x);
        for (long long rest = 0; rest < (1LL << (n - k)); ++rest)
          reach1 += M.m((((w << 1) | 1) << (n - k)) | rest, x);
        Rat p = reach == 0 ? Rat(0) : Rat(reach1 / reach);
        table[(x << (k - 1)) | w] = p;
      }
    }
    chain.tables.push_back(std::move(table));
  }
  return chain;
}

SubStochMatrix cpt_matrix(const CptChain& chain) {
  int m = chain.m, n = chain.n;
  SubStochMatrix M{m, n, Mat::Zero(1LL << n, 1LL << m)};
  for (long long x = 0; x < (1LL << m); ++x) {
    for (long long y = 0; y < (1LL << n); ++y) {
      Rat prob = 1;
      for (int k = 1; k <= n; ++k) {
        long long prefix = y >> (n - k + 1);
        long long bit = (y >> (n - k)) & 1;
        const Rat& p = chain.tables[k - 1][(x << (k - 1)) | prefix];
        prob *= bit ? p : 1 - p;
        if (prob == 0) break;
      }
      M.m(y, x) = prob;
    }
  }
  return M;
}

namespace {

/// Stage k: context (m+k-1 wires) -> y_k, one-hot selector plus cascade.
Circuit cpt_stage(const CptChain& chain, int k) {
  int w = chain.m + k - 1;
  long long K = 1LL << w;
  std::vector<Rat> params(K);
  for (long long j = 1; j <= K; ++j)
    params[j - 1] = chain.tables[k - 1][K - j];
  return Circuit::seq(all_n(w), one_hot_cascade(params));
}

/// Stages k..n as a circuit (m+k-1) -> (n-k+1) reading the context bundle.
Circuit cpt_tail(const CptChain& chain, int k) {
  int w = chain.m + k - 1;
  if (k > chain.n) return discard_bundle(w);
  return seq_chain({
      block_copy(w),
      Circuit::par(cpt_stage(chain, k), identity_bundle(w)),
      Circuit::par(Circuit::copy_gate(), identity_bundle(w)),
      Circuit::par(Circuit::id(), rotate_front_to_back(w + 1)),
      Circuit::par(Circuit::id(), cpt_tail(chain, k + 1)),
  });
}

}  // namespace

Circuit circuit_from_cpt(const CptChain& chain) {
  if (chain.m < 0 || chain.n < 0 ||
      static_cast<int>(chain.tables.size()) != chain.n)
    throw Error("malformed conditional table chain");
  for (int k = 1; k <= chain.n; ++k) {
    if (static_cast<long long>(chain.tables[k - 1].size()) !=
        (1LL << (chain.m + k - 1)))
      throw Error("conditional table has wrong size");
    for (const Rat& p : chain.tables[k - 1])
      if (!is_probability(p)) throw Error("table entry outside [0,1]");
  }
  return cpt_tail(chain, 1);
}

std::string cpt_json(const CptChain& chain) {
  json tables = json::array();
  for (int k = 1; k <= chain.n; ++k) {
    int w = chain.m + k - 1;
    json table = json::object();
    for (long long ctx = 0; ctx < (1LL << w); ++ctx) {
      std::string key;
      for (int b = w - 1; b >= 0; --b)
        key.push_back((ctx >> b) & 1 ? '1' : '0');
      const Rat& p = chain.tables[k - 1][ctx];
      json pair = json::array();
      pair.push_back(p.get_num().fits_slong_p()
                         ? json(p.get_num().get_si())
                         : json(p.get_num().get_str()));
      pair.push_back(p.get_den().fits_slong_p()
                         ? json(p.get_den().get_si())
                         : json(p.get_den().get_str()));
      table[key] = pair;
    }
    tables.push_back(table);
  }
  return json{{"m", chain.m}, {"n", chain.n}, {"tables", tables}}.dump();
}

CptChain cpt_from_json(const std::string& text) {
  json j = json::parse(text);
  CptChain chain;
  chain.m = j.at("m").get<int>();
  chain.n = j.at("n").get<int>();
  const json& tables = j.at("tables");
  if (static_cast<int>(tables.size()) != chain.n)
    throw Error("wrong number of tables");
  for (int k = 1; k <= chain.n; ++k) {
    int w = chain.m + k - 1;
    std::vector<Rat> table(1LL << w);
    for (auto& [key, val] : tables[k - 1].items()) {
      if (static_cast<int>(key.size()) != w)
        throw Error("context key has wrong width");
      long long ctx = 0;
      for (char ch : key) {
        if (ch != '0' && ch != '1') throw Error("bad context key");
        ctx = (ctx << 1) | (ch == '1');
      }
      auto part = [](const json& v) -> mpz_class {
        if (v.is_number_integer())
          return mpz_class(static_cast<long>(v.get<long long>()));
        if (v.is_string()) return mpz_class(v.get<std::string>(), 10);
        throw Error("expected integer or string in rational pair");
      };
      Rat p(part(val.at(0)), part(val.at(1)));
      p.canonicalize();
      table[ctx] = p;
    }
    chain.tables.push_back(std::move(table));
  }
  return chain;
}

Circuit normal_form(const Circuit& c, const EvalOptions& opts) {
  if (!is_causal(c))
    throw HasConditioning("normal forms exist for cond-free circuits only");
  return circuit_from_cpt(cpt_chain(eval(c, opts)));
}

Circuit from_matrix(const SubStochMatrix& M) {
  return circuit_from_cpt(cpt_chain(M));
}

bool is_normal_form(const Circuit& c, const EvalOptions& opts) {
  if (!is_causal(c)) return false;
  SubStochMatrix M;
  try {
    M = eval(c, opts);
  } catch (const CapExceeded&) {
    return false;
  }
  if (!is_stochastic(M)) return false;
  return flatten(c) == flatten(circuit_from_cpt(cpt_chain(M)));
}

Circuit convex_sum(const Rat& p, const Circuit& b, const Circuit& d) {
  CircType tb = b.type(), td = d.type();
  if (tb != td || tb.out != 1)
    throw TypeMismatch("convex sum needs two single-output circuits of one type");
  int n = tb.in;
  return Circuit::seq(
      Circuit::par(Circuit::flip(p),
                   Circuit::seq(block_copy(n), Circuit::par(b, d))),
      mux());
}

namespace {

/// Width-directed split of a par chain: the prefix covering exactly
/// (in, out) wires, or nullptr-like failure.
bool split_par_prefix(const std::vector<Circuit>& factors, int in, int out,
                      std::vector<Circuit>& prefix,
                      std::vector<Circuit>& rest) {
  int ain = 0, aout = 0;
  std::size_t i = 0;
  while (i < factors.size() && (ain < in || aout < out)) {
    ain += factors[i].type().in;
    aout += factors[i].type().out;
    ++i;
  }
  if (ain != in || aout != out) return false;
  prefix.assign(factors.begin(), factors.begin() + i);
  rest.assign(factors.begin() + i, factors.end());
  return true;
}

}  // namespace

bool is_pre_normal_form(const Circuit& c) {
  if (c.type().out != 1) return false;
  if (is_boolean(c)) return true;
  Circuit f = flatten(c);
  // expect: seq(par(flip p, seq(block_copy n, par(b, d))), mux)
  std::vector<Circuit> sf = seq_factors(f);
  Circuit head = sf.front();
  if (head.kind() != NodeKind::Par) return false;
  std::vector<Circuit> tail_mux = seq_factors(flatten(mux()));
  if (sf.size() != tail_mux.size() + 1) return false;
  for (std::size_t i = 0; i < tail_mux.size(); ++i)
    if (sf[i + 1] != tail_mux[i]) return false;
  std::vector<Circuit> pf = par_factors(head);
  if (pf.front().kind() != NodeKind::Gen ||
      pf.front().gate() != GateTag::Flip)
    return false;
  std::vector<Circuit> inner(pf.begin() + 1, pf.end());
  int n = c.type().in;
  Circuit b, d;
  if (n == 0) {
    // block_copy(0) flattens away; the branches are bare par factors
    std::vector<Circuit> bpre, rest;
    if (!split_par_prefix(inner, 0, 1, bpre, rest)) return false;
    if (bpre.empty() || rest.empty()) return false;
    b = par_chain(bpre);
    d = par_chain(rest);
    if (d.type() != CircType{0, 1}) return false;
  } else {
    if (inner.size() != 1) return false;
    std::vector<Circuit> body = seq_factors(inner.front());
    Circuit bc = flatten(block_copy(n));
    std::vector<Circuit> bcf = seq_factors(bc);
    if (body.size() != bcf.size() + 1) return false;
    for (std::size_t i = 0; i < bcf.size(); ++i)
      if (body[i] != bcf[i]) return false;
    Circuit branches = body.back();
    if (branches.kind() != NodeKind::Par) return false;
    std::vector<Circuit> brf = par_factors(branches);
    std::vector<Circuit> bpre, rest;
    if (!split_par_prefix(brf, n, 1, bpre, rest)) return false;
    if (bpre.empty() || rest.empty()) return false;
    b = par_chain(bpre);
    d = par_chain(rest);
    if (d.type() != CircType{n, 1}) return false;
  }
  return is_boolean(b) && is_pre_normal_form(d);
}

Circuit bend(const Circuit& c) {
  int m = c.type().in;
  if (m == 0) return c;
  Circuit cup = Circuit::seq(Circuit::flip(Rat(1, 2)), Circuit::copy_gate());
  std::vector<Circuit> cups(m, cup);
  // (x_0,x_0',...,x_{m-1},x_{m-1}') -> (x, x')
  std::vector<int> src(2 * m);
  for (int i = 0; i < m; ++i) {
    src[i] = 2 * i;
    src[m + i] = 2 * i + 1;
  }
  return seq_chain({
      par_chain(cups),
      permutation(src),
      Circuit::par(identity_bundle(m), c),
  });
}

Circuit unbend(const Circuit& d, int m) {
  CircType t = d.type();
  if (t.in != 0) throw NotAJoint("unbend expects a state with no inputs");
  if (m < 0 || m > t.out) throw Error("unbend: wire count out of range");
  if (m == 0) return d;
  int n = t.out - m;
  Circuit cap = Circuit::seq(Circuit::cond(), Circuit::discard());
  std::vector<Circuit> caps(m, cap);
  // (x, a, y) -> (x_0,a_0,...,x_{m-1},a_{m-1}, y)
  std::vector<int> src(2 * m + n);
  for (int i = 0; i < m; ++i) {
    src[2 * i] = i;
    src[2 * i + 1] = m + i;
  }
  for (int j = 0; j < n; ++j) src[2 * m + j] = 2 * m + j;
  return seq_chain({
      Circuit::par(identity_bundle(m), d),
      permutation(src),
      Circuit::par(par_chain(caps), identity_bundle(n)),
  });
}

Circuit eliminate_conditioning(const Circuit& c, const EvalOptions& opts) {
  CircType t = c.type();
  SubStochMatrix M = eval(c, opts);
  ProjClass P = canonical_class(M);
  if (P.bottom) return flatten(failure_circuit(t.in, t.out));
  if (t.in == 0) {
    Circuit nf = from_matrix(SubStochMatrix{0, t.out, P.canon});
    return flatten(nf);
  }
  SubStochMatrix joint = eval(bend(c), opts);
  ProjClass jp = canonical_class(joint);
  Circuit nf = from_matrix(SubStochMatrix{0, t.in + t.out, jp.canon});
  return flatten(unbend(nf, t.in));
}

bool equiv(const Circuit& c, const Circuit& d, const EvalOptions& opts) {
  if (c.type() != d.type())
    throw TypeMismatch("equivalence compares circuits of one wire type");
  return prop_equal(eval(c, opts), eval(d, opts));
}

SubStochMatrix bayes_inverse(const Circuit& f, const Circuit& prior,
                             const EvalOptions& opts) {
  if (!is_causal(f) || !is_causal(prior))
    throw NotCausal("inversion is defined for cond-free circuits");
  CircType tf = f.type(), tp = prior.type();
  if (tp.in != 0 || tp.out != tf.in)
    throw TypeMismatch("prior must be a state on the channel's inputs");
  int m = tf.in, n = tf.out;
  Circuit joint_circ = Circuit::seq(
      prior,
      Circuit::seq(block_copy(m), Circuit::par(identity_bundle(m), f)));
  SubStochMatrix J = eval(joint_circ, opts);
  SubStochMatrix inv{n, m, Mat::Zero(1LL << m, 1LL << n)};
  for (long long y = 0; y < (1LL << n); ++y) {
    Rat q = 0;
    for (long long x = 0; x < (1LL << m); ++x)
      q += J.m((x << n) | y, 0);
    if (q == 0) {
      inv.m(0, y) = 1;  // point mass on the all-zero word
    } else {
      for (long long x = 0; x < (1LL << m); ++x)
        inv.m(x, y) = J.m((x << n) | y, 0) / q;
    }
  }
  return inv;
}

}  // namespace probcirc
