#include "probcirc/matrix.hpp"

#include <json.hpp>

#include <algorithm>
#include <map>
#include <set>
#include <unordered_map>
#include <utility>
#include <vector>

namespace probcirc {

using nlohmann::json;

Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index ra = 0; ra < a.rows(); ++ra)
    for (Eigen::Index ca = 0; ca < a.cols(); ++ca)
      for (Eigen::Index rb = 0; rb < b.rows(); ++rb)
        for (Eigen::Index cb = 0; cb < b.cols(); ++cb)
          out(ra * b.rows() + rb, ca * b.cols() + cb) = a(ra, ca) * b(rb, cb);
  return out;
}

/// b * a, skipping zero entries. Layer matrices of wide circuits (wire
/// permutations, single gates beside identities) are extremely sparse, and
/// exact rational multiplication is costly enough that Eigen's dense
/// product is a bottleneck there.
static Mat sparse_product(const Mat& b, const Mat& a) {
  Mat out = Mat::Zero(b.rows(), a.cols());
  for (Eigen::Index k = 0; k < a.rows(); ++k)
    for (Eigen::Index x = 0; x < a.cols(); ++x) {
      if (a(k, x) == 0) continue;
      for (Eigen::Index y = 0; y < b.rows(); ++y) {
        if (b(y, k) == 0) continue;
        out(y, x) += b(y, k) * a(k, x);
      }
    }
  return out;
}

namespace {

Mat gate_matrix(const Circuit& c) {
  switch (c.gate()) {
    case GateTag::Copy: {
      Mat m = Mat::Zero(4, 2);
      m(0, 0) = 1;  // 0 -> 00
      m(3, 1) = 1;  // 1 -> 11
      return m;
    }
    case GateTag::Discard: {
      Mat m(1, 2);
      m(0, 0) = 1;
      m(0, 1) = 1;
      return m;
    }
    case GateTag::And: {
      Mat m = Mat::Zero(2, 4);
      m(0, 0) = 1;
      m(0, 1) = 1;
      m(0, 2) = 1;
      m(1, 3) = 1;
      return m;
    }
    case GateTag::Not: {
      Mat m = Mat::Zero(2, 2);
      m(1, 0) = 1;
      m(0, 1) = 1;
      return m;
    }
    case GateTag::Flip: {
      Mat m(2, 1);
      m(0, 0) = 1 - c.flip_param();
      m(1, 0) = c.flip_param();
      return m;
    }
    case GateTag::Cond: {
      // only equal input pairs survive, and emit their common value
      Mat m = Mat::Zero(2, 4);
      m(0, 0) = 1;  // (0,0) -> 0
      m(1, 3) = 1;  // (1,1) -> 1
      return m;
    }
  }
  throw Error("unreachable gate tag");
}

struct Evaluator {
  const EvalOptions& opts;
  std::unordered_map<const void*, Mat> memo;

  void check_cap(CircType t) {
    if (t.in + t.out > 62 ||
        (1LL << (t.in + t.out)) > opts.max_cells)
      throw CapExceeded("matrix for a " + std::to_string(t.in) + "->" +
                        std::to_string(t.out) +
                        " subterm exceeds the cell bound " +
                        std::to_string(opts.max_cells));
  }

  Mat run(const Circuit& c) {
    auto it = memo.find(c.node_key());
    if (it != memo.end()) return it->second;
    check_cap(c.type());
    Mat m;
    switch (c.kind()) {
      case NodeKind::Gen:
        m = gate_matrix(c);
        break;
      case NodeKind::Id:
        m = Mat::Identity(2, 2);
        break;
      case NodeKind::Id0:
        m = Mat::Identity(1, 1);
        break;
      case NodeKind::Swap: {
        m = Mat::Zero(4, 4);
        m(0, 0) = 1;
        m(2, 1) = 1;  // 01 -> 10
        m(1, 2) = 1;  // 10 -> 01
        m(3, 3) = 1;
        break;
      }
      case NodeKind::Seq:
        m = sparse_product(run(c.second()), run(c.first()));
        break;
      case NodeKind::Par:
        m = kron(run(c.first()), run(c.second()));
        break;
    }
    memo.emplace(c.node_key(), m);
    return m;
  }
};

/// True when every subterm's full matrix stays within `limit` cells, so the
/// dense evaluator can materialise them all. Canonical-form circuits contain
/// one-hot buses far wider than their boundary type and fail this test; they
/// take the sparse path below instead.
bool dense_feasible(const Circuit& c, long long limit,
                    std::set<const void*>& seen) {
  if (!seen.insert(c.node_key()).second) return true;
  CircType t = c.type();
  if (t.in + t.out > 62 || (1LL << (t.in + t.out)) > limit) return false;
  if (c.kind() == NodeKind::Seq || c.kind() == NodeKind::Par)
    return dense_feasible(c.first(), limit, seen) &&
           dense_feasible(c.second(), limit, seen);
  return true;
}

/// Sparse evaluation, one input word at a time. Output words are arbitrary-
/// precision integers because interior layers may be hundreds of wires wide;
/// only the nonzero outcomes of each subterm on each reached word are ever
/// stored, and those supports are what the cell cap bounds.
struct ColumnEvaluator {
  using Key = mpz_class;                 // output word of a subterm
  using Dist = std::map<Key, Rat>;       // sparse column: word -> probability
  using MemoKey = std::pair<const void*, Key>;

  struct MemoHash {
    std::size_t operator()(const MemoKey& k) const {
      std::size_t h = std::hash<const void*>{}(k.first);
      const auto* z = k.second.get_mpz_t();
      std::size_t limbs = mpz_size(z);
      auto mix = [&h](std::size_t v) {
        h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
      };
      mix(limbs);
      for (std::size_t i = 0; i < limbs && i < 4; ++i)
        mix(static_cast<std::size_t>(mpz_getlimbn(z, i)));
      return h;
    }
  };
  struct MemoEq {
    bool operator()(const MemoKey& a, const MemoKey& b) const {
      return a.first == b.first && mpz_cmp(a.second.get_mpz_t(),
                                           b.second.get_mpz_t()) == 0;
    }
  };

  /// A parallel layer as an application recipe: identity stretches collapse
  /// into "pass this many bits through", so a wide bus around a small gate
  /// costs a handful of word operations instead of one step per wire.
  struct PlanItem {
    int bits = 0;        // input width of this segment
    Circuit factor;      // invalid handle for a pass-through segment
  };

  /// One step of a compiled chain. Runs of layers that only move wires
  /// (identities and adjacent swaps, the bulk of a flattened permutation)
  /// collapse into a single bit-source map; other layers apply one by one.
  struct Step {
    Circuit layer;             // valid handle: a general layer
    std::vector<int> bit_src;  // rewiring: output bit p reads input bit_src[p]
  };

  const EvalOptions& opts;
  std::unordered_map<MemoKey, Dist, MemoHash, MemoEq> memo;
  std::unordered_map<const void*, std::vector<PlanItem>> plan_cache;
  std::unordered_map<const void*, std::vector<Step>> step_cache;

  void guard(std::size_t nnz) {
    if (static_cast<long long>(nnz) > opts.max_cells)
      throw CapExceeded("intermediate support exceeds the cell bound " +
                        std::to_string(opts.max_cells));
  }

  static void gen_column(const Circuit& c, long x, Dist& out) {
    switch (c.gate()) {
      case GateTag::Copy:
        out.emplace(Key(x ? 3 : 0), 1);
        return;
      case GateTag::Discard:
        out.emplace(Key(0), 1);
        return;
      case GateTag::And:
        out.emplace(Key(x == 3 ? 1 : 0), 1);
        return;
      case GateTag::Not:
        out.emplace(Key(1 - x), 1);
        return;
      case GateTag::Flip: {
        const Rat& p = c.flip_param();
        if (p != 1) out.emplace(Key(0), 1 - p);
        if (p != 0) out.emplace(Key(1), p);
        return;
      }
      case GateTag::Cond:
        // only equal input pairs survive, and emit their common value
        if (x == 0) out.emplace(Key(0), 1);
        if (x == 3) out.emplace(Key(1), 1);
        return;
    }
  }

  /// Leaf factors are computed in place, with no memo traffic.
  static bool tiny_column(const Circuit& f, const Key& block, Dist& out) {
    switch (f.kind()) {
      case NodeKind::Id:
      case NodeKind::Id0:
        out.emplace(block, 1);
        return true;
      case NodeKind::Swap: {
        long v = block.get_si();
        out.emplace(Key(((v & 1) << 1) | (v >> 1)), 1);
        return true;
      }
      case NodeKind::Gen:
        gen_column(f, block.get_si(), out);
        return true;
      default:
        return false;
    }
  }

  const std::vector<PlanItem>& plan_of(const Circuit& c) {
    auto it = plan_cache.find(c.node_key());
    if (it != plan_cache.end()) return it->second;
    std::vector<PlanItem> plan;
    int pass = 0;
    for (const Circuit& f : par_factors(c)) {
      if (is_identity_bundle(f)) {
        pass += f.type().in;
        continue;
      }
      if (pass > 0) {
        plan.push_back(PlanItem{pass, Circuit()});
        pass = 0;
      }
      plan.push_back(PlanItem{f.type().in, f});
    }
    if (pass > 0) plan.push_back(PlanItem{pass, Circuit()});
    return plan_cache.emplace(c.node_key(), std::move(plan)).first->second;
  }

  /// Source wire of each output wire when `f` only moves wires around;
  /// false as soon as a computational gate appears.
  bool wire_map(const Circuit& f, std::vector<int>& src) {
    src.clear();
    switch (f.kind()) {
      case NodeKind::Id:
        src = {0};
        return true;
      case NodeKind::Id0:
        return true;
      case NodeKind::Swap:
        src = {1, 0};
        return true;
      case NodeKind::Par:
        break;
      default:
        return false;
    }
    int wire = 0;
    for (const PlanItem& item : plan_of(f)) {
      if (!item.factor.valid()) {
        for (int i = 0; i < item.bits; ++i) src.push_back(wire + i);
      } else if (item.factor.kind() == NodeKind::Swap) {
        src.push_back(wire + 1);
        src.push_back(wire);
      } else {
        return false;
      }
      wire += item.bits;
    }
    return true;
  }

  /// Compiled step list of a subterm, cached per node: its layer list with
  /// every maximal run of wire-moving layers fused into one map. The seq
  /// spine is walked in place; rebuilding the tree first would cost more
  /// than the evaluation it feeds.
  const std::vector<Step>& steps_of(const Circuit& c) {
    auto it = step_cache.find(c.node_key());
    if (it != step_cache.end()) return it->second;
    std::vector<Step> steps;
    std::vector<int> run, src, composed;
    bool in_run = false;
    auto flush_run = [&steps, &run, &in_run]() {
      if (!in_run) return;
      in_run = false;
      int n = static_cast<int>(run.size());
      bool moved = false;
      for (int w = 0; w < n; ++w) moved = moved || run[w] != w;
      if (!moved) return;  // the run cancelled out to the identity
      Step s;
      s.bit_src.resize(n);
      // wire w counts from the top; its value sits at bit n-1-w (MSB first)
      for (int w = 0; w < n; ++w) s.bit_src[n - 1 - w] = n - 1 - run[w];
      steps.push_back(std::move(s));
    };
    for (const Circuit& layer : seq_factors(c)) {
      if (wire_map(layer, src)) {
        if (!in_run) {
          in_run = true;
          run = src;
        } else {  // this map reads from the run's output: compose them
          composed.resize(src.size());
          for (std::size_t w = 0; w < src.size(); ++w)
            composed[w] = run[src[w]];
          run.swap(composed);
        }
      } else {
        flush_run();
        steps.push_back(Step{layer, {}});
      }
    }
    flush_run();
    return step_cache.emplace(c.node_key(), std::move(steps)).first->second;
  }

  static Key rewire(const std::vector<int>& bit_src, const Key& x) {
    Key r = 0;
    for (std::size_t p = 0; p < bit_src.size(); ++p)
      if (mpz_tstbit(x.get_mpz_t(), static_cast<unsigned long>(bit_src[p])))
        mpz_setbit(r.get_mpz_t(), static_cast<unsigned long>(p));
    return r;
  }

  /// Outcomes of a single non-Seq layer on a single word.
  void layer_word(const Circuit& layer, const Key& x, Dist& out) {
    if (tiny_column(layer, x, out)) return;
    if (layer.kind() != NodeKind::Par) {
      out = column(layer, x);  // defensive: unexpected nested chain
      return;
    }
    const std::vector<PlanItem>& plan = plan_of(layer);
    // peel the input word into per-segment blocks, last segment lowest
    std::vector<Key> block(plan.size());
    Key rest = x;
    for (std::size_t i = plan.size(); i-- > 0;) {
      unsigned long bits = static_cast<unsigned long>(plan[i].bits);
      mpz_fdiv_r_2exp(block[i].get_mpz_t(), rest.get_mpz_t(), bits);
      mpz_fdiv_q_2exp(rest.get_mpz_t(), rest.get_mpz_t(), bits);
    }
    Dist acc;
    acc.emplace(Key(0), Rat(1));
    Dist next, local;
    for (std::size_t i = 0; i < plan.size(); ++i) {
      unsigned long width;  // output bits appended by this segment
      const Dist* d;
      if (!plan[i].factor.valid()) {  // identity stretch: pass bits
        width = static_cast<unsigned long>(plan[i].bits);
        local.clear();
        local.emplace(block[i], 1);
        d = &local;
      } else if (tiny_column(plan[i].factor, block[i],
                             (local.clear(), local))) {
        width = static_cast<unsigned long>(plan[i].factor.type().out);
        d = &local;
      } else {
        width = static_cast<unsigned long>(plan[i].factor.type().out);
        d = &column(plan[i].factor, block[i]);
      }
      next.clear();
      for (const auto& [w, p] : acc)
        for (const auto& [y, q] : *d) {
          Key nk;
          mpz_mul_2exp(nk.get_mpz_t(), w.get_mpz_t(), width);
          nk += y;
          next.emplace(std::move(nk), p * q);
        }
      guard(next.size());
      acc.swap(next);
    }
    out = std::move(acc);
  }

  /// Memoised outcomes of an arbitrary subterm on one input word, computed
  /// by walking its compiled step list iteratively. Only these boundary
  /// results hit the memo table; the interior glue of a chain does not.
  const Dist& column(const Circuit& c, const Key& x) {
    MemoKey mk{c.node_key(), x};
    auto it = memo.find(mk);
    if (it != memo.end()) return it->second;
    Dist state;
    state.emplace(x, 1);
    for (const Step& step : steps_of(c)) {
      Dist next;
      if (!step.layer.valid()) {  // bijective rewiring: keys stay distinct
        for (const auto& [w, p] : state)
          next.emplace(rewire(step.bit_src, w), p);
      } else {
        Dist outcomes;
        for (const auto& [w, p] : state) {
          outcomes.clear();
          layer_word(step.layer, w, outcomes);
          for (const auto& [y, q] : outcomes) next[y] += p * q;
        }
      }
      guard(next.size());
      state.swap(next);
      if (state.empty()) break;  // dead branch: nothing can revive it
    }
    return memo.emplace(std::move(mk), std::move(state)).first->second;
  }
};

}  // namespace

SubStochMatrix eval(const Circuit& c, const EvalOptions& opts) {
  CircType t = c.type();
  if (t.in + t.out > 62 || (1LL << (t.in + t.out)) > opts.max_cells)
    throw CapExceeded("matrix for a " + std::to_string(t.in) + "->" +
                      std::to_string(t.out) +
                      " subterm exceeds the cell bound " +
                      std::to_string(opts.max_cells));
  long long limit = std::min(opts.max_cells, 1LL << 16);
  std::set<const void*> seen;
  if (dense_feasible(c, limit, seen)) {
    Evaluator ev{opts, {}};
    return SubStochMatrix{t.in, t.out, ev.run(c)};
  }
  ColumnEvaluator ev{opts};
  Mat m = Mat::Zero(1LL << t.out, 1LL << t.in);
  for (long long x = 0; x < (1LL << t.in); ++x) {
    ColumnEvaluator::Dist col =
        ev.column(c, ColumnEvaluator::Key(static_cast<long>(x)));
    for (const auto& [y, v] : col) m(y.get_si(), x) = v;
  }
  return SubStochMatrix{t.in, t.out, m};
}

bool is_substochastic(const SubStochMatrix& M) {
  for (Eigen::Index col = 0; col < M.m.cols(); ++col) {
    Rat sum = 0;
    for (Eigen::Index row = 0; row < M.m.rows(); ++row) {
      if (M.m(row, col) < 0 || M.m(row, col) > 1) return false;
      sum += M.m(row, col);
    }
    if (sum > 1) return false;
  }
  return true;
}

bool is_stochastic(const SubStochMatrix& M) {
  for (Eigen::Index col = 0; col < M.m.cols(); ++col) {
    Rat sum = 0;
    for (Eigen::Index row = 0; row < M.m.rows(); ++row) {
      if (M.m(row, col) < 0) return false;
      sum += M.m(row, col);
    }
    if (sum != 1) return false;
  }
  return true;
}

bool is_deterministic(const SubStochMatrix& M) {
  if (!is_stochastic(M)) return false;
  for (Eigen::Index col = 0; col < M.m.cols(); ++col)
    for (Eigen::Index row = 0; row < M.m.rows(); ++row)
      if (M.m(row, col) != 0 && M.m(row, col) != 1) return false;
  return true;
}

ProjClass canonical_class(const SubStochMatrix& M) {
  Rat total = 0;
  for (Eigen::Index col = 0; col < M.m.cols(); ++col)
    for (Eigen::Index row = 0; row < M.m.rows(); ++row)
      total += M.m(row, col);
  ProjClass out;
  out.in = M.in;
  out.out = M.out;
  if (total == 0) {
    out.bottom = true;
    return out;
  }
  out.canon = M.m / total;
  return out;
}

bool prop_equal(const SubStochMatrix& A, const SubStochMatrix& B) {
  return canonical_class(A) == canonical_class(B);
}

SubStochMatrix marginalize(const SubStochMatrix& M, int keep) {
  if (M.in != 0)
    throw NotAJoint("marginalize expects a state with no inputs");
  if (keep < 0 || keep > M.out)
    throw Error("marginalize: keep count out of range");
  int drop = M.out - keep;
  SubStochMatrix out{0, keep, Mat::Zero(1LL << keep, 1)};
  for (long long x = 0; x < (1LL << keep); ++x)
    for (long long low = 0; low < (1LL << drop); ++low)
      out.m(x, 0) += M.m((x << drop) | low, 0);
  return out;
}

namespace {

json rat_pair(const Rat& r) {
  const mpz_class &num = r.get_num(), &den = r.get_den();
  json pair = json::array();
  if (num.fits_slong_p())
    pair.push_back(num.get_si());
  else
    pair.push_back(num.get_str());
  if (den.fits_slong_p())
    pair.push_back(den.get_si());
  else
    pair.push_back(den.get_str());
  return pair;
}

Rat rat_from_pair(const json& j) {
  if (!j.is_array() || j.size() != 2)
    throw Error("expected [numerator, denominator]");
  auto part = [](const json& v) -> mpz_class {
    if (v.is_number_integer())
      return mpz_class(static_cast<long>(v.get<long long>()));
    if (v.is_string()) return mpz_class(v.get<std::string>(), 10);
    throw Error("expected integer or string in rational pair");
  };
  mpz_class den = part(j[1]);
  if (den == 0) throw Error("rational with zero denominator");
  Rat r(part(j[0]), den);
  r.canonicalize();
  return r;
}

json matrix_body(const SubStochMatrix& M) {
  json entries = json::array();
  for (Eigen::Index row = 0; row < M.m.rows(); ++row)
    for (Eigen::Index col = 0; col < M.m.cols(); ++col)
      entries.push_back(rat_pair(M.m(row, col)));
  return json{{"in", M.in}, {"out", M.out}, {"entries", entries}};
}

}  // namespace

std::string matrix_json(const SubStochMatrix& M) {
  return matrix_body(M).dump();
}

SubStochMatrix matrix_from_json(const std::string& text) {
  json j = json::parse(text);
  int in = j.at("in").get<int>(), out = j.at("out").get<int>();
  if (in < 0 || out < 0 || in + out > 62) throw Error("bad matrix shape");
  long long rows = 1LL << out, cols = 1LL << in;
  const json& entries = j.at("entries");
  if (static_cast<long long>(entries.size()) != rows * cols)
    throw Error("entry count does not match shape");
  SubStochMatrix M{in, out, Mat(rows, cols)};
  for (long long row = 0; row < rows; ++row)
    for (long long col = 0; col < cols; ++col)
      M.m(row, col) = rat_from_pair(entries[row * cols + col]);
  return M;
}

std::string class_json(const ProjClass& P) {
  if (P.bottom)
    return json{{"class", "bottom"}, {"in", P.in}, {"out", P.out}}.dump();
  json body = matrix_body(SubStochMatrix{P.in, P.out, P.canon});
  body["class"] = "canonical";
  return body.dump();
}

}  // namespace probcirc
