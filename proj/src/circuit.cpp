#include "probcirc/circuit.hpp"

#include <utility>

namespace probcirc {

struct Circuit::Node {
  NodeKind kind;
  GateTag gate = GateTag::Copy;
  Rat param;
  Circuit a, b;
  CircType type;
};

namespace {

CircType gate_type(GateTag g) {
  switch (g) {
    case GateTag::Copy:
      return {1, 2};
    case GateTag::Discard:
      return {1, 0};
    case GateTag::And:
      return {2, 1};
    case GateTag::Not:
      return {1, 1};
    case GateTag::Flip:
      return {0, 1};
    case GateTag::Cond:
      return {2, 1};
  }
  throw Error("unreachable gate tag");
}

}  // namespace

Circuit Circuit::make_gate(GateTag g, const Rat& p) {
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::Gen;
  n->gate = g;
  n->param = p;
  n->type = gate_type(g);
  return Circuit(std::move(n));
}

Circuit Circuit::make_leaf(NodeKind k, CircType t) {
  auto n = std::make_shared<Node>();
  n->kind = k;
  n->type = t;
  return Circuit(std::move(n));
}

Circuit Circuit::copy_gate() { return make_gate(GateTag::Copy, Rat(0)); }
Circuit Circuit::discard() { return make_gate(GateTag::Discard, Rat(0)); }
Circuit Circuit::and_gate() { return make_gate(GateTag::And, Rat(0)); }
Circuit Circuit::not_gate() { return make_gate(GateTag::Not, Rat(0)); }
Circuit Circuit::cond() { return make_gate(GateTag::Cond, Rat(0)); }

Circuit Circuit::flip(const Rat& p) {
  if (!is_probability(p))
    throw Error("flip parameter outside [0,1]: " + rat_str(p));
  return make_gate(GateTag::Flip, p);
}

Circuit Circuit::id() { return make_leaf(NodeKind::Id, {1, 1}); }
Circuit Circuit::id0() { return make_leaf(NodeKind::Id0, {0, 0}); }
Circuit Circuit::swap() { return make_leaf(NodeKind::Swap, {2, 2}); }

Circuit Circuit::seq(Circuit first, Circuit second) {
  if (!first.valid() || !second.valid()) throw Error("empty circuit handle");
  CircType ta = first.type(), tb = second.type();
  if (ta.out != tb.in)
    throw TypeMismatch("sequential composition joins " +
                       std::to_string(ta.in) + "->" + std::to_string(ta.out) +
                       " with " + std::to_string(tb.in) + "->" +
                       std::to_string(tb.out));
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::Seq;
  n->a = std::move(first);
  n->b = std::move(second);
  n->type = {ta.in, tb.out};
  return Circuit(std::move(n));
}

Circuit Circuit::par(Circuit top, Circuit bottom) {
  if (!top.valid() || !bottom.valid()) throw Error("empty circuit handle");
  CircType ta = top.type(), tb = bottom.type();
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::Par;
  n->a = std::move(top);
  n->b = std::move(bottom);
  n->type = {ta.in + tb.in, ta.out + tb.out};
  return Circuit(std::move(n));
}

NodeKind Circuit::kind() const { return node_->kind; }

GateTag Circuit::gate() const {
  if (node_->kind != NodeKind::Gen) throw Error("gate() on non-generator");
  return node_->gate;
}

const Rat& Circuit::flip_param() const {
  if (node_->kind != NodeKind::Gen || node_->gate != GateTag::Flip)
    throw Error("flip_param() on non-flip");
  return node_->param;
}

const Circuit& Circuit::first() const {
  if (node_->kind != NodeKind::Seq && node_->kind != NodeKind::Par)
    throw Error("first() on leaf node");
  return node_->a;
}

const Circuit& Circuit::second() const {
  if (node_->kind != NodeKind::Seq && node_->kind != NodeKind::Par)
    throw Error("second() on leaf node");
  return node_->b;
}

CircType Circuit::type() const { return node_->type; }

bool operator==(const Circuit& a, const Circuit& b) {
  if (a.node_ == b.node_) return true;
  if (!a.node_ || !b.node_) return false;
  if (a.node_->kind != b.node_->kind) return false;
  switch (a.node_->kind) {
    case NodeKind::Gen:
      return a.node_->gate == b.node_->gate &&
             (a.node_->gate != GateTag::Flip ||
              a.node_->param == b.node_->param);
    case NodeKind::Id:
    case NodeKind::Id0:
    case NodeKind::Swap:
      return true;
    case NodeKind::Seq:
    case NodeKind::Par:
      return a.node_->a == b.node_->a && a.node_->b == b.node_->b;
  }
  return false;
}

CircType circ_type(const Circuit& c) { return c.type(); }

bool is_causal(const Circuit& c) {
  switch (c.kind()) {
    case NodeKind::Gen:
      return c.gate() != GateTag::Cond;
    case NodeKind::Seq:
    case NodeKind::Par:
      return is_causal(c.first()) && is_causal(c.second());
    default:
      return true;
  }
}

bool is_boolean(const Circuit& c) {
  switch (c.kind()) {
    case NodeKind::Gen:
      if (c.gate() == GateTag::Cond) return false;
      if (c.gate() == GateTag::Flip)
        return c.flip_param() == 0 || c.flip_param() == 1;
      return true;
    case NodeKind::Seq:
    case NodeKind::Par:
      return is_boolean(c.first()) && is_boolean(c.second());
    default:
      return true;
  }
}

bool is_identity_bundle(const Circuit& c) {
  switch (c.kind()) {
    case NodeKind::Id:
    case NodeKind::Id0:
      return true;
    case NodeKind::Seq:
    case NodeKind::Par:
      return is_identity_bundle(c.first()) && is_identity_bundle(c.second());
    default:
      return false;
  }
}

int generator_count(const Circuit& c) {
  switch (c.kind()) {
    case NodeKind::Gen:
      return 1;
    case NodeKind::Seq:
    case NodeKind::Par:
      return generator_count(c.first()) + generator_count(c.second());
    default:
      return 0;
  }
}

namespace {

/// Canonical identity bundle of a given width (used when a whole Seq chain
/// collapses to the identity).
Circuit identity_of_width(int w) {
  if (w == 0) return Circuit::id0();
  Circuit c = Circuit::id();
  for (int i = 1; i < w; ++i) c = Circuit::par(Circuit::id(), c);
  return c;
}

void collect_seq(const Circuit& c, std::vector<Circuit>& out);
void collect_par(const Circuit& c, std::vector<Circuit>& out);

Circuit flatten_rec(const Circuit& c) {
  switch (c.kind()) {
    case NodeKind::Seq: {
      std::vector<Circuit> factors;
      collect_seq(c, factors);
      std::vector<Circuit> kept;
      for (const auto& f : factors) {
        Circuit ff = flatten_rec(f);
        if (is_identity_bundle(ff)) continue;  // unit law: c ; id = c
        kept.push_back(std::move(ff));
      }
      if (kept.empty()) return identity_of_width(c.type().in);
      Circuit acc = kept.back();
      for (std::size_t i = kept.size() - 1; i-- > 0;)
        acc = Circuit::seq(kept[i], acc);
      return acc;
    }
    case NodeKind::Par: {
      std::vector<Circuit> factors;
      collect_par(c, factors);
      std::vector<Circuit> kept;
      for (const auto& f : factors) {
        Circuit ff = flatten_rec(f);
        if (ff.kind() == NodeKind::Id0) continue;  // unit law: c x id0 = c
        kept.push_back(std::move(ff));
      }
      if (kept.empty()) return Circuit::id0();
      Circuit acc = kept.back();
      for (std::size_t i = kept.size() - 1; i-- > 0;)
        acc = Circuit::par(kept[i], acc);
      return acc;
    }
    default:
      return c;
  }
}

void collect_seq(const Circuit& c, std::vector<Circuit>& out) {
  if (c.kind() == NodeKind::Seq) {
    collect_seq(c.first(), out);
    collect_seq(c.second(), out);
  } else {
    out.push_back(c);
  }
}

void collect_par(const Circuit& c, std::vector<Circuit>& out) {
  if (c.kind() == NodeKind::Par) {
    collect_par(c.first(), out);
    collect_par(c.second(), out);
  } else {
    out.push_back(c);
  }
}

}  // namespace

Circuit flatten(const Circuit& c) { return flatten_rec(c); }

Circuit subterm(const Circuit& c, const Path& path) {
  Circuit cur = c;
  for (std::size_t i = 0; i < path.size(); ++i) {
    int sel = path[i];
    if (sel == 0 || sel == 1) {
      if (cur.kind() != NodeKind::Seq && cur.kind() != NodeKind::Par)
        throw BadPath("path descends into a leaf at position " +
                      std::to_string(i));
      cur = sel == 0 ? cur.first() : cur.second();
    } else {
      throw BadPath("invalid path selector " + std::to_string(sel));
    }
  }
  return cur;
}

Circuit replace_subterm(const Circuit& c, const Path& path,
                        const Circuit& replacement) {
  if (path.empty()) {
    if (replacement.type() != c.type())
      throw TypeMismatch("replacement changes wire type");
    return replacement;
  }
  int sel = path.front();
  if (sel != 0 && sel != 1)
    throw BadPath("invalid path selector " + std::to_string(sel));
  if (c.kind() != NodeKind::Seq && c.kind() != NodeKind::Par)
    throw BadPath("path descends into a leaf");
  Path rest(path.begin() + 1, path.end());
  Circuit a = c.first(), b = c.second();
  if (sel == 0)
    a = replace_subterm(a, rest, replacement);
  else
    b = replace_subterm(b, rest, replacement);
  return c.kind() == NodeKind::Seq ? Circuit::seq(a, b) : Circuit::par(a, b);
}

std::vector<Circuit> seq_factors(const Circuit& c) {
  std::vector<Circuit> out;
  collect_seq(c, out);
  return out;
}

std::vector<Circuit> par_factors(const Circuit& c) {
  std::vector<Circuit> out;
  collect_par(c, out);
  return out;
}

Circuit seq_chain(const std::vector<Circuit>& factors) {
  if (factors.empty()) throw Error("empty sequential chain");
  Circuit acc = factors.back();
  for (std::size_t i = factors.size() - 1; i-- > 0;)
    acc = Circuit::seq(factors[i], acc);
  return acc;
}

Circuit par_chain(const std::vector<Circuit>& factors) {
  if (factors.empty()) return Circuit::id0();
  Circuit acc = factors.back();
  for (std::size_t i = factors.size() - 1; i-- > 0;)
    acc = Circuit::par(factors[i], acc);
  return acc;
}

}  // namespace probcirc
