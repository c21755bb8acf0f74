#pragma once

#include <memory>
#include <string>
#include <vector>

#include "probcirc/rational.hpp"

namespace probcirc {

/// Wire type of a circuit: m input wires and n output wires.
struct CircType {
  int in = 0;
  int out = 0;
  friend bool operator==(const CircType&, const CircType&) = default;
};

struct TypeMismatch : Error {
  using Error::Error;
};

struct BadPath : Error {
  using Error::Error;
};

/// Primitive generators of the circuit language.
enum class GateTag { Copy, Discard, And, Not, Flip, Cond };

enum class NodeKind { Gen, Id, Id0, Swap, Seq, Par };

/// Immutable term tree for probabilistic circuits. A Circuit is a cheap
/// shared handle; every node carries its wire type, computed at construction
/// (so all reachable Circuit values are well typed).
class Circuit {
 public:
  Circuit() = default;  // empty handle; only valid after assignment

  // generators
  static Circuit copy_gate();
  static Circuit discard();
  static Circuit and_gate();
  static Circuit not_gate();
  static Circuit flip(const Rat& p);
  static Circuit cond();
  // structural pieces
  static Circuit id();    // single wire identity, 1 -> 1
  static Circuit id0();   // empty circuit, 0 -> 0
  static Circuit swap();  // wire crossing, 2 -> 2
  /// Sequential composition; throws TypeMismatch if widths do not meet.
  static Circuit seq(Circuit first, Circuit second);
  /// Parallel composition (top block first / most significant).
  static Circuit par(Circuit top, Circuit bottom);

  bool valid() const { return node_ != nullptr; }
  NodeKind kind() const;
  GateTag gate() const;        // Gen nodes only
  const Rat& flip_param() const;  // Gen(Flip) nodes only
  const Circuit& first() const;   // Seq/Par child 0
  const Circuit& second() const;  // Seq/Par child 1
  CircType type() const;

  /// Stable identity of the shared node, usable as a memoisation key.
  const void* node_key() const { return node_.get(); }

  /// Deep structural equality (pointer-equal subtrees short circuit).
  friend bool operator==(const Circuit& a, const Circuit& b);
  friend bool operator!=(const Circuit& a, const Circuit& b) {
    return !(a == b);
  }

 private:
  struct Node;
  explicit Circuit(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  static Circuit make_gate(GateTag g, const Rat& p);
  static Circuit make_leaf(NodeKind k, CircType t);
  std::shared_ptr<const Node> node_;
};

/// Returns the wire type; the unique type exists by construction.
CircType circ_type(const Circuit& c);

/// True when the term contains no Cond generator.
bool is_causal(const Circuit& c);

/// True when the term is causal and every Flip parameter is 0 or 1.
bool is_boolean(const Circuit& c);

/// True when the term denotes an identity by unit laws alone: built solely
/// from Id, Id0 and compositions of such.
bool is_identity_bundle(const Circuit& c);

/// Number of generator occurrences (Copy/Discard/And/Not/Flip/Cond).
int generator_count(const Circuit& c);

/// Canonical associativity/unit normal form of the term tree: Seq and Par
/// chains are right nested, identity units absorbed (Seq factors that are
/// identity bundles are dropped; Id0 factors are dropped from Par chains).
/// Preserves the wire type and the semantics; idempotent.
Circuit flatten(const Circuit& c);

/// Child selectors for subterm paths: 0 = first child, 1 = second child.
/// Selector 2 addresses the implicit identity at the input boundary of the
/// current subterm and 3 the one at its output boundary; these are only
/// meaningful as the final selector and are used by rewrite steps that
/// introduce structure at a wire.
using Path = std::vector<int>;

/// Subterm at a path of selectors 0/1; throws BadPath.
Circuit subterm(const Circuit& c, const Path& path);

/// Replaces the subterm at a path (selectors 0/1 only) and rebuilds the
/// term; throws BadPath or TypeMismatch if the replacement does not fit.
Circuit replace_subterm(const Circuit& c, const Path& path,
                        const Circuit& replacement);

/// Splits a flattened Seq (resp. Par) chain into its factor list; a term
/// whose root is not Seq (resp. Par) yields a single factor.
std::vector<Circuit> seq_factors(const Circuit& c);
std::vector<Circuit> par_factors(const Circuit& c);

/// Rebuilds a right-nested chain from factors; empty Seq list is invalid,
/// empty Par list yields Id0.
Circuit seq_chain(const std::vector<Circuit>& factors);
Circuit par_chain(const std::vector<Circuit>& factors);

}  // namespace probcirc
