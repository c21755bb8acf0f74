#pragma once

#include <vector>

#include "probcirc/circuit.hpp"

namespace probcirc {

/// Derived gates and wiring combinators. All of these are plain terms over
/// the six generators plus id/swap; none extend the language.

/// n parallel identity wires (n = 0 gives the empty circuit).
Circuit identity_bundle(int n);

/// n -> 0, discards every wire.
Circuit discard_bundle(int n);

/// n -> n, negates every wire.
Circuit not_bundle(int n);

/// 2 -> 1 disjunction, defined as (not x not) ; and ; not.
Circuit or2();

/// 3 -> 1 multiplexer: (g, t, e) -> t when g = 1, e when g = 0.
Circuit mux();

/// n -> 1 conjunction; and_n(0) is the constant true, flip(1).
Circuit and_n(int n);

/// n -> 1 disjunction; or_n(0) is the constant false, flip(0).
Circuit or_n(int n);

/// 1 -> n broadcast; n = 0 discards, n = 1 is the plain wire.
Circuit copy_1_to_n(int n);

/// 2n -> n, conditions pairs (x_i, y_i) to be equal, n conditioning gates.
Circuit cond_n(int n);

/// n -> 2n block duplication: x -> (x, x).
Circuit block_copy(int n);

/// Wire permutation: output wire i carries input wire src[i]
/// (wires indexed from the top, 0-based). Built from adjacent crossings.
Circuit permutation(const std::vector<int>& src);

/// (x_1, ..., x_n) -> (x_2, ..., x_n, x_1).
Circuit rotate_front_to_back(int n);

/// 1+k -> k broadcast conjunction: (x, y_1..y_k) -> (x & y_1, ..., x & y_k).
Circuit and_broadcast(int k);

/// n -> 2^n one-hot selector: exactly one output is 1, namely the slot of
/// the input's binary value; slots are ordered by descending value (the
/// all-ones slot on top). all_n(0) is the constant true.
Circuit all_n(int n);

/// 0 -> 1 with the zero column: (flip 0 x flip 1) ; cond.
Circuit flip_bot();

/// m -> n with the all-zero matrix: discard everything, then branch an
/// impossible conditioning into n broadcast wires.
Circuit failure_circuit(int m, int n);

/// K -> 1 one-hot dispatch: given one-hot inputs (o_1..o_K) emits a
/// Bernoulli draw with parameter params[j-1] when o_j is hot. params are in
/// slot order (slot 1 first). Used to attach probabilities to all_n.
Circuit one_hot_cascade(const std::vector<Rat>& params);

}  // namespace probcirc
