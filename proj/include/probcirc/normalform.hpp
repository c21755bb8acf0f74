#pragma once

#include <string>
#include <vector>

#include "probcirc/circuit.hpp"
#include "probcirc/matrix.hpp"

namespace probcirc {

struct NotBoolean : Error {
  using Error::Error;
};
struct NotStochastic : Error {
  using Error::Error;
};
struct NotCausal : Error {
  using Error::Error;
};
struct HasConditioning : Error {
  using Error::Error;
};

/// Function table of a Boolean circuit m -> n: table[x] = y.
std::vector<long long> truth_table(const Circuit& b,
                                   const EvalOptions& opts = {});

/// Canonical Boolean circuit m -> 1 with the given 0/1 output table
/// (indexed by input word): a one-hot selector feeding a 0/1 cascade.
Circuit bool_circuit_from_table(int m, const std::vector<bool>& table);

struct ShannonExpansion {
  Circuit negative;       // wire fixed to 0, (m-1) -> 1
  Circuit positive;       // wire fixed to 1, (m-1) -> 1
  Circuit recomposition;  // m -> 1, multiplexes the two on that wire
};

/// Cofactors of a single-output Boolean circuit along `wire` (1-based from
/// the top); the recomposition evaluates equal to b.
ShannonExpansion shannon_expand(const Circuit& b, int wire,
                                const EvalOptions& opts = {});

/// Splits a joint state M: 0 -> 1+k into the marginal of the first wire and
/// the conditional of the rest given it. Where the marginal vanishes, the
/// conditional column is the point mass on the all-zero word.
struct Disintegration {
  SubStochMatrix marginal;     // 0 -> 1
  SubStochMatrix conditional;  // 1 -> k
};
Disintegration disintegrate(const SubStochMatrix& M);

/// Conditional probability tables of a stochastic matrix m -> n: table k
/// (1-based) maps each context word (the m inputs followed by outputs
/// y_1..y_{k-1}, most significant first) to P(y_k = 1 | context). At
/// contexts whose prefix has probability zero the entry is 0.
struct CptChain {
  int m = 0;
  int n = 0;
  std::vector<std::vector<Rat>> tables;

  friend bool operator==(const CptChain&, const CptChain&) = default;
};

CptChain cpt_chain(const SubStochMatrix& M);

/// Reassembles the chain's matrix by multiplying the table entries.
SubStochMatrix cpt_matrix(const CptChain& chain);

/// The canonical causal circuit of a chain: each output stage selects its
/// context with a one-hot selector and draws y_k from the matching table
/// entry.
Circuit circuit_from_cpt(const CptChain& chain);

/// JSON: {"m":..,"n":..,"tables":[{"<context bits>": [num,den],..},..]}.
std::string cpt_json(const CptChain& chain);
CptChain cpt_from_json(const std::string& text);

/// Normal form of a causal circuit: circuit_from_cpt(cpt_chain(eval(c))).
/// Two causal circuits have equal matrices iff their normal forms are
/// structurally identical. Throws HasConditioning on non-causal input.
Circuit normal_form(const Circuit& c, const EvalOptions& opts = {});

/// Canonical circuit of a stochastic matrix; throws NotStochastic.
Circuit from_matrix(const SubStochMatrix& M);

/// Structural recogniser for the exact shape normal_form produces
/// (including the zero convention at unreachable contexts).
bool is_normal_form(const Circuit& c, const EvalOptions& opts = {});

/// Binary convex sum with a flip guard: mux(flip p, b, d) over a shared
/// input bundle; the building block of pre normal forms.
Circuit convex_sum(const Rat& p, const Circuit& b, const Circuit& d);

/// A pre normal form is a Boolean circuit or a convex_sum of a Boolean
/// circuit and a pre normal form (single-output circuits).
bool is_pre_normal_form(const Circuit& c);

/// Turns c: m -> n into a state 0 -> m+n by feeding every input from one
/// half of a fair-coin pair whose other half is returned:
/// eval(bend(c))(x, y) = (1/2)^m * eval(c)(y | x).
Circuit bend(const Circuit& c);

/// Inverse plumbing: given d: 0 -> m+n', reads the first m wires back as
/// inputs via conditioning caps: eval(unbend(d, m))(y | x) = eval(d)(x, y).
Circuit unbend(const Circuit& d, int m);

/// Replaces a circuit by one whose only conditioning (if any) sits in the
/// final input-reading caps: the result is cond-free for closed circuits
/// and cond-free except the m caps otherwise; the all-zero case returns the
/// canonical failure circuit. The canonical class of the matrix is
/// preserved exactly.
Circuit eliminate_conditioning(const Circuit& c, const EvalOptions& opts = {});

/// Equality of canonical classes; throws TypeMismatch on width mismatch.
bool equiv(const Circuit& c, const Circuit& d, const EvalOptions& opts = {});

/// Bayesian inversion of a causal channel f: m -> n along a causal prior
/// 0 -> m: returns the n -> m conditional of the joint prior;copy;(id x f)
/// read in the other order, with point mass on the all-zero word at
/// zero-probability outputs. Throws NotCausal.
SubStochMatrix bayes_inverse(const Circuit& f, const Circuit& prior,
                             const EvalOptions& opts = {});

}  // namespace probcirc
