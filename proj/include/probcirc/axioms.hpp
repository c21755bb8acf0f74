#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "probcirc/circuit.hpp"
#include "probcirc/matrix.hpp"
#include "probcirc/rational.hpp"

namespace probcirc {

struct MissingParam : Error {
  using Error::Error;
};

struct PatternMismatch : Error {
  using Error::Error;
};

struct SideConditionViolated : Error {
  using Error::Error;
};

/// The equational rules. The first seven are the structural laws of the
/// wiring language (composition, tensor, symmetry); the middle groups govern
/// copying and discarding, the Boolean gates, the interaction of copy and
/// discard with gates, coin flips, and conditioning; the final three are
/// derivable rules that are convenient as single steps.
enum class AxiomId {
  SeqAssoc,
  ParAssoc,
  Interchange,
  SeqUnit,
  ParUnit,
  SymNat,
  SymInv,
  CopyAssoc,
  CopyUnitL,
  CopyUnitR,
  CopyComm,
  AndAssoc,
  AndUnitL,
  AndUnitR,
  AndComm,
  NotInvol,
  AndIdem,
  AndComplement,
  AndOrDistrib,
  CopyFalse,
  CopyTrue,
  CopyAnd,
  CopyNot,
  DelAnd,
  DelNot,
  DelFlip,
  FlipNot,
  MixturePosterior,
  SelectRegroup,
  BranchSplit,
  CondAssoc,
  CondUnitL,
  CondUnitR,
  CondComm,
  CondCopyL,
  CondCopyR,
  CopyCondCancel,
  PosteriorCollapse,
  FailAbsorb,
  MuxMixture,
  AgreeFlips,
  DeleteCausal,
};

struct AxiomInfo {
  AxiomId id;
  std::string name;
  std::vector<std::string> params;           // required probability params
  std::vector<std::string> optional_params;  // accepted when determined ends
  bool propositional;  // sound up to a positive scalar only
  bool has_holes;      // quantifies over subcircuits; not instantiable
  bool derived;        // provable from the others
  std::string statement;
};

const std::vector<AxiomId>& all_axioms();
const AxiomInfo& axiom_info(AxiomId id);
std::string axiom_name(AxiomId id);
AxiomId axiom_from_name(const std::string& name);  // throws Error

struct AxiomInstance {
  Circuit lhs;
  Circuit rhs;
};

/// Builds both sides of a hole-free rule from its parameters. Throws
/// MissingParam for an absent required parameter, SideConditionViolated for
/// out-of-range or side-condition-breaking values, and Error for rules with
/// circuit holes.
AxiomInstance instantiate(AxiomId id, const std::map<std::string, Rat>& params);

struct SoundnessReport {
  AxiomId id;
  std::string name;
  int trials = 0;
  int passes = 0;
  bool propositional = false;
  std::string counterexample;  // empty when all trials pass
};

/// Randomized semantic check of one rule: draws parameters (and random
/// circuits for holes), evaluates both sides and compares matrices — exact
/// equality for most rules, equality up to scaling for the propositional
/// ones. Deterministic for a fixed seed.
SoundnessReport check_soundness(AxiomId id, int trials, std::uint64_t seed);
std::vector<SoundnessReport> check_all_axioms(int trials, std::uint64_t seed);

struct RewriteStep {
  AxiomId rule;
  bool left_to_right = true;
  Path path;
  std::map<std::string, Rat> params;
};

/// Applies one rewrite step to a term and returns the flattened result.
///
/// The term is flattened first; the path addresses a subterm of the
/// flattened tree with child selectors 0/1. The rule's source side (left
/// for LR, right for RL) is instantiated and its chain factors are matched
/// structurally as a prefix of the addressed node's chain of the same kind
/// (sequential or parallel, per the source's root); the matched prefix is
/// replaced by the target side. A final path selector 2 (resp. 3) instead
/// addresses the invisible identity at the input (resp. output) boundary of
/// the node, which lets a rule whose source side is an identity insert its
/// target there. The four associativity/unit laws are identities of the
/// flattened representation and validate the path only.
///
/// Throws BadPath, PatternMismatch, SideConditionViolated, MissingParam.
Circuit apply_step(const Circuit& term, const RewriteStep& step);

struct Derivation {
  std::string start_text;
  std::string end_text;
  std::vector<RewriteStep> steps;
};

struct DerivationTrace {
  bool ok = false;
  /// When !ok: index of the failing step, or steps.size() when every step
  /// applied but the final term differs from the declared end.
  std::size_t failed_step = 0;
  std::string error;
  /// Serialized terms: the start, then the result of each applied step.
  std::vector<std::string> terms;
};

/// Replays a derivation: parses the start term, applies each step, checks
/// that every step preserves the term's equivalence class, and finally
/// compares (flattened, structural) against the parsed end term.
DerivationTrace check_derivation(const Derivation& d,
                                 const EvalOptions& opts = {});

/// JSON form:
///   {"start": "<circuit text>", "end": "<circuit text>",
///    "steps": [{"axiom": "FlipNot", "dir": "LR", "path": [0, 1],
///               "params": {"p": [1, 3]}}, ...]}
/// Parameter values may be [num, den] pairs, integers, or strings like
/// "1/3".
std::string derivation_json(const Derivation& d);
Derivation derivation_from_json(const std::string& text);

}  // namespace probcirc
