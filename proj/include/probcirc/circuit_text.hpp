#pragma once

#include <string>

#include "probcirc/circuit.hpp"

namespace probcirc {

/// Canonical text for a circuit. The term is flattened first, so
/// parse_circuit(serialize(c)) == flatten(c) structurally.
///
/// Grammar (whitespace insensitive, '#' starts a comment to end of line):
///   circuit  := "seq(" circuit "," circuit ")"
///             | "par(" circuit "," circuit ")"
///             | "id" | "id0" | "swap" | "copy" | "del" | "and" | "not"
///             | "cond" | "flip(" rational ")"
///             | "mux" | "or" | "or(" nat ")" | "and(" nat ")"
///             | "copy(" nat ")" | "del(" nat ")" | "not(" nat ")"
///             | "cond(" nat ")" | "all(" nat ")" | "fail(" nat "," nat ")"
///   rational := ["-"] digits [ "/" digits | "." digits ]
/// Derived names expand to their defining terms at parse time; serialize
/// only ever emits core syntax.
std::string serialize(const Circuit& c);

/// Parses the grammar above; throws SyntaxError with line/column on
/// malformed text and TypeMismatch (annotated with the position) when a
/// seq joins incompatible widths.
Circuit parse_circuit(const std::string& text);

}  // namespace probcirc
