#pragma once

#include <Eigen/Core>
#include <string>

#include "probcirc/circuit.hpp"
#include "probcirc/rational.hpp"

namespace probcirc {

using Mat = Eigen::Matrix<Rat, Eigen::Dynamic, Eigen::Dynamic>;

struct CapExceeded : Error {
  using Error::Error;
};

struct NotAJoint : Error {
  using Error::Error;
};

/// Exact transition matrix of a circuit m -> n: a 2^n x 2^m matrix whose
/// entry (y, x) is the probability of output word y on input word x. Words
/// index rows/columns in plain ascending order; the first (top) wire is the
/// most significant bit.
struct SubStochMatrix {
  int in = 0;
  int out = 0;
  Mat m;

  friend bool operator==(const SubStochMatrix& a, const SubStochMatrix& b) {
    return a.in == b.in && a.out == b.out && a.m == b.m;
  }
  friend bool operator!=(const SubStochMatrix& a, const SubStochMatrix& b) {
    return !(a == b);
  }
};

struct EvalOptions {
  /// Bound on materialised cells. The result matrix itself must have at most
  /// this many cells (2^(in+out)); during evaluation the bound applies to
  /// whatever is actually stored: full subterm matrices when they are all
  /// small, or sparse supports when interior layers are too wide for that.
  long long max_cells = 1LL << 20;
};

/// Kronecker product; the left factor supplies the most significant bits.
Mat kron(const Mat& a, const Mat& b);

/// Exact evaluation: seq is matrix product, par is Kronecker. Circuits whose
/// subterm matrices all fit the cap are evaluated densely; circuits with
/// wide interior layers (for example the one-hot buses in canonical-form
/// circuits) are evaluated one input word at a time, storing only nonzero
/// outcomes. Throws CapExceeded when the bound is hit either way.
SubStochMatrix eval(const Circuit& c, const EvalOptions& opts = {});

/// Entries in [0,1] with every column summing to at most 1.
bool is_substochastic(const SubStochMatrix& M);

/// Every column sums to exactly 1.
bool is_stochastic(const SubStochMatrix& M);

/// Stochastic with only 0/1 entries: a function table.
bool is_deterministic(const SubStochMatrix& M);

/// Equivalence class of a matrix under positive scaling. The zero matrix is
/// its own class (bottom); otherwise the representative is the matrix
/// scaled so that the sum of all entries is 1.
struct ProjClass {
  int in = 0;
  int out = 0;
  bool bottom = false;
  Mat canon;  // unused when bottom

  friend bool operator==(const ProjClass& a, const ProjClass& b) {
    if (a.in != b.in || a.out != b.out || a.bottom != b.bottom) return false;
    return a.bottom || a.canon == b.canon;
  }
  friend bool operator!=(const ProjClass& a, const ProjClass& b) {
    return !(a == b);
  }
};

ProjClass canonical_class(const SubStochMatrix& M);

/// Equality up to positive scaling (equality of canonical classes).
bool prop_equal(const SubStochMatrix& A, const SubStochMatrix& B);

/// For a joint state M: 0 -> (k + l), keeps the first (most significant)
/// `keep` wires and sums out the rest. Throws NotAJoint when M has inputs.
SubStochMatrix marginalize(const SubStochMatrix& M, int keep);

/// JSON: {"in": m, "out": n, "entries": [[num, den], ...]} row-major with
/// ascending row index. Numerator/denominator fall back to decimal strings
/// when they do not fit in 64 bits.
std::string matrix_json(const SubStochMatrix& M);
SubStochMatrix matrix_from_json(const std::string& text);

/// Same layout plus "class": "canonical" or "bottom".
std::string class_json(const ProjClass& P);

}  // namespace probcirc
