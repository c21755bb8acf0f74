#pragma once

#include <gmpxx.h>

#include <Eigen/Core>
#include <stdexcept>
#include <string>

namespace probcirc {

/// Exact rational scalar used throughout the library. Every probability,
/// matrix entry and axiom parameter is a Rat; no floating point anywhere.
using Rat = mpq_class;

/// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SyntaxError : Error {
  int line = 0, column = 0;
  SyntaxError(const std::string& msg, int line_, int col_)
      : Error(line_ > 0 ? msg + " (line " + std::to_string(line_) +
                              ", column " + std::to_string(col_) + ")"
                        : msg),
        line(line_),
        column(col_) {}
};

inline Rat rat(long num, long den = 1) {
  if (den == 0) throw Error("rational with zero denominator");
  Rat r(num, den);
  r.canonicalize();
  return r;
}

inline bool is_probability(const Rat& r) { return r >= 0 && r <= 1; }

/// Parses "3/4", "2", "0.25" or "-1/3"; decimals are read exactly
/// (0.25 -> 1/4). Throws Error on malformed input.
Rat parse_rat(const std::string& text);

/// Renders as "num/den", or just "num" for integers.
std::string rat_str(const Rat& r);

}  // namespace probcirc

namespace Eigen {

/// Scalar traits so Eigen dense matrices can hold exact rationals.
template <>
struct NumTraits<mpq_class> : GenericNumTraits<mpq_class> {
  typedef mpq_class Real;
  typedef mpq_class NonInteger;
  typedef mpq_class Nested;
  static inline Real epsilon() { return 0; }
  static inline Real dummy_precision() { return 0; }
  static inline int digits10() { return 0; }
  enum {
    IsInteger = 0,
    IsSigned = 1,
    IsComplex = 0,
    RequireInitialization = 1,
    ReadCost = 6,
    AddCost = 150,
    MulCost = 100
  };
};

}  // namespace Eigen
