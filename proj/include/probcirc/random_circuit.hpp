#pragma once

#include <random>

#include "probcirc/circuit.hpp"
#include "probcirc/rational.hpp"

namespace probcirc {

struct CircuitGenOptions {
  int max_width = 4;
  int max_gens = 12;
  bool allow_cond = false;
  int in_wires = -1;  // -1 draws the input width at random
  long den_bound = 64;
};

/// Uniform-ish probability with denominator at most den_bound. Draws use
/// rng() and modulo only, so results are reproducible across platforms.
Rat random_prob(std::mt19937_64& rng, long den_bound = 64);

/// Random circuit built as a staircase of single-gate layers; each layer is
/// id ⊗ gate ⊗ id at a random position. Widths never exceed max_width.
Circuit random_circuit(std::mt19937_64& rng, const CircuitGenOptions& opts = {});

}  // namespace probcirc
