#include "probcirc/random_circuit.hpp"

#include "probcirc/gates.hpp"

namespace probcirc {

Rat random_prob(std::mt19937_64& rng, long den_bound) {
  if (den_bound < 1) den_bound = 1;
  long den = 1 + static_cast<long>(rng() % static_cast<std::uint64_t>(den_bound));
  long num = static_cast<long>(rng() % static_cast<std::uint64_t>(den + 1));
  return rat(num, den);
}

namespace {

enum class Layer { FlipG, CopyG, DiscardG, NotG, AndG, SwapG, CondG };

Circuit layer_gate(Layer l, std::mt19937_64& rng, long den_bound) {
  switch (l) {
    case Layer::FlipG:
      return Circuit::flip(random_prob(rng, den_bound));
    case Layer::CopyG:
      return Circuit::copy_gate();
    case Layer::DiscardG:
      return Circuit::discard();
    case Layer::NotG:
      return Circuit::not_gate();
    case Layer::AndG:
      return Circuit::and_gate();
    case Layer::SwapG:
      return Circuit::swap();
    case Layer::CondG:
      return Circuit::cond();
  }
  return Circuit::not_gate();
}

int layer_in(Layer l) {
  switch (l) {
    case Layer::FlipG:
      return 0;
    case Layer::CopyG:
    case Layer::DiscardG:
    case Layer::NotG:
      return 1;
    default:
      return 2;
  }
}

int layer_out(Layer l) {
  switch (l) {
    case Layer::FlipG:
      return 1;
    case Layer::CopyG:
    case Layer::SwapG:
      return 2;
    case Layer::DiscardG:
      return 0;
    default:
      return 1;
  }
}

}  // namespace

Circuit random_circuit(std::mt19937_64& rng, const CircuitGenOptions& opts) {
  int width = opts.in_wires >= 0
                  ? opts.in_wires
                  : static_cast<int>(rng() % (opts.max_width + 1));
  Circuit c = identity_bundle(width);
  int layers = static_cast<int>(rng() % (opts.max_gens + 1));
  for (int i = 0; i < layers; ++i) {
    std::vector<Layer> candidates;
    for (Layer l : {Layer::FlipG, Layer::CopyG, Layer::DiscardG, Layer::NotG,
                    Layer::AndG, Layer::SwapG, Layer::CondG}) {
      if (l == Layer::CondG && !opts.allow_cond) continue;
      if (layer_in(l) > width) continue;
      if (width - layer_in(l) + layer_out(l) > opts.max_width) continue;
      candidates.push_back(l);
    }
    if (candidates.empty()) break;
    Layer l = candidates[rng() % candidates.size()];
    int slots = width - layer_in(l) + 1;
    int pos = static_cast<int>(rng() % static_cast<std::uint64_t>(slots));
    int rest = width - layer_in(l) - pos;
    Circuit g = layer_gate(l, rng, opts.den_bound);
    c = Circuit::seq(
        c, Circuit::par(identity_bundle(pos),
                        Circuit::par(g, identity_bundle(rest))));
    width = width - layer_in(l) + layer_out(l);
  }
  return flatten(c);
}

}  // namespace probcirc
