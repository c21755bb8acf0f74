#include "probcirc/gates.hpp"

#include <algorithm>

namespace probcirc {

Circuit identity_bundle(int n) {
  if (n < 0) throw Error("negative wire count");
  if (n == 0) return Circuit::id0();
  Circuit c = Circuit::id();
  for (int i = 1; i < n; ++i) c = Circuit::par(Circuit::id(), c);
  return c;
}

Circuit discard_bundle(int n) {
  if (n < 0) throw Error("negative wire count");
  if (n == 0) return Circuit::id0();
  Circuit c = Circuit::discard();
  for (int i = 1; i < n; ++i) c = Circuit::par(Circuit::discard(), c);
  return c;
}

Circuit not_bundle(int n) {
  if (n < 0) throw Error("negative wire count");
  if (n == 0) return Circuit::id0();
  Circuit c = Circuit::not_gate();
  for (int i = 1; i < n; ++i) c = Circuit::par(Circuit::not_gate(), c);
  return c;
}

Circuit or2() {
  return Circuit::seq(
      Circuit::par(Circuit::not_gate(), Circuit::not_gate()),
      Circuit::seq(Circuit::and_gate(), Circuit::not_gate()));
}

Circuit mux() {
  // (g,t,e) -> (g,g,t,e) -> (g,t,g,e) -> (g,t,~g,e) -> (g&t, ~g&e) -> or
  return seq_chain({
      Circuit::par(Circuit::copy_gate(), identity_bundle(2)),
      Circuit::par(Circuit::id(),
                   Circuit::par(Circuit::swap(), Circuit::id())),
      Circuit::par(Circuit::id(),
                   Circuit::par(Circuit::id(),
                                Circuit::par(Circuit::not_gate(),
                                             Circuit::id()))),
      Circuit::par(Circuit::and_gate(), Circuit::and_gate()),
      or2(),
  });
}

Circuit and_n(int n) {
  if (n < 0) throw Error("negative arity");
  if (n == 0) return Circuit::flip(Rat(1));
  Circuit c = and_n(n - 1);
  return Circuit::seq(Circuit::par(Circuit::id(), c), Circuit::and_gate());
}

Circuit or_n(int n) {
  if (n < 0) throw Error("negative arity");
  if (n == 0) return Circuit::flip(Rat(0));
  Circuit c = or_n(n - 1);
  return Circuit::seq(Circuit::par(Circuit::id(), c), or2());
}

Circuit copy_1_to_n(int n) {
  if (n < 0) throw Error("negative arity");
  if (n == 0) return Circuit::discard();
  if (n == 1) return Circuit::id();
  return Circuit::seq(Circuit::copy_gate(),
                      Circuit::par(Circuit::id(), copy_1_to_n(n - 1)));
}

Circuit cond_n(int n) {
  if (n < 0) throw Error("negative arity");
  if (n == 0) return Circuit::id0();
  // (x_0..x_{n-1}, y_0..y_{n-1}) -> (x_0, y_0, ..., x_{n-1}, y_{n-1})
  std::vector<int> src(2 * n);
  for (int i = 0; i < n; ++i) {
    src[2 * i] = i;
    src[2 * i + 1] = n + i;
  }
  std::vector<Circuit> conds(n, Circuit::cond());
  return Circuit::seq(permutation(src), par_chain(conds));
}

Circuit block_copy(int n) {
  if (n < 0) throw Error("negative arity");
  if (n == 0) return Circuit::id0();
  if (n == 1) return Circuit::copy_gate();
  std::vector<Circuit> copies(n, Circuit::copy_gate());
  // interleaved (x_0,x_0,...,x_{n-1},x_{n-1}) -> blocks (x, x)
  std::vector<int> src(2 * n);
  for (int i = 0; i < n; ++i) {
    src[i] = 2 * i;
    src[n + i] = 2 * i + 1;
  }
  return Circuit::seq(par_chain(copies), permutation(src));
}

Circuit permutation(const std::vector<int>& src) {
  int n = static_cast<int>(src.size());
  std::vector<bool> seen(n, false);
  for (int s : src) {
    if (s < 0 || s >= n || seen[s]) throw Error("not a permutation");
    seen[s] = true;
  }
  // Selection sort with adjacent crossings; cur tracks which input is on
  // each wire as layers are applied.
  std::vector<int> cur(n);
  for (int i = 0; i < n; ++i) cur[i] = i;
  std::vector<Circuit> layers;
  for (int i = 0; i < n; ++i) {
    int j = i;
    while (cur[j] != src[i]) ++j;
    for (int t = j; t > i; --t) {
      layers.push_back(Circuit::par(
          identity_bundle(t - 1),
          Circuit::par(Circuit::swap(), identity_bundle(n - t - 1))));
      std::swap(cur[t - 1], cur[t]);
    }
  }
  if (layers.empty()) return identity_bundle(n);
  return seq_chain(layers);
}

Circuit rotate_front_to_back(int n) {
  if (n <= 0) return identity_bundle(std::max(n, 0));
  std::vector<int> src(n);
  for (int i = 0; i + 1 < n; ++i) src[i] = i + 1;
  src[n - 1] = 0;
  return permutation(src);
}

Circuit and_broadcast(int k) {
  if (k < 0) throw Error("negative arity");
  if (k == 0) return Circuit::discard();
  // (x, y_1..y_k) -> (x, x, y_1..y_k) -> (x, y_1, x, y_2..y_k)
  //              -> (x & y_1, and_broadcast(x, y_2..y_k))
  std::vector<int> src(k + 2);
  src[0] = 0;
  src[1] = 2;
  src[2] = 1;
  for (int i = 3; i < k + 2; ++i) src[i] = i;
  return seq_chain({
      Circuit::par(Circuit::copy_gate(), identity_bundle(k)),
      permutation(src),
      Circuit::par(Circuit::and_gate(), and_broadcast(k - 1)),
  });
}

Circuit all_n(int n) {
  if (n < 0) throw Error("negative arity");
  if (n == 0) return Circuit::flip(Rat(1));
  int half = 1 << (n - 1);
  // (a, b) -> (a, a, o) -> (a, ~a, o, o) -> (a, o, ~a, o)
  //        -> (a & o, ~a & o): the a = 1 block (higher values) on top.
  std::vector<int> src(2 * half + 2);
  src[0] = 0;
  for (int i = 0; i < half; ++i) src[1 + i] = 2 + i;
  src[half + 1] = 1;
  for (int i = 0; i < half; ++i) src[half + 2 + i] = 2 + half + i;
  return seq_chain({
      Circuit::par(Circuit::copy_gate(), all_n(n - 1)),
      Circuit::par(Circuit::id(),
                   Circuit::par(Circuit::not_gate(), block_copy(half))),
      permutation(src),
      Circuit::par(and_broadcast(half), and_broadcast(half)),
  });
}

Circuit flip_bot() {
  return Circuit::seq(Circuit::par(Circuit::flip(Rat(0)), Circuit::flip(Rat(1))),
                      Circuit::cond());
}

Circuit failure_circuit(int m, int n) {
  return Circuit::par(discard_bundle(m),
                      Circuit::seq(flip_bot(), copy_1_to_n(n)));
}

Circuit one_hot_cascade(const std::vector<Rat>& params) {
  // Build from the last slot inward: the dead branch defaults to flip(0).
  Circuit acc = Circuit::flip(Rat(0));
  for (std::size_t j = params.size(); j-- > 0;) {
    acc = Circuit::seq(
        Circuit::par(Circuit::id(),
                     Circuit::par(Circuit::flip(params[j]), acc)),
        mux());
  }
  return acc;
}

}  // namespace probcirc
