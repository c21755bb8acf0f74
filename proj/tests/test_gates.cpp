#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <vector>

#include "probcirc/circuit.hpp"
#include "probcirc/gates.hpp"
#include "probcirc/matrix.hpp"

using namespace probcirc;

namespace {

// Output word of a wire permutation: output wire i (0-based from the top)
// carries input wire src[i]; the top wire is the most significant bit.
long long permute_word(const std::vector<int>& src, long long x) {
  int n = static_cast<int>(src.size());
  long long y = 0;
  for (int i = 0; i < n; ++i)
    if ((x >> (n - 1 - src[i])) & 1) y |= 1LL << (n - 1 - i);
  return y;
}

bool is_function_with(const Circuit& c, long long (*f)(long long)) {
  SubStochMatrix M = eval(c);
  for (long long x = 0; x < (1LL << M.in); ++x)
    for (long long y = 0; y < (1LL << M.out); ++y)
      if (M.m(y, x) != (y == f(x) ? 1 : 0)) return false;
  return true;
}

}  // namespace

TEST_CASE("or2 truth table") {
  SubStochMatrix M = eval(or2());
  REQUIRE(M.in == 2);
  REQUIRE(M.out == 1);
  for (long long x = 0; x < 4; ++x) {
    long long expected = (x != 0) ? 1 : 0;
    CHECK(M.m(expected, x) == 1);
    CHECK(M.m(1 - expected, x) == 0);
  }
}

TEST_CASE("mux selects the middle wire on guard 1, the bottom on guard 0") {
  SubStochMatrix M = eval(mux());
  REQUIRE(M.in == 3);
  REQUIRE(M.out == 1);
  for (int g = 0; g < 2; ++g)
    for (int t = 0; t < 2; ++t)
      for (int e = 0; e < 2; ++e) {
        long long x = 4 * g + 2 * t + e;
        long long expected = g ? t : e;
        CHECK(M.m(expected, x) == 1);
        CHECK(M.m(1 - expected, x) == 0);
      }
}

TEST_CASE("n-ary conjunction and disjunction") {
  CHECK(and_n(0) == Circuit::flip(rat(1)));
  CHECK(or_n(0) == Circuit::flip(rat(0)));
  CHECK(is_function_with(and_n(3), +[](long long x) -> long long {
          return x == 7 ? 1 : 0;
        }));
  CHECK(is_function_with(or_n(3), +[](long long x) -> long long {
          return x != 0 ? 1 : 0;
        }));
  CHECK(eval(and_n(1)).m == eval(Circuit::id()).m);
  CHECK(eval(or_n(1)).m == eval(Circuit::id()).m);
}

TEST_CASE("broadcast and block duplication") {
  CHECK(is_function_with(copy_1_to_n(3), +[](long long x) -> long long {
          return x ? 7 : 0;
        }));
  CHECK(is_function_with(block_copy(2), +[](long long x) -> long long {
          return 4 * x + x;
        }));
  CHECK(copy_1_to_n(0) == Circuit::discard());
  CHECK(copy_1_to_n(1) == Circuit::id());
}

TEST_CASE("wire permutations move words") {
  std::vector<std::vector<int>> perms = {
      {0}, {1, 0}, {1, 2, 0}, {2, 0, 1}, {3, 1, 0, 2}, {0, 1, 2, 3, 4}};
  for (const std::vector<int>& src : perms) {
    SubStochMatrix M = eval(permutation(src));
    int n = static_cast<int>(src.size());
    REQUIRE(M.in == n);
    REQUIRE(M.out == n);
    for (long long x = 0; x < (1LL << n); ++x)
      for (long long y = 0; y < (1LL << n); ++y)
        CHECK(M.m(y, x) == (y == permute_word(src, x) ? 1 : 0));
  }
  CHECK(eval(rotate_front_to_back(3)).m == eval(permutation({1, 2, 0})).m);
}

TEST_CASE("and_broadcast conjoins one wire into each of k") {
  SubStochMatrix M = eval(and_broadcast(2));
  REQUIRE(M.in == 3);
  REQUIRE(M.out == 2);
  for (int x = 0; x < 2; ++x)
    for (int y1 = 0; y1 < 2; ++y1)
      for (int y2 = 0; y2 < 2; ++y2) {
        long long in = 4 * x + 2 * y1 + y2;
        long long out = 2 * (x & y1) + (x & y2);
        CHECK(M.m(out, in) == 1);
      }
}

TEST_CASE("all_n emits the one-hot code of its input") {
  for (int n = 0; n <= 3; ++n) {
    SubStochMatrix M = eval(all_n(n));
    REQUIRE(M.in == n);
    REQUIRE(M.out == (1 << n));
    for (long long x = 0; x < (1LL << n); ++x)
      for (long long y = 0; y < (1LL << (1 << n)); ++y)
        CHECK(M.m(y, x) == (y == (1LL << x) ? 1 : 0));
  }
}

TEST_CASE("one_hot_cascade draws the slot's parameter") {
  std::vector<Rat> params = {rat(1, 3), rat(1, 5), rat(0), rat(1)};
  int K = static_cast<int>(params.size());
  SubStochMatrix M = eval(one_hot_cascade(params));
  REQUIRE(M.in == K);
  REQUIRE(M.out == 1);
  for (int j = 1; j <= K; ++j) {
    long long hot = 1LL << (K - j);
    CHECK(M.m(1, hot) == params[j - 1]);
    CHECK(M.m(0, hot) == 1 - params[j - 1]);
  }
}

TEST_CASE("failure shapes have all-zero matrices") {
  SubStochMatrix fb = eval(flip_bot());
  REQUIRE(fb.in == 0);
  REQUIRE(fb.out == 1);
  CHECK(fb.m(0, 0) == 0);
  CHECK(fb.m(1, 0) == 0);

  SubStochMatrix fc = eval(failure_circuit(2, 1));
  REQUIRE(fc.in == 2);
  REQUIRE(fc.out == 1);
  for (long long x = 0; x < 4; ++x)
    for (long long y = 0; y < 2; ++y) CHECK(fc.m(y, x) == 0);
}

TEST_CASE("bundles act wire by wire") {
  SubStochMatrix id3 = eval(identity_bundle(3));
  for (long long x = 0; x < 8; ++x)
    for (long long y = 0; y < 8; ++y) CHECK(id3.m(y, x) == (x == y ? 1 : 0));

  SubStochMatrix del2 = eval(discard_bundle(2));
  REQUIRE(del2.out == 0);
  for (long long x = 0; x < 4; ++x) CHECK(del2.m(0, x) == 1);

  CHECK(is_function_with(not_bundle(2), +[](long long x) -> long long {
          return ~x & 3;
        }));
}

TEST_CASE("paired conditioning keeps equal pairs") {
  CHECK(flatten(cond_n(1)) == Circuit::cond());
  SubStochMatrix M = eval(cond_n(2));
  REQUIRE(M.in == 4);
  REQUIRE(M.out == 2);
  for (long long a = 0; a < 4; ++a)
    for (long long b = 0; b < 4; ++b)
      for (long long y = 0; y < 4; ++y)
        CHECK(M.m(y, 4 * a + b) == ((a == b && y == a) ? 1 : 0));
}
