#include "doctest.h"

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <vector>

#include "topicfuse/rng.hpp"

using namespace topicfuse;

TEST_CASE("the generator reproduces the published splitmix64 sequence") {
  Rng rng(0);
  CHECK(rng.next_u64() == 16294208416658607535ULL);
  CHECK(rng.next_u64() == 7960286522194355700ULL);
  CHECK(rng.next_u64() == 487617019471545679ULL);

  Rng rng42(42);
  CHECK(rng42.next_u64() == 13679457532755275413ULL);
  CHECK(rng42.next_u64() == 2949826092126892291ULL);
}

TEST_CASE("equal seeds give equal streams") {
  Rng a(20240817), b(20240817);
  for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("uniform stays in the half-open unit interval") {
  Rng rng(7);
  double sum = 0.0;
  for (int i = 0; i < 20000; ++i) {
    double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    sum += u;
  }
  double mean = sum / 20000.0;
  CHECK(mean > 0.48);
  CHECK(mean < 0.52);

  for (int i = 0; i < 1000; ++i) {
    double u = rng.uniform(-2.0, 3.0);
    CHECK(u >= -2.0);
    CHECK(u < 3.0);
  }
}

TEST_CASE("below covers its range without escaping it") {
  Rng rng(99);
  std::vector<int> counts(10, 0);
  for (int i = 0; i < 5000; ++i) {
    std::uint64_t v = rng.below(10);
    REQUIRE(v < 10);
    ++counts[static_cast<size_t>(v)];
  }
  for (int c : counts) CHECK(c > 300);  // roughly uniform, expected 500 each
  CHECK(rng.below(1) == 0);
}

TEST_CASE("shuffle permutes without losing elements") {
  Rng rng(5);
  std::vector<int> v(100);
  std::iota(v.begin(), v.end(), 0);
  std::vector<int> orig = v;
  rng.shuffle(v);
  CHECK(v != orig);  // astronomically unlikely to be identity, and seeded
  std::sort(v.begin(), v.end());
  CHECK(v == orig);
}

TEST_CASE("forked streams are distinct and reproducible") {
  Rng base(123);
  Rng f1 = base.fork(1);
  Rng f2 = base.fork(2);
  Rng f1_again = base.fork(1);
  bool same_as_other = true;
  for (int i = 0; i < 64; ++i) {
    std::uint64_t a = f1.next_u64();
    if (a != f2.next_u64()) same_as_other = false;
    CHECK(a == f1_again.next_u64());
  }
  CHECK_FALSE(same_as_other);
}
