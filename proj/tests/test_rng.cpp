#include <doctest.h>

#include <set>

#include "hclass/rng.hpp"

using namespace hclass;

TEST_CASE("splitmix sequence is a pure function of the seed") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  // Known first outputs for seed 0 (finalizer applied to the incremented
  // counter), frozen so a refactor cannot silently change every split.
  Rng zero(0);
  CHECK(zero.next_u64() == 0xe220a8397b1dcdafull);
  CHECK(zero.next_u64() == 0x6e789e6aa1b965f4ull);
  CHECK(zero.next_u64() == 0x06c45d188009454full);
}

TEST_CASE("named streams differ and reproduce") {
  Rng a = Rng::stream(7, "alpha");
  Rng b = Rng::stream(7, "beta");
  Rng a2 = Rng::stream(7, "alpha");
  CHECK(a.next_u64() != b.next_u64());
  CHECK(Rng::stream(7, "alpha").next_u64() == a2.next_u64());
}

TEST_CASE("below is in range and covers values") {
  Rng rng(3);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 2000; ++i) {
    const std::uint64_t v = rng.below(7);
    CHECK(v < 7);
    seen.insert(v);
  }
  CHECK(seen.size() == 7);
}

TEST_CASE("sample_indices returns ascending distinct indices") {
  Rng rng(11);
  auto pick = rng.sample_indices(20, 8);
  CHECK(pick.size() == 8);
  for (std::size_t i = 1; i < pick.size(); ++i) CHECK(pick[i - 1] < pick[i]);
  for (std::size_t v : pick) CHECK(v < 20);
  CHECK(rng.sample_indices(5, 9).size() == 5);
}

TEST_CASE("normal draws have roughly standard moments") {
  Rng rng(5);
  double sum = 0.0, sq = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double v = rng.next_normal();
    sum += v;
    sq += v * v;
  }
  const double mean = sum / n;
  const double var = sq / n - mean * mean;
  CHECK(std::abs(mean) < 0.03);
  CHECK(std::abs(var - 1.0) < 0.05);
}
