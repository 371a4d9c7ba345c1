#include <doctest.h>

#include <cmath>
#include <set>

#include "eos/rng.hpp"

using namespace eos;

TEST_CASE("splitmix64 known-answer vectors") {
  // Reference outputs of the standard SplitMix64 stream from seed 0.
  Rng rng(0);
  CHECK(rng.next_u64() == 0xe220a8397b1dcdafULL);
  CHECK(rng.next_u64() == 0x6e789e6aa1b965f4ULL);
  CHECK(rng.next_u64() == 0x06c45d188009454fULL);
  CHECK(rng.next_u64() == 0xf88bb8a8724c81ecULL);
}

TEST_CASE("unit deviates live strictly inside (0,1)") {
  Rng rng(42);
  bool inside = true;
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.next_unit();
    if (!(u > 0.0 && u < 1.0)) inside = false;
  }
  CHECK(inside);
}

TEST_CASE("normal deviates have the right first two moments") {
  Rng rng(2024);
  const int k = 200000;
  double sum = 0, sum2 = 0;
  for (int i = 0; i < k; ++i) {
    const double z = rng.next_normal();
    sum += z;
    sum2 += z * z;
  }
  const double mean = sum / k;
  const double var = sum2 / k - mean * mean;
  CHECK(std::abs(mean) < 4.0 / std::sqrt(double(k)));
  CHECK(std::abs(var - 1.0) < 4.0 * std::sqrt(2.0 / k));
}

TEST_CASE("streams are deterministic in the seed") {
  Rng a(123456789), b(123456789), c(987654321);
  bool all_equal = true, any_diff = false;
  for (int i = 0; i < 1000; ++i) {
    const uint64_t x = a.next_u64();
    if (x != b.next_u64()) all_equal = false;
    if (x != c.next_u64()) any_diff = true;
  }
  CHECK(all_equal);
  CHECK(any_diff);
}

TEST_CASE("next_below is in range and hits every residue") {
  Rng rng(7);
  std::set<uint64_t> seen;
  for (int i = 0; i < 1000; ++i) {
    const uint64_t x = rng.next_below(7);
    CHECK(x < 7);
    seen.insert(x);
  }
  CHECK(seen.size() == 7);
}

TEST_CASE("fnv1a64 known answers") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
}

TEST_CASE("derive_seed separates labels and parents") {
  const uint64_t a = derive_seed(1, "alpha");
  const uint64_t b = derive_seed(1, "beta");
  const uint64_t c = derive_seed(2, "alpha");
  CHECK(a != b);
  CHECK(a != c);
  CHECK(derive_seed(1, "alpha") == a);
}

TEST_CASE("format_beta canonical forms") {
  CHECK(format_beta(0.5) == "0.5");
  CHECK(format_beta(1.0) == "1");
  CHECK(format_beta(2.0) == "2");
  CHECK(format_beta(std::numeric_limits<double>::infinity()) == "inf");
  // Shortest form must round-trip exactly.
  const double x = 0.1 + 0.2;
  CHECK(std::stod(format_beta(x)) == x);
}

TEST_CASE("replication seeds are distinct across coordinates") {
  const uint64_t base = replication_seed(1, "gauss-wide", 100, 1.0, 0);
  CHECK(replication_seed(1, "gauss-wide", 100, 1.0, 0) == base);
  CHECK(replication_seed(1, "gauss-wide", 100, 1.0, 1) != base);
  CHECK(replication_seed(1, "gauss-wide", 400, 1.0, 0) != base);
  CHECK(replication_seed(1, "gauss-wide", 100, 2.0, 0) != base);
  CHECK(replication_seed(1, "gauss-match", 100, 1.0, 0) != base);
  CHECK(replication_seed(2, "gauss-wide", 100, 1.0, 0) != base);
  const uint64_t inf_seed = replication_seed(
      1, "gauss-wide", 100, std::numeric_limits<double>::infinity(), 0);
  CHECK(inf_seed != base);
}
