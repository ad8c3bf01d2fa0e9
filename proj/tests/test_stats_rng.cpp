#include <cmath>
#include <set>

#include "doctest.h"
#include "precis/errors.hpp"
#include "precis/rng.hpp"
#include "precis/stats.hpp"

using namespace precis;

namespace {
#define CHECK_NEAR(a, b, tol) CHECK(std::abs((a) - (b)) <= (tol))
}

TEST_SUITE("stats-rng") {

TEST_CASE("normal quantile against high-precision reference values") {
  CHECK(normal_quantile(0.5) == 0.0);
  CHECK_NEAR(normal_quantile(0.975), 1.959963984540054, 1e-8);
  CHECK_NEAR(normal_quantile(0.95), 1.6448536269514722, 1e-8);
  CHECK_NEAR(normal_quantile(0.99), 2.3263478740408408, 1e-8);
  CHECK_NEAR(normal_quantile(0.84), 0.9944578832097532, 1e-8);
  CHECK_NEAR(normal_quantile(0.1), -1.2815515655446004, 1e-8);
  CHECK_NEAR(normal_quantile(0.025), -1.959963984540054, 1e-8);
}

TEST_CASE("quantile and cdf are inverse to each other") {
  for (double p : {1e-9, 1e-4, 0.01, 0.2, 0.5, 0.77, 0.999, 1.0 - 1e-7}) {
    const double x = normal_quantile(p);
    CHECK_NEAR(normal_cdf(x), p, 1e-9);
  }
  // tail symmetry
  for (double p : {1e-6, 0.01, 0.3}) {
    CHECK_NEAR(normal_quantile(p) + normal_quantile(1.0 - p), 0.0, 1e-9);
  }
}

TEST_CASE("quantile rejects endpoints") {
  CHECK_THROWS_AS(normal_quantile(0.0), InvalidAlpha);
  CHECK_THROWS_AS(normal_quantile(1.0), InvalidAlpha);
  CHECK_THROWS_AS(normal_quantile(-0.3), InvalidAlpha);
}

TEST_CASE("two-sided z values") {
  CHECK_NEAR(two_sided_z(0.05), 1.959963984540054, 1e-8);
  CHECK_NEAR(two_sided_z(0.32), 0.9944578832097532, 1e-8);
  CHECK_THROWS_AS(two_sided_z(0.0), InvalidAlpha);
  CHECK_THROWS_AS(two_sided_z(1.0), InvalidAlpha);
}

TEST_CASE("splitmix stream matches the reference sequence") {
  Rng rng(0);
  CHECK(rng.next_u64() == 0xe220a8397b1dcdafull);
  CHECK(rng.next_u64() == 0x6e789e6aa1b965f4ull);
  CHECK(rng.next_u64() == 0x06c45d188009454full);
}

TEST_CASE("same seed gives the same stream") {
  Rng a(42), b(42), c(43);
  bool all_equal = true, any_diff = false;
  for (int i = 0; i < 100; ++i) {
    const auto va = a.next_u64();
    all_equal = all_equal && va == b.next_u64();
    any_diff = any_diff || va != c.next_u64();
  }
  CHECK(all_equal);
  CHECK(any_diff);
}

TEST_CASE("uniforms live strictly inside (0,1)") {
  Rng rng(7);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.next_uniform();
    CHECK(u > 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("normal draws have the right first two moments") {
  Rng rng(123);
  const int n = 200000;
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.next_normal();
    sum += z;
    sumsq += z * z;
  }
  const double mean = sum / n;
  const double var = sumsq / n - mean * mean;
  CHECK_NEAR(mean, 0.0, 0.01);
  CHECK_NEAR(var, 1.0, 0.02);
}

TEST_CASE("next_below stays within bounds and covers small ranges") {
  Rng rng(9);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 1000; ++i) {
    const auto v = rng.next_below(6);
    CHECK(v < 6);
    seen.insert(v);
  }
  CHECK(seen.size() == 6);
}

TEST_CASE("seed mixing separates replicates and salts") {
  std::set<std::uint64_t> seeds;
  for (int r = 0; r < 1000; ++r) seeds.insert(mix_seed(1, r, 0xda7a));
  CHECK(seeds.size() == 1000);
  CHECK(mix_seed(1, 0, 0xda7a) != mix_seed(1, 0, 0x5a1d));
  CHECK(mix_seed(1, 0, 0xda7a) != mix_seed(2, 0, 0xda7a));
  CHECK(mix_seed(1, 0, 0xda7a) == mix_seed(1, 0, 0xda7a));
}

}  // TEST_SUITE
