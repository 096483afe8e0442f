#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "skewlink/rng.hpp"

#include <cmath>
#include <cstdint>
#include <vector>

using namespace skewlink;

namespace {

// Raw Philox4x32-10 of a given counter/key, reproduced through the public
// interface by reading the first block of a stream.
std::vector<std::uint32_t> first_block(std::uint64_t seed, std::uint64_t stream) {
  CounterRng rng(seed, stream);
  return {rng.next_u32(), rng.next_u32(), rng.next_u32(), rng.next_u32()};
}

}  // namespace

TEST_CASE("philox known-answer vectors") {
  // Reference vectors for the 10-round 4x32 configuration.
  const auto zero = first_block(0, 0);
  CHECK(zero[0] == 0x6627e8d5u);
  CHECK(zero[1] == 0xe169c58du);
  CHECK(zero[2] == 0xbc57ac4cu);
  CHECK(zero[3] == 0x9b00dbd8u);

  const auto pi = first_block(0x299f31d0a4093822ull, 0x0370734413198a2eull);
  // counter low words are zero in our layout, so this exercises key+stream
  // placement rather than the published pi-digit vector.
  CHECK(pi[0] != zero[0]);
}

TEST_CASE("streams are disjoint and reproducible") {
  CounterRng a(42, 0), b(42, 0), c(42, 1);
  for (int i = 0; i < 1000; ++i) {
    const auto x = a.next_u64();
    CHECK(x == b.next_u64());
    CHECK(x != c.next_u64());
  }
  CounterRng base(7, 0);
  CounterRng s3 = base.substream(3);
  CounterRng s3b = CounterRng(7, 3);
  for (int i = 0; i < 100; ++i) CHECK(s3.next_u64() == s3b.next_u64());
}

TEST_CASE("uniform doubles live strictly inside (0,1)") {
  CounterRng rng(1, 0);
  double mean = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.next_double();
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
    mean += u;
  }
  mean /= n;
  CHECK(std::fabs(mean - 0.5) < 0.005);
}

TEST_CASE("normal draws have the right first moments") {
  CounterRng rng(11, 0);
  double m1 = 0.0, m2 = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double z = normal_draw(rng);
    m1 += z;
    m2 += z * z;
  }
  m1 /= n;
  m2 /= n;
  CHECK(std::fabs(m1) < 0.01);
  CHECK(std::fabs(m2 - 1.0) < 0.02);
}

TEST_CASE("gamma draws by inversion match the target mean") {
  CounterRng rng(13, 0);
  const double shape = 2.5, scale = 2.0;
  double mean = 0.0;
  const int n = 50000;
  for (int i = 0; i < n; ++i) mean += gamma_draw(rng, shape, scale);
  mean /= n;
  CHECK(std::fabs(mean - shape * scale) < 0.1);
}
