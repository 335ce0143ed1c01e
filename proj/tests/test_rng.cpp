#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>
#include <vector>

#include "meshprox/rng.hpp"

using namespace meshprox;

TEST_CASE("fnv1a matches published reference digests") {
  // Offset basis and the canonical single-byte check value.
  CHECK(fnv1a_64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a_64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a_64("foobar") == 0x85944171f73967e8ULL);
}

TEST_CASE("seed derivation is stable and stream-separated") {
  const auto s1 = derive_seed(42, "coord", 0);
  CHECK(s1 == derive_seed(42, "coord", 0));
  CHECK(s1 != derive_seed(42, "coord", 1));
  CHECK(s1 != derive_seed(42, "workload", 0));
  CHECK(s1 != derive_seed(43, "coord", 0));
}

TEST_CASE("streams with identical names replay identical draws") {
  auto a = make_stream(7, "x", 3);
  auto b = make_stream(7, "x", 3);
  for (int i = 0; i < 100; ++i) CHECK(a() == b());
}

TEST_CASE("distinct streams decorrelate") {
  auto a = make_stream(7, "x", 0);
  auto b = make_stream(7, "y", 0);
  int same = 0;
  for (int i = 0; i < 1000; ++i) {
    if (a() == b()) ++same;
  }
  CHECK(same == 0);
}

TEST_CASE("uniform_real stays in range and fills it") {
  auto g = make_stream(11, "u");
  double lo_seen = 1e18;
  double hi_seen = -1e18;
  for (int i = 0; i < 5000; ++i) {
    const double v = uniform_real(g, 2.0, 5.0);
    CHECK(v >= 2.0);
    CHECK(v < 5.0);
    lo_seen = std::min(lo_seen, v);
    hi_seen = std::max(hi_seen, v);
  }
  CHECK(lo_seen < 2.1);
  CHECK(hi_seen > 4.9);
}

TEST_CASE("uniform_index covers all buckets") {
  auto g = make_stream(13, "idx");
  std::set<std::size_t> seen;
  for (int i = 0; i < 1000; ++i) {
    const std::size_t v = uniform_index(g, 7);
    CHECK(v < 7);
    seen.insert(v);
  }
  CHECK(seen.size() == 7);
}

TEST_CASE("exponential gaps have the requested mean") {
  auto g = make_stream(17, "exp");
  double sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double v = exponential_gap(g, 0.25);
    CHECK(v >= 0.0);
    sum += v;
  }
  CHECK(sum / n == doctest::Approx(0.25).epsilon(0.02));
}
