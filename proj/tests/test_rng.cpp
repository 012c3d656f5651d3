#include <doctest.h>

#include <cmath>

#include "crtrial/rng.hpp"

using namespace crtrial;

// Known answers taken from numpy.random.Philox.
TEST_CASE("philox block function matches reference outputs") {
  Philox4x64 g(0, 0);
  const std::uint64_t expected[] = {0x02f4ba6408e4d89bULL, 0x3dd62b0b9ca8c5b2ULL, 0x1c8667a55d902e79ULL,
                                    0x907d7a052fd5b4dcULL, 0x809bf322883987c3ULL, 0x471128b9e807f7ddULL,
                                    0xf250ba0dbec065b7ULL, 0xfc6ed66767a457bcULL};
  for (auto e : expected) CHECK(g() == e);

  const auto b8 = Philox4x64::block({8, 0, 0, 0}, {0x0123456789abcdefULL, 42});
  const auto b9 = Philox4x64::block({9, 0, 0, 0}, {0x0123456789abcdefULL, 42});
  CHECK(b8[0] == 0xea7387fb3bc181b2ULL);
  CHECK(b8[1] == 0xa989bc540b23b6feULL);
  CHECK(b8[2] == 0x506d3cc4ceae13feULL);
  CHECK(b8[3] == 0xdf396859a78a9a8bULL);
  CHECK(b9[0] == 0x1cc4d28581113a1fULL);
  CHECK(b9[1] == 0x9cbdc47afe24de6cULL);
  CHECK(b9[2] == 0xae76fec7326721feULL);
  CHECK(b9[3] == 0xf3a207c3c3e2d0f1ULL);
}

TEST_CASE("streams are distinct and reproducible") {
  Philox4x64 a(7, 1), b(7, 1), c(7, 2);
  for (int i = 0; i < 10; ++i) {
    const auto x = a();
    CHECK(x == b());
    CHECK(x != c());
  }
}

TEST_CASE("derived draws") {
  Philox4x64 g(123, 0);
  double sum = 0.0, sum_exp = 0.0;
  const int n = 200000;
  long counts[6] = {};
  for (int i = 0; i < n; ++i) {
    const double u = g.uniform_open0();
    REQUIRE(u > 0.0);
    REQUIRE(u <= 1.0);
    sum += u;
    sum_exp += g.exponential(2.0);
    ++counts[g.below(6)];
  }
  CHECK(sum / n == doctest::Approx(0.5).epsilon(0.01));
  CHECK(sum_exp / n == doctest::Approx(0.5).epsilon(0.01));
  for (long c : counts) CHECK(std::abs(c - n / 6.0) < 5 * std::sqrt(n / 6.0));
}
