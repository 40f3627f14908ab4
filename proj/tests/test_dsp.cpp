#include <catch2/catch_amalgamated.hpp>

#include "aliasbench/signal.hpp"
#include "oracles.hpp"

using namespace aliasbench;
using Catch::Approx;

TEST_CASE("preemphasis matches the closed form", "[dsp]") {
  dsp::Signal x;
  x.sample_rate = 48000;

  SECTION("unit impulse gives the filter's impulse response") {
    x.samples = {1.0, 0.0, 0.0, 0.0};
    const auto y = dsp::preemphasis(x);
    REQUIRE(y.samples == std::vector<double>{1.0, -0.95, 0.0, 0.0});
    REQUIRE(y.sample_rate == x.sample_rate);
  }

  SECTION("constant input settles to 1 - 0.95") {
    x.samples = {1.0, 1.0, 1.0};
    const auto y = dsp::preemphasis(x);
    REQUIRE(y.samples[0] == 1.0);
    REQUIRE(y.samples[1] == Approx(0.05).margin(1e-15));
    REQUIRE(y.samples[2] == Approx(0.05).margin(1e-15));
  }

  SECTION("zero in, zero out") {
    x.samples.assign(16, 0.0);
    for (double v : dsp::preemphasis(x).samples) REQUIRE(v == 0.0);
  }

  SECTION("empty input is rejected") {
    REQUIRE_THROWS_MATCHES(dsp::preemphasis(x), Error, Catch::Matchers::Predicate<Error>([](const Error& e) {
                             return e.code() == Errc::invalid_argument;
                           }));
  }
}

TEST_CASE("preemphasis is linear", "[dsp]") {
  const auto xa = oracles::random_signal(257, 11);
  const auto xb = oracles::random_signal(257, 12);
  const double a = 1.7, b = -0.3;
  dsp::Signal mix;
  mix.sample_rate = xa.sample_rate;
  for (std::size_t i = 0; i < xa.size(); ++i)
    mix.samples.push_back(a * xa.samples[i] + b * xb.samples[i]);
  const auto lhs = dsp::preemphasis(mix);
  const auto pa = dsp::preemphasis(xa);
  const auto pb = dsp::preemphasis(xb);
  for (std::size_t i = 0; i < lhs.size(); ++i)
    REQUIRE(lhs.samples[i] == Approx(a * pa.samples[i] + b * pb.samples[i]).margin(1e-12));
}

TEST_CASE("generate_sine produces a bin-exact tone", "[dsp]") {
  SECTION("one second at the standard plan is exactly 1249 Hz") {
    const auto s = dsp::generate_sine(48017, 1249, 48017, 1.0);
    REQUIRE(s.size() == 48017);
    REQUIRE(s.sample_rate == 48017);
    REQUIRE(s.samples[0] == 0.0);
    // 1249 cycles per 48017 samples at 48017 Hz -> 1249 Hz
    const std::size_t quarter = 9;  // not a zero crossing
    REQUIRE(s.samples[quarter] == Approx(std::sin(2.0 * M_PI * 1249.0 * 9.0 / 48017.0)).margin(1e-12));
  }

  SECTION("amplitude bounds the samples") {
    const auto s = dsp::generate_sine(17, 3, 17, 0.5);
    for (double v : s.samples) REQUIRE(std::abs(v) <= 0.5);
  }

  SECTION("k0 out of range is rejected") {
    REQUIRE_THROWS_AS(dsp::generate_sine(17, 9, 17, 1.0), Error);  // (N-1)/2 = 8
    REQUIRE_THROWS_AS(dsp::generate_sine(17, 0, 17, 1.0), Error);
  }
}

TEST_CASE("slice bounds are checked", "[dsp]") {
  const auto s = oracles::random_signal(32, 5);
  REQUIRE(dsp::slice(s, 4, 8).samples[0] == s.samples[4]);
  REQUIRE_THROWS_AS(dsp::slice(s, 30, 8), Error);
}
