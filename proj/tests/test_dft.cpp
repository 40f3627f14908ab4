#include <catch2/catch_amalgamated.hpp>

#include "aliasbench/dft.hpp"
#include "oracles.hpp"

using namespace aliasbench;
using Catch::Approx;

TEST_CASE("exact-bin cosine concentrates on one bin", "[dft]") {
  dsp::Signal x;
  x.sample_rate = 17;
  const std::size_t n = 17;
  for (std::size_t i = 0; i < n; ++i)
    x.samples.push_back(std::cos(2.0 * M_PI * 3.0 * static_cast<double>(i) / static_cast<double>(n)));
  const auto hs = dsp::dft_power_half(x);
  REQUIRE(hs.bins() == 9);
  REQUIRE(hs.dft_length == n);
  const double peak = hs.magnitudes_sq[3];
  REQUIRE(peak == Approx(17.0 * 17.0 / 4.0).epsilon(1e-12));
  for (std::size_t k = 0; k < hs.bins(); ++k) {
    if (k == 3) continue;
    REQUIRE(hs.magnitudes_sq[k] < 1e-18 * peak);
  }
}

TEST_CASE("constant signal is pure DC", "[dft]") {
  dsp::Signal x;
  x.sample_rate = 101;
  x.samples.assign(101, 1.0);
  const auto hs = dsp::dft_power_half(x);
  REQUIRE(hs.magnitudes_sq[0] == Approx(10201.0).epsilon(1e-12));
  for (std::size_t k = 1; k < hs.bins(); ++k) REQUIRE(hs.magnitudes_sq[k] < 1e-16 * 10201.0);
}

TEST_CASE("chirp transform matches direct summation on prime lengths", "[dft]") {
  for (std::size_t n : {17u, 97u, 101u, 997u}) {
    const auto x = oracles::random_samples(n, 1000 + n);
    dsp::Signal s;
    s.sample_rate = 48000;
    s.samples = x;
    const auto mine = dsp::dft_power_half(s);
    const auto ref = oracles::direct_dft_power_half(x);
    REQUIRE(mine.bins() == ref.size());
    for (std::size_t k = 0; k < ref.size(); ++k) {
      const double err = std::abs(mine.magnitudes_sq[k] - ref[k]);
      REQUIRE(err <= 1e-9 * std::max(ref[k], 1e-30));
    }
  }
}

TEST_CASE("power-of-two path agrees with direct summation", "[dft]") {
  const std::size_t n = 256;
  const auto x = oracles::random_samples(n, 77);
  dsp::Signal s;
  s.sample_rate = 48000;
  s.samples = x;
  const auto mine = dsp::dft_power_half(s);
  const auto ref = oracles::direct_dft_power_half(x);
  REQUIRE(mine.bins() == n / 2);  // bins 0 .. (N-1)/2 = 127
  for (std::size_t k = 0; k < ref.size(); ++k)
    REQUIRE(std::abs(mine.magnitudes_sq[k] - ref[k]) <= 1e-9 * std::max(ref[k], 1e-30));
}

TEST_CASE("Parseval holds on the half spectrum", "[dft]") {
  SECTION("odd lengths need no Nyquist term") {
    for (std::size_t n : {101u, 997u, 4097u}) {
      const auto s = oracles::random_signal(n, 2000 + n);
      double time_energy = 0.0;
      for (double v : s.samples) time_energy += v * v;
      const auto hs = dsp::dft_power_half(s);
      double spec = hs.magnitudes_sq[0];
      for (std::size_t k = 1; k < hs.bins(); ++k) spec += 2.0 * hs.magnitudes_sq[k];
      REQUIRE(spec == Approx(time_energy * static_cast<double>(n)).epsilon(1e-9));
    }
  }
  SECTION("even lengths add the Nyquist bin once") {
    const std::size_t n = 1024;
    const auto s = oracles::random_signal(n, 31);
    double time_energy = 0.0;
    for (double v : s.samples) time_energy += v * v;
    const auto hs = dsp::dft_power_half(s);  // bins 0 .. 511, no Nyquist
    double spec = hs.magnitudes_sq[0];
    for (std::size_t k = 1; k < hs.bins(); ++k) spec += 2.0 * hs.magnitudes_sq[k];
    spec += oracles::direct_bin_power(s.samples, n / 2);
    REQUIRE(spec == Approx(time_energy * static_cast<double>(n)).epsilon(1e-9));
  }
}

TEST_CASE("plan length mismatches are rejected", "[dft]") {
  dsp::DftPlan plan(32);
  std::vector<double> wrong(31, 0.0);
  REQUIRE_THROWS_AS(plan.transform(wrong), Error);
}
