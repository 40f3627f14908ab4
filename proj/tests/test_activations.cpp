#include <catch2/catch_amalgamated.hpp>

#include "aliasbench/activations.hpp"
#include "aliasbench/rng.hpp"

using namespace aliasbench;
using namespace aliasbench::activations;
using Catch::Approx;

TEST_CASE("origin and landmark values", "[activations]") {
  REQUIRE(eval(make_spec(Kind::snake, 1.0), M_PI) == Approx(M_PI).margin(1e-15));
  REQUIRE(eval(make_spec(Kind::custom_tanh, 2.0), 0.0) == 0.0);
  REQUIRE(eval(make_spec(Kind::swish), 0.0) == 0.0);
  REQUIRE(eval(make_spec(Kind::gaussian), 0.0) == 1.0);
  REQUIRE(eval(make_spec(Kind::relu_squared, 1.0), 2.0) == 4.0);
  REQUIRE(eval(make_spec(Kind::relu_squared, 1.0), -3.0) == 0.0);
  REQUIRE(eval(make_spec(Kind::custom_tanh, 2.0), 2.0) == Approx(0.7615941559557649).epsilon(1e-12));
  REQUIRE(eval(make_spec(Kind::hardtanh), 1.5) == 1.0);
  REQUIRE(eval(make_spec(Kind::hardtanh), -1.5) == -1.0);
  REQUIRE(eval(make_spec(Kind::identity), 0.37) == 0.37);
}

TEST_CASE("snake keeps unit slope at the origin", "[activations]") {
  for (double alpha : {0.5, 1.0, 8.0}) REQUIRE(grad(make_spec(Kind::snake, alpha), 0.0) == 1.0);
}

TEST_CASE("custom tanh slope at origin is 1/alpha", "[activations]") {
  for (double alpha : {0.5, 1.0, 2.0, 32.0})
    REQUIRE(grad(make_spec(Kind::custom_tanh, alpha), 0.0) == Approx(1.0 / alpha).epsilon(1e-14));
}

TEST_CASE("custom tanh output stays inside (-1, 1)", "[activations]") {
  Rng rng(21);
  // strict bound away from float saturation (tanh rounds to 1.0 past ~19)
  for (int i = 0; i < 2000; ++i) {
    const double alpha = std::exp(rng.uniform(std::log(0.5), std::log(32.0)));
    const double x = rng.uniform(-4.0, 4.0);
    const double v = eval(make_spec(Kind::custom_tanh, alpha), x);
    REQUIRE(v > -1.0);
    REQUIRE(v < 1.0);
  }
  // saturated regime still never escapes [-1, 1]
  REQUIRE(std::abs(eval(make_spec(Kind::custom_tanh, 0.1), 500.0)) <= 1.0);
  REQUIRE(std::abs(eval(make_spec(Kind::custom_tanh, 0.1), -500.0)) <= 1.0);
}

TEST_CASE("odd functions are odd", "[activations]") {
  Rng rng(22);
  for (Kind k : {Kind::custom_tanh, Kind::softsign, Kind::hardtanh}) {
    for (int i = 0; i < 200; ++i) {
      const double x = rng.uniform(-4.0, 4.0);
      const auto spec = make_spec(k, 1.7);
      REQUIRE(eval(spec, -x) == Approx(-eval(spec, x)).margin(1e-15));
    }
  }
}

TEST_CASE("gradients match finite differences across the catalog", "[activations]") {
  Rng rng(23);
  const double h = 1e-5;
  int checked = 0;
  while (checked < 1000) {
    const Kind kind = kCatalog[rng.index(kCatalog.size())];
    const double alpha = std::exp(rng.uniform(std::log(0.1), std::log(32.0)));
    const auto spec = make_spec(kind, alpha);
    const double x = rng.uniform(-4.0, 4.0);
    // stay away from the known kinks so the central difference is valid
    if ((kind == Kind::relu_squared_dip || kind == Kind::prelu || kind == Kind::selu ||
         kind == Kind::relu_squared || kind == Kind::elu) &&
        std::abs(x) < 1e-4)
      continue;
    if (kind == Kind::hardtanh && (std::abs(x - 1.0) < 1e-4 || std::abs(x + 1.0) < 1e-4)) continue;
    const double fd = (eval(spec, x + h) - eval(spec, x - h)) / (2.0 * h);
    const double an = grad(spec, x);
    const double err = std::abs(fd - an);
    REQUIRE((err <= 1e-6 || err <= 1e-4 * std::max(std::abs(fd), std::abs(an))));
    ++checked;
  }
}

TEST_CASE("right-hand derivatives at the kinks", "[activations]") {
  REQUIRE(grad(make_spec(Kind::hardtanh), -1.0) == 1.0);
  REQUIRE(grad(make_spec(Kind::hardtanh), 1.0) == 0.0);
  REQUIRE(grad(make_spec(Kind::prelu), 0.0) == 1.0);
  REQUIRE(grad(make_spec(Kind::relu_squared, 2.0), 0.0) == 0.0);
  REQUIRE(grad(make_spec(Kind::relu_squared_dip, 2.0), 0.0) == 0.0);
  REQUIRE(eval(make_spec(Kind::relu_squared_dip, 2.0), 0.0) == 0.0);
  REQUIRE(grad(make_spec(Kind::selu), 0.0) == kSeluLambda);
}

TEST_CASE("gated combinator multiplies by the sigmoid gate", "[activations]") {
  const auto spec = make_spec(Kind::custom_tanh, 1.0, true);
  auto plain = spec;
  plain.gated = false;

  SECTION("saturated gate passes the activation through") {
    REQUIRE(gated_eval(0.8, 30.0, spec) == Approx(eval(plain, 0.8)).margin(1e-12));
  }
  SECTION("zero gate halves it") {
    REQUIRE(gated_eval(0.8, 0.0, spec) == 0.5 * eval(plain, 0.8));
  }
  SECTION("odd-through-origin activations vanish at a = 0") {
    for (Kind k : {Kind::custom_tanh, Kind::snake, Kind::swish})
      REQUIRE(gated_eval(0.0, 1.3, make_spec(k, 1.0, true)) == 0.0);
  }
  SECTION("non-gated spec is rejected") { REQUIRE_THROWS_AS(gated_eval(0.1, 0.1, plain), Error); }
}

TEST_CASE("labels round-trip for the sweep grid", "[activations]") {
  const std::vector<double> grid = {0.1, 0.2, 0.5, 1, 2, 4, 8, 16, 32};
  for (Kind k : kCatalog) {
    for (bool gated : {false, true}) {
      if (!uses_alpha(k)) {
        const auto spec = make_spec(k, 1.0, gated);
        REQUIRE(parse(format(spec)) == spec);
        continue;
      }
      for (double alpha : grid) {
        const auto spec = make_spec(k, alpha, gated);
        REQUIRE(parse(format(spec)) == spec);
      }
    }
  }
}

TEST_CASE("label grammar matches the published naming", "[activations]") {
  REQUIRE(format(make_spec(Kind::custom_tanh, 2.0)) == "False_CustomTanh_2");
  REQUIRE(format(make_spec(Kind::custom_tanh, 0.5, true)) == "True_CustomTanh_0.5");
  REQUIRE(format(make_spec(Kind::selu, 1.0, true)) == "True_SELU");
  REQUIRE(format(make_spec(Kind::snake, 8.0)) == "False_Snake_8");
  REQUIRE(format(make_spec(Kind::relu_squared, 0.1)) == "False_ReLUSquared_0.1");

  REQUIRE(parse("False_Hardtanh") == make_spec(Kind::hardtanh));
  REQUIRE(parse("True_Snake_2") == make_spec(Kind::snake, 2.0, true));
  REQUIRE(parse("False_Snake") == make_spec(Kind::snake, 1.0, false));

  REQUIRE_THROWS_AS(parse("Maybe_Snake_2"), Error);
  REQUIRE_THROWS_AS(parse("False_Sine_2"), Error);
  REQUIRE_THROWS_AS(parse("False_Swish_2"), Error);  // Swish takes no alpha
  REQUIRE_THROWS_AS(parse("False_Snake_-1"), Error);
}

TEST_CASE("alpha must be positive for parameterized kinds", "[activations]") {
  REQUIRE_THROWS_AS(make_spec(Kind::snake, 0.0), Error);
  REQUIRE_THROWS_AS(make_spec(Kind::custom_tanh, -2.0), Error);
  REQUIRE_NOTHROW(make_spec(Kind::swish, -2.0));  // ignored, normalized to 1
  REQUIRE(make_spec(Kind::swish, -2.0).alpha == 1.0);
}
