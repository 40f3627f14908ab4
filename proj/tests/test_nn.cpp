#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>

#include "aliasbench/checkpoint.hpp"
#include "aliasbench/nn.hpp"
#include "oracles.hpp"

using namespace aliasbench;
using Catch::Approx;

namespace {

nn::TcnConfig tiny_config(activations::Kind kind = activations::Kind::custom_tanh,
                          bool gated = false, double alpha = 0.7) {
  nn::TcnConfig cfg;
  cfg.channels = 2;
  cfg.kernel_size = 2;
  cfg.dilations = {1, 2};
  cfg.activation = activations::make_spec(kind, alpha, gated);
  return cfg;
}

bool params_equal(const nn::ParamSet& a, const nn::ParamSet& b) {
  bool equal = true;
  std::vector<const std::vector<double>*> av, bv;
  a.for_each_buffer([&](const std::vector<double>& x) { av.push_back(&x); });
  b.for_each_buffer([&](const std::vector<double>& x) { bv.push_back(&x); });
  for (std::size_t i = 0; i < av.size(); ++i)
    if (*av[i] != *bv[i]) equal = false;
  return equal;
}

}  // namespace

TEST_CASE("receptive field follows the dilation sum", "[nn]") {
  nn::TcnConfig cfg;  // default: kernel 3, two 1..256 stacks
  REQUIRE(nn::receptive_field(cfg) == 2045);

  cfg.dilations = {1};
  REQUIRE(nn::receptive_field(cfg) == 3);

  cfg.kernel_size = 1;
  cfg.dilations = {1, 4, 16};
  REQUIRE(nn::receptive_field(cfg) == 1);
}

TEST_CASE("parameter count matches the hand-derived formula", "[nn]") {
  SECTION("default non-gated config") {
    // layer 0: 16*1*3 + 16 + 16*16; layers 1..16: 16*16*3 + 16 + 16*16 each;
    // layer 17 (no residual): 16*16*3 + 16; head: 16
    const std::size_t expected = (48 + 16 + 256) + 16 * (768 + 16 + 256) + (768 + 16) + 16;
    REQUIRE(expected == 17760);
    nn::TcnConfig cfg;
    REQUIRE(nn::init_model(cfg, 0).parameter_count() == expected);
  }
  SECTION("small gated config") {
    nn::TcnConfig cfg;
    cfg.channels = 4;
    cfg.dilations = {1, 2, 4};
    cfg.activation = activations::make_spec(activations::Kind::swish, 1.0, true);
    // conv out = 2C = 8; skip projection 2x4; head width C/2 = 2
    const std::size_t expected = (24 + 8 + 16 + 8) + (96 + 8 + 16 + 8) + (96 + 8 + 8) + 2;
    REQUIRE(nn::init_model(cfg, 0).parameter_count() == expected);
  }
}

TEST_CASE("init is deterministic per seed", "[nn]") {
  const auto cfg = tiny_config();
  const auto a = nn::init_model(cfg, 1);
  const auto b = nn::init_model(cfg, 1);
  const auto c = nn::init_model(cfg, 2);
  REQUIRE(params_equal(a.params, b.params));
  REQUIRE_FALSE(params_equal(a.params, c.params));
}

TEST_CASE("gated models need even channels", "[nn]") {
  nn::TcnConfig cfg = tiny_config(activations::Kind::custom_tanh, true);
  cfg.channels = 3;
  try {
    nn::init_model(cfg, 0);
    FAIL("expected config error");
  } catch (const Error& e) {
    REQUIRE(e.code() == Errc::config_error);
  }
}

TEST_CASE("zeroed model is silent", "[nn]") {
  nn::TcnConfig cfg = tiny_config(activations::Kind::identity);
  nn::TcnModel model{cfg, nn::make_param_set(cfg)};  // all zeros
  const auto y = nn::forward(model, oracles::random_signal(64, 3));
  for (double v : y.samples) REQUIRE(v == 0.0);
}

TEST_CASE("single-path network matches a hand trace", "[nn]") {
  nn::TcnConfig cfg;
  cfg.channels = 1;
  cfg.kernel_size = 1;
  cfg.dilations = {1};
  cfg.activation = activations::make_spec(activations::Kind::identity);
  nn::TcnModel model{cfg, nn::make_param_set(cfg)};
  model.params.for_each_buffer([](std::vector<double>& b) {
    for (double& v : b) v = 1.0;
  });
  // u = x + 1 (weight 1, bias 1), identity activation, head weight 1 -> y = x + 1
  const auto x = oracles::random_signal(16, 4);
  const auto y = nn::forward(model, x);
  for (std::size_t i = 0; i < x.size(); ++i) REQUIRE(y.samples[i] == Approx(x.samples[i] + 1.0).margin(1e-15));
}

TEST_CASE("forward is causal", "[nn]") {
  for (bool gated : {false, true}) {
    auto cfg = tiny_config(activations::Kind::swish, gated, 1.0);
    cfg.channels = 4;
    cfg.dilations = {1, 2, 4};
    const auto model = nn::init_model(cfg, 5);
    auto x = oracles::random_signal(48, 6);
    const auto y0 = nn::forward(model, x);
    const std::size_t m = 20;
    x.samples[m] += 0.5;
    const auto y1 = nn::forward(model, x);
    for (std::size_t n = 0; n < m; ++n) REQUIRE(y0.samples[n] == y1.samples[n]);
    REQUIRE(y0.samples[m] != y1.samples[m]);
  }
}

TEST_CASE("identity activation without biases is a linear operator", "[nn]") {
  auto cfg = tiny_config(activations::Kind::identity);
  cfg.channels = 4;
  cfg.dilations = {1, 2, 4};
  cfg.conv_bias = false;
  cfg.head_bias = false;
  const auto model = nn::init_model(cfg, 7);
  const auto xa = oracles::random_signal(64, 8);
  const auto xb = oracles::random_signal(64, 9);
  const double a = 0.7, b = -1.3;
  dsp::Signal mix;
  mix.sample_rate = xa.sample_rate;
  for (std::size_t i = 0; i < xa.size(); ++i) mix.samples.push_back(a * xa.samples[i] + b * xb.samples[i]);
  const auto ya = nn::forward(model, xa);
  const auto yb = nn::forward(model, xb);
  const auto ymix = nn::forward(model, mix);
  for (std::size_t i = 0; i < mix.size(); ++i)
    REQUIRE(ymix.samples[i] == Approx(a * ya.samples[i] + b * yb.samples[i]).margin(1e-10));
}

TEST_CASE("loss is zero with zero gradients at the target", "[nn]") {
  const auto cfg = tiny_config();
  const auto model = nn::init_model(cfg, 11);
  const auto x = oracles::random_signal(24, 12);
  const auto target = nn::forward(model, x);
  const auto res = nn::forward_backward(model, x, target);
  REQUIRE(res.loss == 0.0);
  res.grads.for_each_buffer([](const std::vector<double>& b) {
    for (double v : b) REQUIRE(std::abs(v) <= 1e-12);
  });
}

TEST_CASE("analytic gradients match finite differences", "[nn]") {
  for (auto kind : activations::kCatalog) {
    for (bool gated : {false, true}) {
      for (std::uint64_t seed = 0; seed < 2; ++seed) {
        auto cfg = tiny_config(kind, gated);
        auto model = nn::init_model(cfg, seed + 40);
        const auto x = oracles::random_signal(14, seed * 3 + 1);
        const auto target = oracles::random_signal(14, seed * 3 + 2);
        const auto res = nn::forward_backward(model, x, target);
        const auto check = oracles::finite_difference_check(model, x, target, res.grads, 1e-6, 1e-5, 1e-8);
        INFO("kind " << activations::kind_name(kind) << " gated " << gated << " seed " << seed);
        REQUIRE(check.failed == 0);
        REQUIRE(check.checked == model.parameter_count());
      }
    }
  }
}

TEST_CASE("scaling head and target together leaves the loss unchanged", "[nn]") {
  const auto cfg = tiny_config();
  const auto base = nn::init_model(cfg, 13);
  const auto x = oracles::random_signal(32, 14);
  const auto target = oracles::random_signal(32, 15);
  const double l0 = nn::forward_backward(base, x, target).loss;

  auto scaled_loss = [&](double lambda) {
    auto m = base;
    for (double& w : m.params.head_w) w *= lambda;
    auto t = target;
    for (double& v : t.samples) v *= lambda;
    return nn::forward_backward(m, x, t).loss;
  };
  REQUIRE(scaled_loss(1.5) == Approx(l0).margin(1e-12));
  const double h = 1e-4;
  REQUIRE(std::abs(scaled_loss(1.0 + h) - scaled_loss(1.0 - h)) / (2.0 * h) < 1e-9);
}

TEST_CASE("loss rejects bad segments", "[nn]") {
  const auto cfg = tiny_config();  // receptive field 4
  const auto model = nn::init_model(cfg, 16);
  SECTION("segment not longer than the receptive field") {
    const auto x = oracles::random_signal(3, 1);
    REQUIRE_THROWS_AS(nn::forward_backward(model, x, x), Error);
  }
  SECTION("zero-energy target") {
    const auto x = oracles::random_signal(16, 1);
    dsp::Signal silent;
    silent.sample_rate = x.sample_rate;
    silent.samples.assign(16, 0.0);
    try {
      nn::forward_backward(model, x, silent);
      FAIL("expected zero-energy error");
    } catch (const Error& e) {
      REQUIRE(e.code() == Errc::zero_energy_target);
    }
  }
}

TEST_CASE("adam behaves like the textbook update", "[nn]") {
  nn::TcnConfig cfg;
  cfg.channels = 1;
  cfg.kernel_size = 1;
  cfg.dilations = {1};
  cfg.activation = activations::make_spec(activations::Kind::identity);
  auto model = nn::init_model(cfg, 17);

  SECTION("zero gradients leave parameters untouched") {
    const auto before = model;
    auto state = nn::make_adam_state(cfg);
    nn::adam_step(model, nn::make_param_set(cfg), state, {});
    REQUIRE(params_equal(model.params, before.params));
  }

  SECTION("first step with unit gradient moves by about lr") {
    auto grads = nn::make_param_set(cfg);
    grads.for_each_buffer([](std::vector<double>& b) {
      for (double& v : b) v = 1.0;
    });
    const auto before = model;
    auto state = nn::make_adam_state(cfg);
    nn::AdamHyper hyper;
    hyper.lr = 0.1;
    nn::adam_step(model, grads, state, hyper);
    const double expected_delta = 0.1 / (1.0 + 1e-8);  // bias-corrected first step
    REQUIRE(model.params.head_w[0] ==
            Approx(before.params.head_w[0] - expected_delta).margin(1e-15));
    REQUIRE(before.params.head_w[0] - model.params.head_w[0] == Approx(0.1).margin(1e-6));
  }

  SECTION("updates are deterministic") {
    auto m1 = nn::init_model(cfg, 18);
    auto m2 = nn::init_model(cfg, 18);
    auto grads = nn::make_param_set(cfg);
    grads.for_each_buffer([](std::vector<double>& b) {
      for (double& v : b) v = 0.3;
    });
    auto s1 = nn::make_adam_state(cfg);
    auto s2 = nn::make_adam_state(cfg);
    for (int i = 0; i < 5; ++i) {
      nn::adam_step(m1, grads, s1, {});
      nn::adam_step(m2, grads, s2, {});
    }
    REQUIRE(params_equal(m1.params, m2.params));
  }

  SECTION("shape mismatches are rejected") {
    auto state = nn::make_adam_state(cfg);
    const auto wrong = nn::make_param_set(tiny_config());
    try {
      nn::adam_step(model, wrong, state, {});
      FAIL("expected shape error");
    } catch (const Error& e) {
      REQUIRE(e.code() == Errc::shape_mismatch);
    }
  }
}

TEST_CASE("checkpoints round-trip bit-exactly", "[nn]") {
  const auto path = (std::filesystem::temp_directory_path() / "ab_model.ckpt").string();
  for (bool gated : {false, true}) {
    auto cfg = tiny_config(activations::Kind::snake, gated, 2.0);
    cfg.channels = 4;
    const auto model = nn::init_model(cfg, 19);
    nn::save_checkpoint(model, path);
    const auto back = nn::load_checkpoint(path);
    REQUIRE(back.config.channels == cfg.channels);
    REQUIRE(back.config.activation == cfg.activation);
    REQUIRE(back.config.dilations == cfg.dilations);
    REQUIRE(params_equal(back.params, model.params));
  }
  std::remove(path.c_str());
}

TEST_CASE("corrupt checkpoints are rejected", "[nn]") {
  const auto path = (std::filesystem::temp_directory_path() / "ab_corrupt.ckpt").string();
  std::ofstream(path, std::ios::binary) << "not a checkpoint at all";
  try {
    nn::load_checkpoint(path);
    FAIL("expected parse error");
  } catch (const Error& e) {
    REQUIRE(e.code() == Errc::parse_error);
  }
  std::remove(path.c_str());
}
