#pragma once

// JSON (de)serialization for the config and plan files the CLI consumes and
// the report objects it emits.  Missing keys fall back to the documented
// defaults; malformed documents surface as parse errors.

#include <string>

#include <json.hpp>

#include "aliasbench/activations.hpp"
#include "aliasbench/errors.hpp"
#include "aliasbench/harness.hpp"
#include "aliasbench/metrics.hpp"
#include "aliasbench/nn.hpp"
#include "aliasbench/train.hpp"

namespace aliasbench::jsonio {

using nlohmann::json;

inline json tcn_config_to_json(const nn::TcnConfig& c) {
  return json{{"channels", c.channels},
              {"kernel_size", c.kernel_size},
              {"dilations", c.dilations},
              {"activation", activations::format(c.activation)},
              {"head_bias", c.head_bias},
              {"conv_bias", c.conv_bias},
              {"input_channels", c.input_channels}};
}

inline nn::TcnConfig tcn_config_from_json(const json& j) {
  try {
    nn::TcnConfig c;
    c.channels = j.value("channels", c.channels);
    c.kernel_size = j.value("kernel_size", c.kernel_size);
    if (j.contains("dilations")) c.dilations = j.at("dilations").get<std::vector<int>>();
    if (j.contains("activation")) c.activation = activations::parse(j.at("activation").get<std::string>());
    c.head_bias = j.value("head_bias", c.head_bias);
    c.conv_bias = j.value("conv_bias", c.conv_bias);
    c.input_channels = j.value("input_channels", c.input_channels);
    c.validate();
    return c;
  } catch (const json::exception& e) {
    raise(Errc::parse_error, std::string("model config: ") + e.what());
  }
}

inline json hyper_to_json(const train::Hyper& h) {
  return json{{"lr", h.lr},
              {"beta1", h.beta1},
              {"beta2", h.beta2},
              {"eps", h.eps},
              {"batch_size", h.batch_size},
              {"max_epochs", h.max_epochs},
              {"max_steps", h.max_steps},
              {"patience", h.patience},
              {"min_delta", h.min_delta}};
}

inline train::Hyper hyper_from_json(const json& j) {
  try {
    train::Hyper h;
    h.lr = j.value("lr", h.lr);
    h.beta1 = j.value("beta1", h.beta1);
    h.beta2 = j.value("beta2", h.beta2);
    h.eps = j.value("eps", h.eps);
    h.batch_size = j.value("batch_size", h.batch_size);
    h.max_epochs = j.value("max_epochs", h.max_epochs);
    h.max_steps = j.value("max_steps", h.max_steps);
    h.patience = j.value("patience", h.patience);
    h.min_delta = j.value("min_delta", h.min_delta);
    h.validate();
    return h;
  } catch (const json::exception& e) {
    raise(Errc::parse_error, std::string("hyperparameters: ") + e.what());
  }
}

inline json dataset_spec_to_json(const train::DatasetSpec& d) {
  json j{{"segment_length", d.segment_length}, {"validation_fraction", d.validation_fraction}};
  if (d.source == train::DatasetSpec::Source::synthetic) {
    j["type"] = "synthetic";
    j["kind"] = train::synthetic_kind_name(d.kind);
    j["drive"] = d.drive;
    j["length"] = d.length;
    j["sample_rate"] = d.sample_rate;
    j["seed"] = d.seed;
  } else {
    j["type"] = "wav";
    j["input"] = d.input_path;
    j["target"] = d.target_path;
  }
  return j;
}

inline train::DatasetSpec dataset_spec_from_json(const json& j) {
  try {
    train::DatasetSpec d;
    const std::string type = j.value("type", "synthetic");
    if (type == "synthetic") {
      d.source = train::DatasetSpec::Source::synthetic;
      d.kind = train::synthetic_kind_from_name(j.value("kind", "tanh_clip"));
      d.drive = j.value("drive", d.drive);
      d.length = j.value("length", d.length);
      d.sample_rate = j.value("sample_rate", d.sample_rate);
      d.seed = j.value("seed", d.seed);
    } else if (type == "wav") {
      d.source = train::DatasetSpec::Source::wav;
      d.input_path = j.at("input").get<std::string>();
      d.target_path = j.at("target").get<std::string>();
    } else {
      raise(Errc::parse_error, "dataset type must be \"synthetic\" or \"wav\": " + type);
    }
    d.segment_length = j.value("segment_length", d.segment_length);
    d.validation_fraction = j.value("validation_fraction", d.validation_fraction);
    return d;
  } catch (const json::exception& e) {
    raise(Errc::parse_error, std::string("dataset spec: ") + e.what());
  }
}

inline json sine_plan_to_json(const metrics::SineTestPlan& p) {
  return json{{"sample_rate", p.sample_rate},
              {"dft_length", p.dft_length},
              {"fundamental_bin", p.fundamental_bin}};
}

inline metrics::SineTestPlan sine_plan_from_json(const json& j) {
  try {
    metrics::SineTestPlan p;
    const int fs = j.value("sample_rate", p.sample_rate);
    const std::size_t n = j.value("dft_length", p.dft_length);
    const std::size_t k0 = j.value("fundamental_bin", p.fundamental_bin);
    return metrics::make_sine_test_plan(fs, n, k0, j.value("require_prime", false));
  } catch (const json::exception& e) {
    raise(Errc::parse_error, std::string("sine test plan: ") + e.what());
  }
}

inline harness::SweepPlan sweep_plan_from_json(const json& j) {
  try {
    harness::SweepPlan plan;
    if (j.contains("activations"))
      for (const auto& label : j.at("activations")) plan.activations.push_back(activations::parse(label.get<std::string>()));
    if (j.contains("grid")) {
      const json& g = j.at("grid");
      std::vector<bool> gated = {false};
      if (g.contains("gated")) gated = g.at("gated").get<std::vector<bool>>();
      std::vector<double> alphas = {0.1, 0.2, 0.5, 1, 2, 4, 8, 16, 32};
      if (g.contains("alphas")) alphas = g.at("alphas").get<std::vector<double>>();
      if (g.contains("alpha_log_sweep")) {
        const json& s = g.at("alpha_log_sweep");
        alphas = harness::log_spaced_alphas(s.at("from").get<double>(), s.at("to").get<double>(),
                                            s.at("points").get<int>());
      }
      for (const auto& name : g.at("kinds")) {
        const auto probe = activations::parse("False_" + name.get<std::string>());
        for (bool gate : gated) {
          if (!activations::uses_alpha(probe.kind)) {
            plan.activations.push_back(activations::make_spec(probe.kind, 1.0, gate));
            continue;
          }
          for (double a : alphas) plan.activations.push_back(activations::make_spec(probe.kind, a, gate));
        }
      }
    }
    plan.seeds = j.value("seeds", plan.seeds);
    plan.seed_base = j.value("seed_base", plan.seed_base);
    if (j.contains("model")) plan.model = tcn_config_from_json(j.at("model"));
    if (j.contains("dataset")) plan.dataset = dataset_spec_from_json(j.at("dataset"));
    if (j.contains("hyper")) plan.hyper = hyper_from_json(j.at("hyper"));
    if (j.contains("sine_test")) {
      plan.sine_plan = sine_plan_from_json(j.at("sine_test"));
      plan.sine_amplitude = j.at("sine_test").value("amplitude", plan.sine_amplitude);
    }
    plan.workers = j.value("workers", plan.workers);
    plan.validate();
    return plan;
  } catch (const json::exception& e) {
    raise(Errc::parse_error, std::string("sweep plan: ") + e.what());
  }
}

inline json train_report_to_json(const train::TrainReport& r) {
  return json{{"train_loss", r.train_loss}, {"val_esr", r.val_esr},
              {"epochs", r.epochs},         {"steps", r.steps},
              {"stop_reason", r.stop_reason}, {"wall_seconds", r.wall_seconds},
              {"final_esr", r.final_esr},   {"seed", r.seed}};
}

inline json asr_breakdown_to_json(const metrics::AsrBreakdown& b) {
  return json{{"total_energy", b.total_energy},
              {"harmonic_energy", b.harmonic_energy},
              {"aliased_energy", b.aliased_energy},
              {"asr", b.asr},
              {"harmonic_bins", b.harmonic_bins}};
}

inline json load_json_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) raise(Errc::io_error, "cannot open " + path);
  try {
    return json::parse(f);
  } catch (const json::exception& e) {
    raise(Errc::parse_error, path + ": " + e.what());
  }
}

}  // namespace aliasbench::jsonio
