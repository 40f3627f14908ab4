#pragma once

// Dataset assembly, segment batching, the training loop with early stopping,
// and post-training evaluation.
//
// Training minimizes the pre-emphasized ESR over shuffled fixed-length
// segments; evaluation reports the plain ESR over the full validation block.
// The two differ exactly in the pre-emphasis filter.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <utility>
#include <vector>

#include "aliasbench/errors.hpp"
#include "aliasbench/metrics.hpp"
#include "aliasbench/nn.hpp"
#include "aliasbench/rng.hpp"
#include "aliasbench/signal.hpp"
#include "aliasbench/wav.hpp"

namespace aliasbench::train {

enum class SyntheticKind { tanh_clip, hard_clip };

inline const char* synthetic_kind_name(SyntheticKind k) {
  return k == SyntheticKind::tanh_clip ? "tanh_clip" : "hard_clip";
}

inline SyntheticKind synthetic_kind_from_name(const std::string& name) {
  if (name == "tanh_clip") return SyntheticKind::tanh_clip;
  if (name == "hard_clip") return SyntheticKind::hard_clip;
  raise(Errc::parse_error, "unknown synthetic dataset kind: " + name);
}

// Aligned input/target pair plus the segmentation and split policy.  The
// validation split is the last contiguous block of the pair.
struct Dataset {
  dsp::Signal input;
  dsp::Signal target;
  std::size_t segment_length = 16384;
  double validation_fraction = 0.10;

  void validate() const {
    if (input.empty()) raise(Errc::invalid_argument, "Dataset: empty input");
    if (input.size() != target.size()) raise(Errc::length_mismatch, "Dataset: input/target length mismatch");
    if (input.sample_rate != target.sample_rate)
      raise(Errc::sample_rate_mismatch, "Dataset: input/target sample rate mismatch");
    if (segment_length < 2) raise(Errc::invalid_argument, "Dataset: segment_length too small");
    if (!(validation_fraction > 0.0 && validation_fraction < 1.0))
      raise(Errc::invalid_argument, "Dataset: validation_fraction must lie in (0, 1)");
    if (split_index() == 0 || split_index() >= input.size())
      raise(Errc::invalid_argument, "Dataset: signal too short to split");
  }

  // First sample of the validation block.
  std::size_t split_index() const {
    const std::size_t val = static_cast<std::size_t>(std::floor(static_cast<double>(input.size()) * validation_fraction));
    return input.size() - std::max<std::size_t>(val, 1);
  }
};

namespace detail {

// Noise bursts, log sine sweeps and silence gaps, all inside +-0.8.
inline dsp::Signal synthetic_excitation(std::size_t length, int sample_rate, std::uint64_t seed) {
  dsp::Signal x;
  x.sample_rate = sample_rate;
  x.samples.reserve(length + 16384);
  Rng rng(seed);
  auto envelope = [](std::size_t i, std::size_t len) {
    const std::size_t ramp = std::min<std::size_t>(256, len / 4 + 1);
    double e = 1.0;
    if (i < ramp) e = static_cast<double>(i) / static_cast<double>(ramp);
    if (len - 1 - i < ramp) e = std::min(e, static_cast<double>(len - 1 - i) / static_cast<double>(ramp));
    return e;
  };
  while (x.samples.size() < length) {
    switch (rng.index(3)) {
      case 0: {  // low-passed noise burst
        const std::size_t len = 1000 + rng.index(5000);
        const double amp = rng.uniform(0.1, 0.8);
        const double fc = rng.uniform(200.0, 6000.0);
        const double pole = std::exp(-2.0 * M_PI * fc / sample_rate);
        double state = 0.0;
        for (std::size_t i = 0; i < len; ++i) {
          state = (1.0 - pole) * rng.uniform(-amp, amp) + pole * state;
          x.samples.push_back(envelope(i, len) * state);
        }
        break;
      }
      case 1: {  // log frequency sweep
        const std::size_t len = 2000 + rng.index(10000);
        const double amp = rng.uniform(0.1, 0.8);
        const double f0 = rng.uniform(40.0, 4000.0);
        const double f1 = rng.uniform(40.0, 4000.0);
        double phase = rng.uniform(0.0, 2.0 * M_PI);
        for (std::size_t i = 0; i < len; ++i) {
          const double t = static_cast<double>(i) / static_cast<double>(len - 1);
          const double f = f0 * std::pow(f1 / f0, t);
          phase += 2.0 * M_PI * f / sample_rate;
          x.samples.push_back(envelope(i, len) * amp * std::sin(phase));
        }
        break;
      }
      default: {  // silence gap
        const std::size_t len = 200 + rng.index(1800);
        x.samples.insert(x.samples.end(), len, 0.0);
        break;
      }
    }
  }
  x.samples.resize(length);
  for (double& v : x.samples) v = std::clamp(v, -0.8, 0.8);
  return x;
}

}  // namespace detail

// Self-contained stand-in for a recorded amp pair: seeded excitation plus a
// static waveshaper target.  tanh_clip is normalized so the small-signal
// slope stays near 1 as drive -> 0.
inline Dataset make_synthetic_dataset(SyntheticKind kind, double drive, std::size_t length,
                                      int sample_rate, std::uint64_t seed,
                                      std::size_t segment_length = 16384) {
  if (length == 0) raise(Errc::invalid_argument, "make_synthetic_dataset: zero length");
  if (!(drive > 0.0)) raise(Errc::invalid_argument, "make_synthetic_dataset: drive must be positive");
  if (sample_rate <= 0) raise(Errc::invalid_argument, "make_synthetic_dataset: bad sample rate");
  Dataset d;
  d.input = detail::synthetic_excitation(length, sample_rate, seed);
  d.target.sample_rate = sample_rate;
  d.target.samples.resize(length);
  if (kind == SyntheticKind::tanh_clip) {
    const double norm = std::tanh(drive);
    for (std::size_t i = 0; i < length; ++i)
      d.target.samples[i] = std::tanh(drive * d.input.samples[i]) / norm;
  } else {
    for (std::size_t i = 0; i < length; ++i)
      d.target.samples[i] = std::clamp(drive * d.input.samples[i], -1.0, 1.0);
  }
  d.segment_length = segment_length;
  return d;
}

// Ingests a recorded input/target WAV pair.  Lengths are trimmed to the
// shorter file; a mismatch above 1% warns, above 10% is treated as the wrong
// pair and rejected.
inline Dataset load_dataset(const std::string& input_path, const std::string& target_path,
                            std::size_t segment_length) {
  Dataset d;
  d.input = dsp::load_wav(input_path);
  d.target = dsp::load_wav(target_path);
  if (d.input.sample_rate != d.target.sample_rate)
    raise(Errc::sample_rate_mismatch, "load_dataset: sample rates differ between input and target");
  const std::size_t la = d.input.size(), lb = d.target.size();
  const std::size_t shorter = std::min(la, lb);
  const std::size_t longer = std::max(la, lb);
  const double mismatch = static_cast<double>(longer - shorter) / static_cast<double>(longer);
  if (mismatch > 0.10)
    raise(Errc::length_mismatch, "load_dataset: gross length mismatch between input and target");
  if (mismatch > 0.01)
    std::fprintf(stderr, "load_dataset: warning: trimming %.1f%% length mismatch\n", 100.0 * mismatch);
  d.input.samples.resize(shorter);
  d.target.samples.resize(shorter);
  d.segment_length = segment_length;
  d.validate();
  return d;
}

// Regenerable description of a dataset, so sweep runs can rebuild the same
// data deterministically.
struct DatasetSpec {
  enum class Source { synthetic, wav };
  Source source = Source::synthetic;
  // synthetic
  SyntheticKind kind = SyntheticKind::tanh_clip;
  double drive = 2.0;
  std::size_t length = 1 << 16;
  int sample_rate = 48000;
  std::uint64_t seed = 0;
  // wav
  std::string input_path;
  std::string target_path;
  // both
  std::size_t segment_length = 16384;
  double validation_fraction = 0.10;

  Dataset materialize() const {
    Dataset d = source == Source::synthetic
                    ? make_synthetic_dataset(kind, drive, length, sample_rate, seed, segment_length)
                    : load_dataset(input_path, target_path, segment_length);
    d.validation_fraction = validation_fraction;
    d.validate();
    return d;
  }
};

struct Hyper {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  int batch_size = 8;
  int max_epochs = 10;
  long max_steps = 0;  // 0 = no step cap
  int patience = 2;
  double min_delta = 1e-4;

  void validate() const {
    if (!(lr > 0.0)) raise(Errc::invalid_argument, "Hyper: lr must be positive");
    if (batch_size < 1) raise(Errc::invalid_argument, "Hyper: batch_size must be >= 1");
    if (max_epochs < 1) raise(Errc::invalid_argument, "Hyper: max_epochs must be >= 1");
    if (patience < 1) raise(Errc::invalid_argument, "Hyper: patience must be >= 1");
    if (min_delta < 0.0) raise(Errc::invalid_argument, "Hyper: min_delta must be >= 0");
  }
};

struct TrainReport {
  std::vector<double> train_loss;  // per epoch, mean of batch losses
  std::vector<double> val_esr;     // per completed epoch
  int epochs = 0;
  long steps = 0;
  std::string stop_reason;  // "early_stop", "epoch_cap" or "step_cap"
  double wall_seconds = 0.0;
  double final_esr = 0.0;
  std::uint64_t seed = 0;
};

// Evaluation ESR (no pre-emphasis) over the full validation block, with the
// first receptive_field - 1 output samples discarded as warmup.
inline double evaluate(const nn::TcnModel& model, const Dataset& data) {
  data.validate();
  const std::size_t split = data.split_index();
  const std::size_t val_len = data.input.size() - split;
  const std::size_t warmup = receptive_field(model.config) - 1;
  if (val_len <= warmup)
    raise(Errc::invalid_argument, "evaluate: validation split shorter than the receptive field");
  const dsp::Signal vin = dsp::slice(data.input, split, val_len);
  const dsp::Signal vtg = dsp::slice(data.target, split, val_len);
  const dsp::Signal pred = nn::forward(model, vin);
  return metrics::esr(dsp::slice(vtg, warmup, val_len - warmup),
                      dsp::slice(pred, warmup, val_len - warmup));
}

// Deterministic seeded training run.  Early-stops when validation ESR fails
// to improve by more than min_delta for `patience` consecutive epochs.
inline std::pair<nn::TcnModel, TrainReport> train_model(const nn::TcnConfig& config,
                                                        const Dataset& data, const Hyper& hyper,
                                                        std::uint64_t seed) {
  const auto t_start = std::chrono::steady_clock::now();
  config.validate();
  data.validate();
  hyper.validate();
  const std::size_t rf = receptive_field(config);
  if (data.segment_length <= rf)
    raise(Errc::config_error, "train_model: segment_length must exceed the receptive field");
  const std::size_t split = data.split_index();
  const std::size_t n_segments = split / data.segment_length;
  if (n_segments == 0)
    raise(Errc::invalid_argument, "train_model: training split shorter than one segment");

  nn::TcnModel model = nn::init_model(config, seed);
  nn::AdamState state = nn::make_adam_state(config);
  const nn::AdamHyper adam{hyper.lr, hyper.beta1, hyper.beta2, hyper.eps};
  Rng order_rng(seed ^ 0x9e3779b97f4a7c15ULL);

  TrainReport report;
  report.seed = seed;
  double best_val = std::numeric_limits<double>::infinity();
  int epochs_without_improvement = 0;
  bool stopped = false;

  // Silent segments (zero pre-emphasized target energy past warmup) carry no
  // training signal and would make the loss ratio undefined; drop them once.
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < n_segments; ++i) {
    const std::size_t begin = i * data.segment_length;
    double energy = 0.0;
    for (std::size_t m = rf - 1; m < data.segment_length; ++m) {
      const double v = m == 0 ? data.target.samples[begin]
                              : data.target.samples[begin + m] -
                                    dsp::kPreemphasisCoeff * data.target.samples[begin + m - 1];
      energy += v * v;
    }
    if (energy > 0.0) order.push_back(i);
  }
  if (order.empty()) raise(Errc::zero_energy_target, "train_model: every training segment is silent");
  const std::size_t usable_segments = order.size();

  for (int epoch = 0; epoch < hyper.max_epochs && !stopped; ++epoch) {
    shuffle(order, order_rng);
    double epoch_loss = 0.0;
    std::size_t epoch_batches = 0;
    report.epochs = epoch + 1;

    for (std::size_t pos = 0; pos < usable_segments; pos += static_cast<std::size_t>(hyper.batch_size)) {
      const std::size_t count = std::min<std::size_t>(hyper.batch_size, usable_segments - pos);
      nn::GradientSet grads = nn::make_param_set(config);
      double batch_loss = 0.0;
      for (std::size_t b = 0; b < count; ++b) {
        const std::size_t begin = order[pos + b] * data.segment_length;
        const dsp::Signal xs = dsp::slice(data.input, begin, data.segment_length);
        const dsp::Signal ts = dsp::slice(data.target, begin, data.segment_length);
        auto r = nn::forward_backward(model, xs, ts);
        batch_loss += r.loss;
        nn::accumulate(grads, r.grads);
      }
      const double inv = 1.0 / static_cast<double>(count);
      batch_loss *= inv;
      nn::scale(grads, inv);
      if (!std::isfinite(batch_loss))
        raise(Errc::divergence, "train_model: loss diverged at epoch " + std::to_string(epoch + 1) +
                                    ", step " + std::to_string(report.steps + 1));
      nn::adam_step(model, grads, state, adam);
      report.steps += 1;
      epoch_loss += batch_loss;
      epoch_batches += 1;
      if (hyper.max_steps > 0 && report.steps >= hyper.max_steps) {
        report.stop_reason = "step_cap";
        stopped = true;
        break;
      }
    }
    if (epoch_batches > 0) report.train_loss.push_back(epoch_loss / static_cast<double>(epoch_batches));
    if (stopped) break;

    const double val = evaluate(model, data);
    report.val_esr.push_back(val);
    if (val < best_val - hyper.min_delta) {
      best_val = val;
      epochs_without_improvement = 0;
    } else if (++epochs_without_improvement >= hyper.patience) {
      report.stop_reason = "early_stop";
      stopped = true;
    }
  }
  if (report.stop_reason.empty()) report.stop_reason = "epoch_cap";
  report.final_esr = evaluate(model, data);
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return {std::move(model), std::move(report)};
}

}  // namespace aliasbench::train
