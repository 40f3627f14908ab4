#pragma once

// Sweep orchestration: activation x alpha x seed grids, sine-test execution
// with transient discard, aggregate statistics, and CSV emission.
//
// Jobs fan out over a bounded worker pool; results land in canonical
// (config, seed) order so the emitted bytes never depend on scheduling.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <thread>
#include <vector>

#include "aliasbench/activations.hpp"
#include "aliasbench/errors.hpp"
#include "aliasbench/metrics.hpp"
#include "aliasbench/nn.hpp"
#include "aliasbench/train.hpp"

namespace aliasbench::harness {

// A run is excluded from aggregates when it effectively failed to train.
inline constexpr double kFailureEsr = 0.98;
inline constexpr double kDefaultSineAmplitude = 0.5;
inline constexpr double kCabinetBandLimitHz = 6000.0;

struct SweepPlan {
  std::vector<activations::ActivationSpec> activations;
  int seeds = 5;
  std::uint64_t seed_base = 0;
  nn::TcnConfig model;  // activation field is overridden per sweep entry
  train::DatasetSpec dataset;
  train::Hyper hyper;
  metrics::SineTestPlan sine_plan{};
  double sine_amplitude = kDefaultSineAmplitude;
  int workers = 0;  // 0: ALIASBENCH_WORKERS env var, then hardware concurrency

  void validate() const {
    if (activations.empty()) raise(Errc::invalid_argument, "SweepPlan: no activation configurations");
    if (seeds < 1) raise(Errc::invalid_argument, "SweepPlan: seeds must be >= 1");
    if (!(sine_amplitude > 0.0)) raise(Errc::invalid_argument, "SweepPlan: sine amplitude must be positive");
    hyper.validate();
    sine_plan.validate();
    nn::TcnConfig probe = model;
    for (const auto& spec : activations) {
      probe.activation = spec;
      probe.validate();
    }
  }
};

struct SweepRow {
  std::string label;
  std::uint64_t seed = 0;
  double esr = std::numeric_limits<double>::quiet_NaN();
  double asr = std::numeric_limits<double>::quiet_NaN();
  int epochs = 0;
  bool failed = false;
};

struct AggregateStats {
  std::string label;
  double asr_mean = 0, asr_std = 0, asr_min = 0;
  double esr_mean = 0, esr_std = 0, esr_min = 0;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::vector<AggregateStats> stats;
};

inline int worker_count(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("ALIASBENCH_WORKERS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

namespace detail {

// Bin-exact test tone of arbitrary length (phase continuous across the
// warmup prefix and the measured block).
inline dsp::Signal sine_probe(const metrics::SineTestPlan& plan, double amplitude, std::size_t total) {
  dsp::Signal x;
  x.sample_rate = plan.sample_rate;
  x.samples.resize(total);
  for (std::size_t i = 0; i < total; ++i)
    x.samples[i] = amplitude * std::sin(dsp::bin_sine_phase(plan.fundamental_bin, i, plan.dft_length));
  return x;
}

inline void remove_mean(dsp::Signal& s) {
  double mean = 0.0;
  for (double v : s.samples) mean += v;
  mean /= static_cast<double>(s.size());
  for (double& v : s.samples) v -= mean;
}

}  // namespace detail

// Steady-state block of the model's response to the plan's test tone: the
// tone runs for receptive_field + N/8 warmup samples plus N measured ones,
// the warmup output is discarded and the DC mean of the retained block is
// removed (a constant output offset is a bias artifact, not aliasing).
inline dsp::Signal sine_test_response(const nn::TcnModel& model, const metrics::SineTestPlan& plan,
                                      double amplitude = kDefaultSineAmplitude) {
  plan.validate();
  if (!(amplitude > 0.0)) raise(Errc::invalid_argument, "sine_test: amplitude must be positive");
  const std::size_t n = plan.dft_length;
  const std::size_t warmup = nn::receptive_field(model.config) + n / 8;
  const dsp::Signal x = detail::sine_probe(plan, amplitude, warmup + n);
  const dsp::Signal y = nn::forward(model, x);
  dsp::Signal steady = dsp::slice(y, warmup, n);
  detail::remove_mean(steady);
  return steady;
}

inline metrics::AsrBreakdown sine_test(const nn::TcnModel& model, const metrics::SineTestPlan& plan,
                                       double amplitude = kDefaultSineAmplitude) {
  return metrics::asr(sine_test_response(model, plan, amplitude), plan);
}

// Optional multi-fundamental variant: mean ASR over several plans (the
// single-frequency test above is the default everywhere).
inline double sine_test_mean_asr(const nn::TcnModel& model,
                                 const std::vector<metrics::SineTestPlan>& plans,
                                 double amplitude = kDefaultSineAmplitude) {
  if (plans.empty()) raise(Errc::invalid_argument, "sine_test_mean_asr: no plans");
  double sum = 0.0;
  for (const auto& plan : plans) sum += sine_test(model, plan, amplitude).asr;
  return sum / static_cast<double>(plans.size());
}

struct SineSpectrum {
  metrics::AsrBreakdown breakdown;
  dsp::HalfSpectrum spectrum;
};

inline SineSpectrum sine_test_spectrum(const nn::TcnModel& model, const metrics::SineTestPlan& plan,
                                       double amplitude = kDefaultSineAmplitude) {
  const dsp::Signal steady = sine_test_response(model, plan, amplitude);
  SineSpectrum out;
  out.spectrum = dsp::dft_power_half(steady);
  out.breakdown = metrics::asr_from_spectrum(out.spectrum, plan);
  return out;
}

// Loudest non-harmonic bin below freq_limit_hz, in dB relative to the
// fundamental bin.  -inf when every alias bin is exactly zero.
inline double max_alias_db_below(const SineSpectrum& s, const metrics::SineTestPlan& plan,
                                 double freq_limit_hz = kCabinetBandLimitHz) {
  plan.validate();
  const double fund = s.spectrum.magnitudes_sq[plan.fundamental_bin];
  if (fund <= 0.0) raise(Errc::zero_harmonic_energy, "max_alias_db_below: no fundamental energy");
  std::vector<bool> harmonic(s.spectrum.bins(), false);
  for (std::size_t k : s.breakdown.harmonic_bins) harmonic[k] = true;
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k < s.spectrum.bins(); ++k) {
    const double freq = static_cast<double>(plan.sample_rate) * static_cast<double>(k) /
                        static_cast<double>(plan.dft_length);
    if (freq >= freq_limit_hz) break;
    if (harmonic[k]) continue;
    const double p = s.spectrum.magnitudes_sq[k];
    if (p > 0.0) best = std::max(best, 10.0 * std::log10(p / fund));
  }
  return best;
}

inline std::vector<AggregateStats> aggregate_rows(const std::vector<SweepRow>& rows);

// Trains and measures every (activation, seed) pair.  Rows are complete even
// when individual runs fail; failed rows are flagged and excluded from the
// aggregates.
inline SweepResult run_sweep(const SweepPlan& plan) {
  plan.validate();
  const train::Dataset data = plan.dataset.materialize();
  const std::size_t n_jobs = plan.activations.size() * static_cast<std::size_t>(plan.seeds);

  SweepResult result;
  result.rows.resize(n_jobs);

  auto run_job = [&](std::size_t j) {
    const std::size_t config_index = j / static_cast<std::size_t>(plan.seeds);
    const std::size_t seed_index = j % static_cast<std::size_t>(plan.seeds);
    const activations::ActivationSpec spec = plan.activations[config_index];
    SweepRow row;
    row.label = activations::format(spec);
    row.seed = plan.seed_base + seed_index;
    nn::TcnConfig config = plan.model;
    config.activation = spec;
    try {
      auto [model, report] = train::train_model(config, data, plan.hyper, row.seed);
      row.epochs = report.epochs;
      row.esr = report.final_esr;
      if (!(row.esr < kFailureEsr)) row.failed = true;
      try {
        row.asr = sine_test(model, plan.sine_plan, plan.sine_amplitude).asr;
      } catch (const Error& e) {
        if (e.code() != Errc::zero_harmonic_energy) throw;
        row.failed = true;  // silent/dead model
      }
    } catch (const std::exception&) {
      row.failed = true;  // per-row capture: divergence, config error, ...
    }
    result.rows[j] = std::move(row);
  };

  const int workers = std::min<int>(worker_count(plan.workers), static_cast<int>(n_jobs));
  if (workers <= 1) {
    for (std::size_t j = 0; j < n_jobs; ++j) run_job(j);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t j = next.fetch_add(1); j < n_jobs; j = next.fetch_add(1)) run_job(j);
      });
    }
    for (auto& t : pool) t.join();
  }

  result.stats = aggregate_rows(result.rows);
  return result;
}

// Per-config mean/std/min over the non-failed rows, sorted by mean ASR
// ascending.  Configs whose every run failed are dropped.
inline std::vector<AggregateStats> aggregate_rows(const std::vector<SweepRow>& rows) {
  std::vector<std::string> order;
  std::vector<std::vector<const SweepRow*>> groups;
  for (const auto& row : rows) {
    std::size_t g = 0;
    for (; g < order.size(); ++g)
      if (order[g] == row.label) break;
    if (g == order.size()) {
      order.push_back(row.label);
      groups.emplace_back();
    }
    if (!row.failed) groups[g].push_back(&row);
  }

  auto mean_std_min = [](const std::vector<double>& v, double& mean, double& sd, double& mn) {
    mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    sd = 0.0;
    if (v.size() > 1) {
      for (double x : v) sd += (x - mean) * (x - mean);
      sd = std::sqrt(sd / static_cast<double>(v.size() - 1));
    }
    mn = *std::min_element(v.begin(), v.end());
  };

  std::vector<AggregateStats> stats;
  for (std::size_t g = 0; g < order.size(); ++g) {
    if (groups[g].empty()) continue;
    std::vector<double> asrs, esrs;
    for (const SweepRow* r : groups[g]) {
      asrs.push_back(r->asr);
      esrs.push_back(r->esr);
    }
    AggregateStats s;
    s.label = order[g];
    mean_std_min(asrs, s.asr_mean, s.asr_std, s.asr_min);
    mean_std_min(esrs, s.esr_mean, s.esr_std, s.esr_min);
    stats.push_back(std::move(s));
  }
  std::sort(stats.begin(), stats.end(), [](const AggregateStats& a, const AggregateStats& b) {
    if (a.asr_mean != b.asr_mean) return a.asr_mean < b.asr_mean;
    return a.label < b.label;
  });
  return stats;
}

namespace detail {

// Full-precision decimal so downstream recomputation from the CSV is exact.
inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) raise(Errc::io_error, "cannot open " + path + " for writing");
  f.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!f) raise(Errc::io_error, "write failed for " + path);
}

}  // namespace detail

// Writes <dir>/rows.csv (one line per run) and <dir>/aggregate.csv (one line
// per config, sorted by mean ASR ascending).
inline void export_csv(const std::vector<SweepRow>& rows, const std::vector<AggregateStats>& stats,
                       const std::string& dir) {
  if (rows.empty()) raise(Errc::invalid_argument, "export_csv: no rows");
  std::filesystem::create_directories(dir);
  std::string out = "label,seed,esr,asr,epochs,failed\n";
  for (const auto& r : rows) {
    out += r.label;
    out += ',';
    out += std::to_string(r.seed);
    out += ',';
    out += detail::fmt(r.esr);
    out += ',';
    out += detail::fmt(r.asr);
    out += ',';
    out += std::to_string(r.epochs);
    out += ',';
    out += r.failed ? '1' : '0';
    out += '\n';
  }
  detail::write_file(dir + "/rows.csv", out);

  std::string agg = "label,asr_mean,asr_std,asr_min,esr_mean,esr_std,esr_min\n";
  for (const auto& s : stats) {
    agg += s.label;
    agg += ',';
    agg += detail::fmt(s.asr_mean);
    agg += ',';
    agg += detail::fmt(s.asr_std);
    agg += ',';
    agg += detail::fmt(s.asr_min);
    agg += ',';
    agg += detail::fmt(s.esr_mean);
    agg += ',';
    agg += detail::fmt(s.esr_std);
    agg += ',';
    agg += detail::fmt(s.esr_min);
    agg += '\n';
  }
  detail::write_file(dir + "/aggregate.csv", agg);
}

// Scatter view of the aggregates with unusably inaccurate configs
// (mean ESR > 0.2) filtered out.
inline void export_scatter(const std::vector<AggregateStats>& stats, const std::string& path) {
  std::string out = "label,asr_mean,esr_mean\n";
  for (const auto& s : stats) {
    if (s.esr_mean > 0.2) continue;
    out += s.label;
    out += ',';
    out += detail::fmt(s.asr_mean);
    out += ',';
    out += detail::fmt(s.esr_mean);
    out += '\n';
  }
  detail::write_file(path, out);
}

inline std::vector<double> log_spaced_alphas(double lo, double hi, int points) {
  if (!(lo > 0.0) || !(hi > lo) || points < 2)
    raise(Errc::invalid_argument, "log_spaced_alphas: need 0 < lo < hi and points >= 2");
  std::vector<double> out(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i)
    out[static_cast<std::size_t>(i)] =
        lo * std::pow(hi / lo, static_cast<double>(i) / static_cast<double>(points - 1));
  return out;
}

struct SpectrumReportResult {
  double max_alias_db = 0.0;  // loudest sub-band-limit alias, dB re fundamental
  metrics::AsrBreakdown breakdown;
};

// Emits, for a trained model:
//   waveform.csv            target vs prediction, first 2048 steady samples
//   spectrum.csv            target/prediction magnitude spectra in dB
//   sinetest_spectrum.csv   per-bin power of the sine test with harmonic flags
//   summary.csv             ASR figures and the max in-band alias level
inline SpectrumReportResult spectrum_report(const nn::TcnModel& model, const train::Dataset& data,
                                            const metrics::SineTestPlan& plan, const std::string& dir,
                                            double amplitude = kDefaultSineAmplitude,
                                            double band_limit_hz = kCabinetBandLimitHz) {
  data.validate();
  plan.validate();
  std::filesystem::create_directories(dir);
  const std::size_t split = data.split_index();
  const std::size_t val_len = data.input.size() - split;
  const std::size_t warmup = nn::receptive_field(model.config) - 1;
  if (val_len <= warmup)
    raise(Errc::invalid_argument, "spectrum_report: validation split shorter than the receptive field");

  const dsp::Signal vin = dsp::slice(data.input, split, val_len);
  const dsp::Signal pred_full = nn::forward(model, vin);
  const dsp::Signal target = dsp::slice(data.target, split + warmup, val_len - warmup);
  const dsp::Signal pred = dsp::slice(pred_full, warmup, val_len - warmup);

  auto db = [](double power) { return 10.0 * std::log10(std::max(power, 1e-300)); };

  {
    std::string out = "n,target,prediction\n";
    const std::size_t count = std::min<std::size_t>(2048, target.size());
    for (std::size_t n = 0; n < count; ++n) {
      out += std::to_string(n);
      out += ',';
      out += detail::fmt(target.samples[n]);
      out += ',';
      out += detail::fmt(pred.samples[n]);
      out += '\n';
    }
    detail::write_file(dir + "/waveform.csv", out);
  }
  {
    const dsp::HalfSpectrum ts = dsp::dft_power_half(target);
    const dsp::HalfSpectrum ps = dsp::dft_power_half(pred);
    std::string out = "bin,freq_hz,target_db,prediction_db\n";
    for (std::size_t k = 0; k < ts.bins(); ++k) {
      const double freq = static_cast<double>(target.sample_rate) * static_cast<double>(k) /
                          static_cast<double>(ts.dft_length);
      out += std::to_string(k);
      out += ',';
      out += detail::fmt(freq);
      out += ',';
      out += detail::fmt(db(ts.magnitudes_sq[k]));
      out += ',';
      out += detail::fmt(db(ps.magnitudes_sq[k]));
      out += '\n';
    }
    detail::write_file(dir + "/spectrum.csv", out);
  }

  const SineSpectrum sine = sine_test_spectrum(model, plan, amplitude);
  std::vector<bool> harmonic(sine.spectrum.bins(), false);
  for (std::size_t k : sine.breakdown.harmonic_bins) harmonic[k] = true;
  const double fund = sine.spectrum.magnitudes_sq[plan.fundamental_bin];
  {
    std::string out = "bin,freq_hz,power_db,is_harmonic\n";
    for (std::size_t k = 0; k < sine.spectrum.bins(); ++k) {
      const double freq = static_cast<double>(plan.sample_rate) * static_cast<double>(k) /
                          static_cast<double>(plan.dft_length);
      out += std::to_string(k);
      out += ',';
      out += detail::fmt(freq);
      out += ',';
      out += detail::fmt(db(sine.spectrum.magnitudes_sq[k] / fund));
      out += ',';
      out += harmonic[k] ? '1' : '0';
      out += '\n';
    }
    detail::write_file(dir + "/sinetest_spectrum.csv", out);
  }

  SpectrumReportResult result;
  result.breakdown = sine.breakdown;
  result.max_alias_db = max_alias_db_below(sine, plan, band_limit_hz);
  {
    std::string out = "asr,harmonic_energy,aliased_energy,total_energy,max_alias_db,band_limit_hz\n";
    out += detail::fmt(result.breakdown.asr);
    out += ',';
    out += detail::fmt(result.breakdown.harmonic_energy);
    out += ',';
    out += detail::fmt(result.breakdown.aliased_energy);
    out += ',';
    out += detail::fmt(result.breakdown.total_energy);
    out += ',';
    out += detail::fmt(result.max_alias_db);
    out += ',';
    out += detail::fmt(band_limit_hz);
    out += '\n';
    detail::write_file(dir + "/summary.csv", out);
  }
  return result;
}

}  // namespace aliasbench::harness
