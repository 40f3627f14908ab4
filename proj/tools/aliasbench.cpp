// aliasbench command line: train models, measure aliasing, run sweeps and
// emit spectrum reports.  Config and plan files are JSON; see the README for
// the schemas and defaults.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>

#include <CLI11.hpp>

#include "aliasbench/checkpoint.hpp"
#include "aliasbench/harness.hpp"
#include "aliasbench/json_io.hpp"

using namespace aliasbench;
using nlohmann::json;

namespace {

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) raise(Errc::io_error, "cannot open " + path + " for writing");
  f << text;
}

int cmd_train(const std::string& config_path, std::uint64_t seed_base) {
  const json cfg = jsonio::load_json_file(config_path);
  const nn::TcnConfig model_cfg =
      cfg.contains("model") ? jsonio::tcn_config_from_json(cfg.at("model")) : nn::TcnConfig{};
  const train::DatasetSpec dataset_spec =
      cfg.contains("dataset") ? jsonio::dataset_spec_from_json(cfg.at("dataset")) : train::DatasetSpec{};
  const train::Hyper hyper =
      cfg.contains("hyper") ? jsonio::hyper_from_json(cfg.at("hyper")) : train::Hyper{};
  const std::uint64_t seed = cfg.value("seed", 0ull) + seed_base;

  const auto data = dataset_spec.materialize();
  std::printf("training %s on %zu samples (seed %llu)\n",
              activations::format(model_cfg.activation).c_str(), data.input.size(),
              static_cast<unsigned long long>(seed));
  const auto [model, report] = train::train_model(model_cfg, data, hyper, seed);
  std::printf("done: %d epoch(s), %ld step(s), stop=%s, eval esr %.6g, %.1f s\n", report.epochs,
              report.steps, report.stop_reason.c_str(), report.final_esr, report.wall_seconds);

  if (cfg.contains("checkpoint_out")) {
    const std::string path = cfg.at("checkpoint_out").get<std::string>();
    nn::save_checkpoint(model, path);
    std::printf("checkpoint written to %s\n", path.c_str());
  }
  const std::string report_json = jsonio::train_report_to_json(report).dump(2);
  if (cfg.contains("report_out")) {
    const std::string path = cfg.at("report_out").get<std::string>();
    write_text(path, report_json + "\n");
    std::printf("train report written to %s\n", path.c_str());
  } else {
    std::printf("%s\n", report_json.c_str());
  }
  return 0;
}

int cmd_sinetest(const std::string& checkpoint_path, const std::string& plan_path, int fs,
                 std::size_t dft_length, std::size_t bin, double amplitude,
                 const std::string& out_path) {
  const auto model = nn::load_checkpoint(checkpoint_path);
  metrics::SineTestPlan plan;
  if (!plan_path.empty()) {
    const json j = jsonio::load_json_file(plan_path);
    plan = jsonio::sine_plan_from_json(j);
    amplitude = j.value("amplitude", amplitude);
  } else {
    plan = metrics::make_sine_test_plan(fs, dft_length, bin);
  }
  const auto breakdown = harness::sine_test(model, plan, amplitude);
  json out = jsonio::asr_breakdown_to_json(breakdown);
  out["fundamental_hz"] = plan.fundamental_hz();
  out["amplitude"] = amplitude;
  const std::string text = out.dump(2) + "\n";
  if (!out_path.empty()) write_text(out_path, text);
  std::printf("%s", text.c_str());
  return 0;
}

int cmd_sweep(const std::string& plan_path, const std::string& out_dir, std::uint64_t seed_base,
              int workers) {
  json j = jsonio::load_json_file(plan_path);
  harness::SweepPlan plan = jsonio::sweep_plan_from_json(j);
  plan.seed_base += seed_base;
  if (workers > 0) plan.workers = workers;
  std::printf("sweep: %zu configuration(s) x %d seed(s), %d worker(s)\n", plan.activations.size(),
              plan.seeds, harness::worker_count(plan.workers));
  const auto result = harness::run_sweep(plan);
  harness::export_csv(result.rows, result.stats, out_dir);
  harness::export_scatter(result.stats, out_dir + "/scatter.csv");
  std::size_t failed = 0;
  for (const auto& row : result.rows) failed += row.failed ? 1 : 0;
  std::printf("%zu row(s), %zu failed; csv written to %s\n", result.rows.size(), failed,
              out_dir.c_str());
  for (const auto& s : result.stats)
    std::printf("  %-28s asr %.6g (min %.6g)  esr %.6g (min %.6g)\n", s.label.c_str(), s.asr_mean,
                s.asr_min, s.esr_mean, s.esr_min);
  return 0;
}

int cmd_report(const std::string& checkpoint_path, const std::string& dataset_path,
               const std::string& plan_path, const std::string& out_dir, double amplitude,
               double band_limit) {
  const auto model = nn::load_checkpoint(checkpoint_path);
  const auto dataset_spec = jsonio::dataset_spec_from_json(jsonio::load_json_file(dataset_path));
  metrics::SineTestPlan plan;
  if (!plan_path.empty()) {
    const json j = jsonio::load_json_file(plan_path);
    plan = jsonio::sine_plan_from_json(j);
    amplitude = j.value("amplitude", amplitude);
  }
  const auto data = dataset_spec.materialize();
  const auto result = harness::spectrum_report(model, data, plan, out_dir, amplitude, band_limit);
  std::printf("report written to %s\n", out_dir.c_str());
  std::printf("asr %.6g, max alias below %.0f Hz: %.1f dB re fundamental\n", result.breakdown.asr,
              band_limit, result.max_alias_db);
  return 0;
}

// Quick self-contained oracle checks: residue coverage vs gcd, Parseval on
// the chirp DFT, and finite-difference gradients on a tiny model.
int cmd_selfcheck() {
  int failures = 0;
  auto report = [&](const char* name, bool ok, const std::string& detail) {
    std::printf("%s  %-22s %s\n", ok ? "PASS" : "FAIL", name, detail.c_str());
    if (!ok) ++failures;
  };

  {
    bool ok = true;
    for (std::size_t n = 2; n <= 101; ++n)
      for (std::size_t k0 = 1; k0 < n; ++k0)
        if (metrics::residue_coverage(k0, n) != (std::gcd(k0, n) == 1)) ok = false;
    report("residue-coverage", ok, "exhaustive for N <= 101");
  }
  {
    bool ok = true;
    double worst = 0.0;
    for (std::size_t n : {101u, 997u, 4099u}) {
      Rng rng(n);
      dsp::Signal s;
      s.sample_rate = 48000;
      for (std::size_t i = 0; i < n; ++i) s.samples.push_back(rng.uniform(-1.0, 1.0));
      double time_energy = 0.0;
      for (double v : s.samples) time_energy += v * v;
      const auto hs = dsp::dft_power_half(s);
      double spec = hs.magnitudes_sq[0];
      for (std::size_t k = 1; k < hs.bins(); ++k) spec += 2.0 * hs.magnitudes_sq[k];
      const double rel = std::abs(spec - time_energy * static_cast<double>(n)) /
                         (time_energy * static_cast<double>(n));
      worst = std::max(worst, rel);
      if (rel > 1e-9) ok = false;
    }
    report("parseval", ok, "worst rel err " + std::to_string(worst));
  }
  {
    std::size_t failed = 0, checked = 0;
    for (auto kind : activations::kCatalog) {
      for (bool gated : {false, true}) {
        nn::TcnConfig cfg;
        cfg.channels = 2;
        cfg.kernel_size = 2;
        cfg.dilations = {1, 2};
        cfg.activation = activations::make_spec(kind, 0.7, gated);
        auto model = nn::init_model(cfg, 12);
        Rng rng(34);
        dsp::Signal x, target;
        x.sample_rate = target.sample_rate = 48000;
        for (int i = 0; i < 14; ++i) {
          x.samples.push_back(rng.uniform(-1.0, 1.0));
          target.samples.push_back(rng.uniform(-1.0, 1.0));
        }
        const auto res = nn::forward_backward(model, x, target);
        std::vector<std::vector<double>*> bufs;
        std::vector<const std::vector<double>*> gbufs;
        model.params.for_each_buffer([&](std::vector<double>& b) { bufs.push_back(&b); });
        res.grads.for_each_buffer([&](const std::vector<double>& b) { gbufs.push_back(&b); });
        for (std::size_t bi = 0; bi < bufs.size(); ++bi) {
          for (std::size_t j = 0; j < bufs[bi]->size(); ++j) {
            double& p = (*bufs[bi])[j];
            const double orig = p;
            const double h = 1e-6;
            p = orig + h;
            const double lp = nn::forward_backward(model, x, target).loss;
            p = orig - h;
            const double lm = nn::forward_backward(model, x, target).loss;
            p = orig;
            const double fd = (lp - lm) / (2.0 * h);
            const double an = (*gbufs[bi])[j];
            ++checked;
            if (std::abs(fd - an) > 1e-8 &&
                std::abs(fd - an) > 1e-5 * std::max(std::abs(fd), std::abs(an)))
              ++failed;
          }
        }
      }
    }
    report("gradient-oracle", failed == 0,
           std::to_string(checked) + " derivatives, " + std::to_string(failed) + " failed");
  }
  std::printf(failures == 0 ? "selfcheck ok\n" : "selfcheck FAILED\n");
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"neural amp model aliasing workbench"};
  app.require_subcommand(1);

  std::string config_path, plan_path, out_dir = "out", checkpoint_path, dataset_path, out_path;
  std::uint64_t seed_base = 0;
  int workers = 0;
  int fs = 48017;
  std::size_t dft_length = 48017, bin = 1249;
  double amplitude = harness::kDefaultSineAmplitude;
  double band_limit = harness::kCabinetBandLimitHz;

  auto* train_cmd = app.add_subcommand("train", "train one model from a JSON config");
  train_cmd->add_option("--config", config_path, "train config JSON")->required();
  train_cmd->add_option("--seed-base", seed_base, "offset added to the config seed");

  auto* sine_cmd = app.add_subcommand("sinetest", "measure a checkpoint's ASR on a sine test");
  sine_cmd->add_option("--checkpoint", checkpoint_path, "model checkpoint")->required();
  sine_cmd->add_option("--plan", plan_path, "sine test plan JSON (overrides the flags)");
  sine_cmd->add_option("--sample-rate", fs, "sample rate in Hz");
  sine_cmd->add_option("--dft-length", dft_length, "DFT length N");
  sine_cmd->add_option("--bin", bin, "fundamental bin k0");
  sine_cmd->add_option("--amplitude", amplitude, "test tone amplitude");
  sine_cmd->add_option("--out", out_path, "also write the JSON breakdown here");

  auto* sweep_cmd = app.add_subcommand("sweep", "run an activation sweep from a plan JSON");
  sweep_cmd->add_option("--plan", plan_path, "sweep plan JSON")->required();
  sweep_cmd->add_option("--out-dir", out_dir, "output directory for the CSVs");
  sweep_cmd->add_option("--seed-base", seed_base, "offset added to every seed");
  sweep_cmd->add_option("--workers", workers, "worker threads (or env ALIASBENCH_WORKERS)");

  auto* report_cmd = app.add_subcommand("report", "waveform/spectrum/sine-test CSVs for a checkpoint");
  report_cmd->add_option("--checkpoint", checkpoint_path, "model checkpoint")->required();
  report_cmd->add_option("--dataset", dataset_path, "dataset spec JSON")->required();
  report_cmd->add_option("--plan", plan_path, "sine test plan JSON");
  report_cmd->add_option("--out-dir", out_dir, "output directory");
  report_cmd->add_option("--amplitude", amplitude, "test tone amplitude");
  report_cmd->add_option("--band-limit", band_limit, "alias search limit in Hz");

  app.add_subcommand("selfcheck", "run the residue/Parseval/gradient oracle suite");

  CLI11_PARSE(app, argc, argv);

  try {
    if (train_cmd->parsed()) return cmd_train(config_path, seed_base);
    if (sine_cmd->parsed()) return cmd_sinetest(checkpoint_path, plan_path, fs, dft_length, bin, amplitude, out_path);
    if (sweep_cmd->parsed()) return cmd_sweep(plan_path, out_dir, seed_base, workers);
    if (report_cmd->parsed()) return cmd_report(checkpoint_path, dataset_path, plan_path, out_dir, amplitude, band_limit);
    return cmd_selfcheck();
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
