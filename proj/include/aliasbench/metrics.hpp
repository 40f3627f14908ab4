#pragma once

// Error-to-Signal Ratio (training and evaluation forms) and the
// Aliasing-to-Signal Ratio of a nonlinearly processed bin-exact sine.
//
// The ASR works on an N-point DFT where N is coprime to the fundamental bin
// k0.  The multiples of k0 then form a complete residue system mod N, so the
// first N harmonics (most of them aliased back into band) each land on their
// own bin and everything outside the harmonic bins is aliasing.

#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "aliasbench/dft.hpp"
#include "aliasbench/errors.hpp"
#include "aliasbench/signal.hpp"

namespace aliasbench::metrics {

// sum |y - yhat|^2 / sum |y|^2
inline double esr(const dsp::Signal& target, const dsp::Signal& prediction) {
  if (target.empty()) raise(Errc::invalid_argument, "esr: empty target");
  if (target.size() != prediction.size()) raise(Errc::length_mismatch, "esr: length mismatch");
  if (target.sample_rate != prediction.sample_rate) raise(Errc::sample_rate_mismatch, "esr: sample rate mismatch");
  double num = 0.0, den = 0.0;
  for (std::size_t n = 0; n < target.size(); ++n) {
    const double e = target.samples[n] - prediction.samples[n];
    num += e * e;
    den += target.samples[n] * target.samples[n];
  }
  if (den == 0.0) raise(Errc::zero_energy_target, "esr: target has zero energy");
  return num / den;
}

// Loss form of the ESR: both signals pass through the 1 - 0.95 z^-1
// pre-emphasis filter first.
inline double esr_preemphasized(const dsp::Signal& target, const dsp::Signal& prediction) {
  return esr(dsp::preemphasis(target), dsp::preemphasis(prediction));
}

inline bool is_prime(std::uint64_t n) {
  if (n < 2) return false;
  if (n % 2 == 0) return n == 2;
  if (n % 3 == 0) return n == 3;
  for (std::uint64_t d = 5; d * d <= n; d += 6) {
    if (n % d == 0 || n % (d + 2) == 0) return false;
  }
  return true;
}

// One ASR measurement: an N-point DFT with fundamental bin k0 at sample rate
// fs, f0 = fs * k0 / N.  N must be coprime to k0 and k0 within (0, (N-1)/2].
struct SineTestPlan {
  int sample_rate = 48017;
  std::size_t dft_length = 48017;
  std::size_t fundamental_bin = 1249;

  double fundamental_hz() const {
    return static_cast<double>(sample_rate) * static_cast<double>(fundamental_bin) /
           static_cast<double>(dft_length);
  }

  void validate() const {
    if (sample_rate <= 0) raise(Errc::invalid_argument, "SineTestPlan: sample rate must be positive");
    if (dft_length < 3) raise(Errc::invalid_argument, "SineTestPlan: DFT length too short");
    if (fundamental_bin < 1 || fundamental_bin > (dft_length - 1) / 2)
      raise(Errc::invalid_argument, "SineTestPlan: fundamental bin out of range [1, (N-1)/2]");
    if (std::gcd(fundamental_bin, dft_length) != 1)
      raise(Errc::invalid_argument, "SineTestPlan: fundamental bin must be coprime to the DFT length");
  }
};

inline SineTestPlan make_sine_test_plan(int sample_rate, std::size_t dft_length,
                                        std::size_t fundamental_bin, bool require_prime = false) {
  SineTestPlan plan{sample_rate, dft_length, fundamental_bin};
  plan.validate();
  if (require_prime && !is_prime(dft_length))
    raise(Errc::invalid_argument, "SineTestPlan: DFT length is not prime");
  return plan;
}

// Harmonic bins m*k0 for m = 1 .. N0, N0 = floor((N-1) / (2 k0)); these are
// the in-band harmonics of the test fundamental.
inline std::vector<std::size_t> harmonic_bins(const SineTestPlan& plan) {
  plan.validate();
  const std::size_t n0 = (plan.dft_length - 1) / (2 * plan.fundamental_bin);
  std::vector<std::size_t> bins(n0);
  for (std::size_t m = 1; m <= n0; ++m) bins[m - 1] = m * plan.fundamental_bin;
  return bins;
}

struct AsrBreakdown {
  double total_energy = 0.0;     // E_Y, bins 0 .. (N-1)/2, DC included
  double harmonic_energy = 0.0;  // E_H over the harmonic bins
  double aliased_energy = 0.0;   // E_A = E_Y - E_H, raw (may round slightly negative)
  double asr = 0.0;              // max(E_A, 0) / E_H
  std::vector<std::size_t> harmonic_bins;
};

// Bin accounting on an already-computed half spectrum of the steady block.
inline AsrBreakdown asr_from_spectrum(const dsp::HalfSpectrum& hs, const SineTestPlan& plan) {
  plan.validate();
  if (hs.dft_length != plan.dft_length)
    raise(Errc::length_mismatch, "asr: spectrum length must equal the plan's DFT length");
  AsrBreakdown b;
  b.harmonic_bins = harmonic_bins(plan);
  for (double p : hs.magnitudes_sq) b.total_energy += p;
  for (std::size_t k : b.harmonic_bins) b.harmonic_energy += hs.magnitudes_sq[k];
  b.aliased_energy = b.total_energy - b.harmonic_energy;
  if (b.harmonic_energy == 0.0)
    raise(Errc::zero_harmonic_energy, "asr: no energy on any harmonic bin (silent or dead model)");
  b.asr = std::max(b.aliased_energy, 0.0) / b.harmonic_energy;
  return b;
}

// ASR of a steady-state block of exactly N samples.  The caller is expected
// to have discarded any transient already.  Note the DC bin counts toward
// E_Y but never toward E_H, so a constant offset shows up as aliasing; the
// sweep harness removes the mean first.
inline AsrBreakdown asr(const dsp::Signal& y, const SineTestPlan& plan) {
  plan.validate();
  if (y.size() != plan.dft_length)
    raise(Errc::length_mismatch, "asr: signal length must equal the plan's DFT length");
  if (y.sample_rate != plan.sample_rate) raise(Errc::sample_rate_mismatch, "asr: sample rate differs from plan");
  return asr_from_spectrum(dsp::dft_power_half(y), plan);
}

// True iff {k0 * n mod N : n = 0 .. N-1} covers every residue class, i.e.
// iff gcd(k0, N) = 1.  Computed by exhaustive marking, not by gcd, so it can
// serve as an independent check of the coprimality argument.
inline bool residue_coverage(std::size_t k0, std::size_t n) {
  if (n < 2) raise(Errc::invalid_argument, "residue_coverage: N must be >= 2");
  if (k0 < 1 || k0 >= n) raise(Errc::invalid_argument, "residue_coverage: k0 must satisfy 1 <= k0 < N");
  std::vector<bool> seen(n, false);
  std::size_t distinct = 0;
  std::size_t r = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!seen[r]) {
      seen[r] = true;
      ++distinct;
    }
    r += k0;
    if (r >= n) r -= n;
  }
  return distinct == n;
}

}  // namespace aliasbench::metrics
